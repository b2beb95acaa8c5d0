#include "mglue/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "mglue/analytic.hpp"
#include "mglue/csv.hpp"
#include "mglue/errors.hpp"
#include "mglue/estimators.hpp"
#include "mglue/glue.hpp"
#include "mglue/layout.hpp"
#include "mglue/leafmeasure.hpp"
#include "mglue/parallel.hpp"
#include "mglue/params.hpp"

namespace mglue {

// ---------------------------------------------------------------------------
// config

namespace {

double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ParameterError("bad value for " + key + ": '" + v + "'");
  return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    if (!v.empty() && v[0] != '-') x = std::stoull(v, &pos, 0);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ParameterError("bad value for " + key + ": '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ParameterError("bad value for " + key + ": '" + v + "'");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> k{
      "experiment", "alpha", "beta",  "d",        "block",   "k",     "random_arms", "n_max",
      "replicas",   "seed",  "out",   "tolerance", "threads", "i",     "s",           "epsilon",
      "gamma",      "eta",   "n0",    "k_max",    "n_factor", "r_lo", "r_hi",        "r_count",
      "samples",    "theta", "horizon", "C"};
  return k;
}

void ExperimentConfig::set(const std::string& key, const std::string& v) {
  auto size = [&] { return static_cast<std::size_t>(parse_uint(key, v)); };
  if (key == "experiment") experiment = v;
  else if (key == "alpha") alpha = parse_real(key, v);
  else if (key == "beta") beta = parse_real(key, v);
  else if (key == "d") d = parse_real(key, v);
  else if (key == "block") block = parse_block_kind(v);
  else if (key == "k") k = size();
  else if (key == "random_arms") random_arms = parse_bool(key, v);
  else if (key == "n_max") n_max = size();
  else if (key == "replicas") replicas = size();
  else if (key == "seed") seed = parse_uint(key, v);
  else if (key == "out") out = v;
  else if (key == "tolerance") tolerance = parse_real(key, v);
  else if (key == "threads") threads = static_cast<int>(parse_uint(key, v));
  else if (key == "i") i = size();
  else if (key == "s") s = parse_real(key, v);
  else if (key == "epsilon") epsilon = parse_real(key, v);
  else if (key == "gamma") gamma = parse_real(key, v);
  else if (key == "eta") eta = parse_real(key, v);
  else if (key == "n0") n0 = size();
  else if (key == "k_max") k_max = size();
  else if (key == "n_factor") n_factor = size();
  else if (key == "r_lo") r_lo = parse_real(key, v);
  else if (key == "r_hi") r_hi = parse_real(key, v);
  else if (key == "r_count") r_count = size();
  else if (key == "samples") samples = size();
  else if (key == "theta") theta = parse_real(key, v);
  else if (key == "horizon") horizon = size();
  else if (key == "C") C = parse_real(key, v);
  else throw ParameterError("unknown config key '" + key + "'");
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError(path + ":" + std::to_string(lineno) + ": expected key=value");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  return {{"experiment", experiment},
          {"alpha", fmt(alpha)},
          {"beta", fmt(beta)},
          {"d", fmt(d)},
          {"block", to_string(block)},
          {"k", fmt(k)},
          {"random_arms", fmt(random_arms)},
          {"n_max", fmt(n_max)},
          {"replicas", fmt(replicas)},
          {"seed", fmt(seed)},
          {"tolerance", fmt(tolerance)},
          {"i", fmt(i)},
          {"s", fmt(s)},
          {"epsilon", fmt(epsilon)},
          {"gamma", fmt(gamma)},
          {"eta", fmt(eta)},
          {"n0", fmt(n0)},
          {"k_max", fmt(k_max)},
          {"n_factor", fmt(n_factor)},
          {"r_lo", fmt(r_lo)},
          {"r_hi", fmt(r_hi)},
          {"r_count", fmt(r_count)},
          {"samples", fmt(samples)},
          {"theta", fmt(theta)},
          {"horizon", fmt(horizon)},
          {"C", fmt(C)}};
}

ExperimentConfig defaults_for(const std::string& name) {
  ExperimentConfig c;
  c.experiment = name;
  if (name == "coupling") {
    c.n_max = 1000;
    c.replicas = 100;
  } else if (name == "urn") {
    c.beta = 2;
    c.replicas = 10000;
    c.horizon = 10000;
    c.n0 = 10;
  } else if (name == "monotone") {
    c.samples = 10000;
  } else if (name == "scaling" || name == "hausdorff-gap" || name == "subtree-height") {
    c.n_max = 10000;
    c.replicas = 20;
  } else if (name == "covering-volume") {
    c.replicas = 40;
    c.samples = 500;
  } else if (name == "leaf-measure") {
    c.replicas = 10000;
    c.n0 = 10;
  } else if (name == "grow" || name == "layout") {
    c.alpha = 0.6;
    c.beta = 1.5;
    c.n_max = 3000;
  }
  return c;
}

// ---------------------------------------------------------------------------
// rows

std::string to_string(Relation r) {
  switch (r) {
    case Relation::abs: return "abs";
    case Relation::le: return "le";
    case Relation::ge: return "ge";
    case Relation::info: return "info";
  }
  return "?";
}

bool evaluate(Relation rel, double v, double t, double tol) {
  switch (rel) {
    case Relation::abs: return std::fabs(v - t) <= tol;
    case Relation::le: return v <= t + tol;
    case Relation::ge: return v >= t - tol;
    case Relation::info: return true;
  }
  return false;
}

bool ExperimentResult::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.pass; });
}

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  CsvWriter out(path, {"experiment", "replica", "key", "value", "target", "tolerance", "relation",
                       "pass_flag", "metadata"});
  for (const auto& r : rows)
    out.row(r.experiment, static_cast<long long>(r.replica), r.key, r.value, r.target, r.tolerance,
            to_string(r.relation), r.pass, r.metadata);
}

namespace {

class Ctx {
 public:
  Ctx(const ExperimentConfig& c, ExperimentResult& r) : cfg(c), res(r) {}

  void check(const std::string& key, double value, double target, double tol, Relation rel,
             const std::string& meta = "", long long replica = -1) {
    ResultRow row{cfg.experiment, replica, key, value, target, tol, rel, false, meta};
    row.pass = evaluate(rel, value, target, tol);
    res.rows.push_back(row);
  }
  void require(const std::string& key, bool ok, const std::string& meta = "") {
    check(key, ok ? 1.0 : 0.0, 1.0, 0.0, Relation::abs, meta);
  }
  void info(const std::string& key, double value, const std::string& meta = "") {
    check(key, value, 0.0, 0.0, Relation::info, meta);
  }
  std::string path(const std::string& suffix) {
    const std::string p = (std::filesystem::path(cfg.out) / (cfg.experiment + suffix)).string();
    res.files.push_back(p);
    return p;
  }

  const ExperimentConfig& cfg;
  ExperimentResult& res;
};

std::string meta_of(std::initializer_list<std::pair<const char*, double>> kv) {
  std::string s;
  for (const auto& [k, v] : kv) s += (s.empty() ? "" : ";") + std::string(k) + "=" + fmt(v);
  return s;
}

DimensionParams dims(const ExperimentConfig& c) { return {c.alpha, c.beta, c.d}; }

BlockLaw law_of(const ExperimentConfig& c) { return BlockLaw{c.block, c.k, c.random_arms}; }

SequenceSpec spec_of(double alpha, double beta) {
  SequenceSpec s;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

StructureParams structure_of(const ExperimentConfig& c) {
  return StructureParams{spec_of(c.alpha, c.beta), law_of(c), c.seed};
}

/// Grid of (alpha, beta, d) inside beta > 1, alpha d < 1.
const std::vector<DimensionParams>& regime_grid() {
  static const std::vector<DimensionParams> g{
      {0.5, 2.0, 1.0}, {0.6, 1.5, 1.0}, {0.3, 1.2, 1.0}, {0.9, 3.0, 1.0}, {0.2, 1.1, 2.0},
      {0.25, 2.0, 2.0}, {0.4, 4.0, 1.0}, {0.7, 1.8, 1.0}, {1.0, 2.5, 0.5}, {0.1, 1.5, 3.0}};
  return g;
}

std::string dp_meta(const DimensionParams& p) {
  return meta_of({{"alpha", p.alpha}, {"beta", p.beta}, {"d", p.d}});
}

// ---------------------------------------------------------------------------
// analytic experiments

void exp_dimension_formula(Ctx& x) {
  const double v = dim_formula({0.6, 1.5, 1.0});
  x.check("dim_formula(0.6,1.5,1)", v, 10.0 / 3.0 - std::sqrt(5.0), x.cfg.tol(1e-12), Relation::abs);
  const DimensionParams p = dims(x.cfg);
  x.info("dim_formula(config)", dim_formula(p), dp_meta(p));
}

void exp_fi_iterate(Ctx& x) {
  const double tol_s = x.cfg.tol(1e-6);
  const double tol_f = 1e-8;
  const std::size_t iters = 200;
  for (const auto& p : regime_grid()) {
    const FiIteration it = iterate_fi(p, iters, 32, false);
    const double s_inf = s_infinity(p);
    const double gap = std::fabs(it.states.back().s_i - s_inf);
    x.check("s_gap_after_200", gap, 0.0, tol_s, Relation::abs, dp_meta(p));
    bool decreasing = true;
    for (std::size_t j = 1; j < it.states.size(); ++j)
      if (!(it.states[j].s_i < it.states[j - 1].s_i)) decreasing = false;
    x.require("s_i_strictly_decreasing", decreasing, dp_meta(p));
    double worst = 0;
    for (std::size_t j = 0; j < 20; ++j) {
      const double s = p.d + (s_inf - p.d) * static_cast<double>(j) / 20.0;
      worst = std::max(worst, std::fabs(f_value(p, iters, s) - f_infinity(p, s)));
    }
    x.check("f_gap_after_200", worst, 0.0, tol_f, Relation::abs, dp_meta(p) + ";s_in=[d,s_inf)");
  }
  const DimensionParams p = dims(x.cfg);
  if (p.in_regime()) {
    const FiIteration it = iterate_fi(p, iters, 32, false);
    std::vector<double> probes;
    for (std::size_t j = 0; j <= 10; ++j)
      probes.push_back(p.d + (s_infinity(p) - p.d) * static_cast<double>(j) / 10.0);
    write_fi_csv(x.path("_fi.csv"), p, it, probes);
    x.info("s_last(config)", it.states.back().s_i, dp_meta(p));
    x.info("s_inf(config)", s_infinity(p), dp_meta(p));
  }
}

void exp_fi_closed_form(Ctx& x) {
  const DimensionParams p{0.5, 2.0, 1.0};
  const double tol = x.cfg.tol(1e-10);
  for (double s : {1.0, 1.1, 1.2, 4.0 / 3.0, 1.5, 1.8, 2.0})
    x.check("f_2(" + fmt(s) + ")", f_value(p, 2, s), 1 - 1.5 * s, tol, Relation::abs);
  std::size_t steps = 0;
  x.check("s_2", solve_s(p, 2, 2.0, &steps), 4.0 / 3.0, tol, Relation::abs);
  x.check("s_inf", s_infinity(p), 6 - 4 * std::sqrt(1.5), tol, Relation::abs);
  x.check("dim_formula", dim_formula(p), 6 - 4 * std::sqrt(1.5), tol, Relation::abs);
  // step-2 exponent identity at gamma = (beta - alpha d)/(1 - alpha d)
  const double a = p.alpha, b = p.beta, d = p.d;
  const double g = (b - a * d) / (1 - a * d);
  for (double s : {1.0, 1.25, 1.5, 1.75, 2.0}) {
    const double e1 = -b + g * (1 - a * s);
    const double e2 = -a * d + a * g * d - a * g * s;
    const double e3 = (-a * d + a * b * d - a * b * s + a * a * d * s) / (1 - a * d);
    x.check("step2_identity_a(" + fmt(s) + ")", e1, e3, tol, Relation::abs);
    x.check("step2_identity_b(" + fmt(s) + ")", e2, e3, tol, Relation::abs);
  }
}

void exp_gamma_optimum(Ctx& x) {
  for (const auto& p : regime_grid()) {
    const FiIteration it = iterate_fi(p, 1, 64, true);
    const GammaSchedule gs = gamma_schedule(p, it);
    x.check("gamma_numeric_vs_bar", gs.gamma_numeric, gs.gamma_bar, x.cfg.tol(1e-6), Relation::abs,
            dp_meta(p));
    x.check("g_max_vs_dim", gs.g_max, dim_formula(p), 1e-9, Relation::abs, dp_meta(p));
  }
}

void exp_dimension_surface(Ctx& x) {
  const std::size_t na = 30, nb = 30;
  std::vector<SurfaceCell> all;
  for (double d : {0.5, 1.0, 2.0}) {
    const auto alphas = [&] {
      std::vector<double> v;
      for (std::size_t i = 0; i < na; ++i) v.push_back((0.05 + 1.45 * static_cast<double>(i) / (na - 1)) / d);
      return v;
    }();
    std::vector<double> betas;
    for (std::size_t j = 0; j < nb; ++j) betas.push_back(0.5 + 3.5 * static_cast<double>(j) / (nb - 1));
    const auto cells = surface_sweep(alphas, betas, d);
    const SurfaceCheck ck = check_surface(cells, na, nb, x.cfg.tol(1e-3));
    const std::string m = meta_of({{"d", d}});
    x.require("bounds_d_lt_dim_lt_inv_alpha", ck.bounds, m);
    x.require("nonincreasing_in_alpha", ck.monotone_alpha, m);
    x.require("nonincreasing_in_beta", ck.monotone_beta, m);
    x.require("other_branch_inv_alpha", ck.other_branch, m);
    x.check("limit_beta_to_1", ck.worst_limit_gap, 0.0, x.cfg.tol(1e-3), Relation::abs, m);
    all.insert(all.end(), cells.begin(), cells.end());
  }
  const double v = dim_formula({0.6, 1.5, 1.0});
  x.check("cell(0.6,1.5,1)", v, 10.0 / 3.0 - std::sqrt(5.0), 1e-12, Relation::abs);
  all.push_back({0.6, 1.5, 1.0, "main", v});
  write_surface_csv(x.path("_surface.csv"), all);
}

// ---------------------------------------------------------------------------
// glue experiments

void exp_grow(Ctx& x) {
  const StructureParams sp = structure_of(x.cfg);
  const GluedStructure g = GluedStructure::grow(sp, x.cfg.n_max);
  g.write_csv(x.path("_structure.csv"));
  g.write_trajectory_csv(x.path("_trajectory.csv"));
  write_sequences_csv(x.path("_sequences.csv"), g.seq());
  bool parents = true;
  for (std::size_t n = 2; n <= g.size(); ++n)
    if (!(g.parent(n) < n && g.parent(n) >= 1)) parents = false;
  x.require("parent_lt_n", parents);
  x.info("marked_height", g.marked(g.size()).height);
  x.info("gap_half", hausdorff_gap(g, g.size() / 2));
}

void exp_layout(Ctx& x) {
  const GluedStructure g = GluedStructure::grow(structure_of(x.cfg), x.cfg.n_max);
  LayoutStyle st;
  st.seed = x.cfg.seed;
  write_layout_svg(x.path("_layout.svg"), g, st);
  x.info("blocks", static_cast<double>(g.size()));
}

struct CouplingRep {
  double identity = 0;
  double projection = 0;
  bool monotone = true;
  bool depth = true;
};

void exp_coupling(Ctx& x) {
  const std::size_t n = x.cfg.n_max;
  const auto reps = map_indexed<CouplingRep>(x.cfg.replicas, [&](std::size_t r) {
    StructureParams sp = structure_of(x.cfg);
    sp.seed = replica_seed(x.cfg.seed, r);
    const GluedStructure g = GluedStructure::grow(sp, n);
    CouplingRep out;
    // prefix sums of the renewal increments
    std::vector<double> inc(n + 1, 0.0);
    for (std::size_t k = 2; k <= n; ++k) inc[k] = g.marked(k).renewed ? g.marked(k).increment : 0.0;
    Stream pick(sp.seed, StreamTag::probe, 0);
    for (std::size_t k = 2; k <= n; ++k) {
      const MarkedStep& a = g.marked(k);
      if (a.height < g.marked(k - 1).height) out.monotone = false;
      // dist(Y_k, Y_m) against the increment sum, for m = k - 1, 1 and a random m
      for (std::size_t m : {k - 1, std::size_t{1}, 1 + static_cast<std::size_t>(pick.below(k - 1))}) {
        double sum = 0;
        for (std::size_t j = m + 1; j <= k; ++j) sum += inc[j];
        const double dist = g.distance(a.Y, g.marked(m).Y);
        out.identity = std::max(out.identity, std::fabs(dist - sum));
        const PointRef pr = g.project(a.Y, m);
        const PointRef want = g.marked(m).Y;
        out.projection = std::max(out.projection, pr == want ? 0.0 : g.distance(pr, want) + 1.0);
      }
      std::size_t coins = 0;
      for (std::size_t j = 2; j <= k; ++j) coins += g.marked(j).renewed ? 1 : 0;
      if (g.depth(a.J) != coins) out.depth = false;
    }
    return out;
  });
  double worst = 0, proj = 0;
  bool mono = true, depth = true;
  for (const auto& r : reps) {
    worst = std::max(worst, r.identity);
    proj = std::max(proj, r.projection);
    mono = mono && r.monotone;
    depth = depth && r.depth;
  }
  const std::string m = meta_of({{"n", static_cast<double>(n)}, {"replicas", static_cast<double>(reps.size())}});
  x.check("height_identity_max_error", worst, 0.0, x.cfg.tol(1e-12), Relation::abs, m);
  x.check("projection_consistency", proj, 0.0, 0.0, Relation::abs, m);
  x.require("height_monotone", mono, m);
  x.require("discrete_height_equals_coin_sum", depth, m);
}

void exp_urn(Ctx& x) {
  const std::size_t n = x.cfg.n0, H = x.cfg.horizon;
  const SequenceSpec spec = spec_of(x.cfg.alpha, x.cfg.beta);
  const Sequences seq = make_sequences(spec, H);
  const auto last = map_indexed<double>(x.cfg.replicas, [&](std::size_t r) {
    Stream rng(replica_seed(x.cfg.seed, r), StreamTag::replica, n);
    return urn_trajectory(seq, n, H, rng).M.back();
  });
  const MeanVar mv = mean_var(last);
  const double target = seq.w[n] / seq.W[n];
  const std::string m = meta_of({{"beta", x.cfg.beta}, {"n", static_cast<double>(n)},
                                 {"horizon", static_cast<double>(H)},
                                 {"replicas", static_cast<double>(last.size())}});
  x.check("urn_mean", mv.mean, target, 3 * mv.sem(), Relation::abs, m);
  {
    CsvWriter out(x.path("_urn.csv"), {"replica", "M_horizon"});
    for (std::size_t r = 0; r < last.size(); ++r) out.row(r, last[r]);
  }
  CsvWriter mom(x.path("_moments.csv"), {"theta", "n", "mc", "product", "bound"});
  for (double theta : {-1.0, -0.1, 0.0, 0.1, 0.5, 1.0}) {
    for (std::size_t nn : {2, 10, 100, 500}) {
      const MomentResult mr = discrete_height_moment(spec, nn, theta, 2000, x.cfg.seed);
      const std::string mm = meta_of({{"theta", theta}, {"n", static_cast<double>(nn)}});
      x.check("product_le_bound", mr.product, mr.bound, 0.0, Relation::le, mm);
      x.info("mc_over_product", mr.mc / mr.product, mm);
      mom.row(theta, nn, mr.mc, mr.product, mr.bound);
    }
  }
}

void exp_monotone(Ctx& x) {
  const std::size_t n = x.cfg.n_max;
  StructureParams sp = structure_of(x.cfg);
  const std::size_t pairs = x.cfg.samples;
  auto run = [&](const SequenceSpec& b, const std::string& tag, bool halving) {
    const auto [A, B] = monotone_coupling(sp, b, n);
    Stream rng(x.cfg.seed, StreamTag::probe, halving ? 1 : 2);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
      const PointRef p = A.sample_mu_bar(rng);
      const PointRef q = A.sample_mu_bar(rng);
      const double da = A.distance(p, q), db = B.distance(p, q);
      if (halving ? !(db == da / 2) : !(db <= da)) ++bad;
    }
    x.check(tag, static_cast<double>(bad), 0.0, 0.0, Relation::abs,
            meta_of({{"n", static_cast<double>(n)}, {"pairs", static_cast<double>(pairs)}}));
  };
  SequenceSpec half = sp.seq;
  half.lambda_scale = sp.seq.lambda_scale / 2;
  run(half, "halving_violations", true);
  SequenceSpec shrink = sp.seq;
  shrink.alpha = sp.seq.alpha + 0.1;
  run(shrink, "domination_violations", false);
}

// ---------------------------------------------------------------------------
// blocks

void exp_net_fragment(Ctx& x) {
  CsvWriter out(x.path("_fragments.csv"), {"kind", "r", "center_index", "center_coord", "mass", "diameter_bound"});
  for (BlockKind kind : {BlockKind::segment, BlockKind::circle}) {
    const Block b = kind == BlockKind::segment ? Block::segment() : Block::circle();
    const double d = 1.0;
    for (double r : {0.2, 0.1, 0.05, 0.02}) {
      const std::string m = "kind=" + to_string(kind) + ";" + meta_of({{"r", r}});
      Stream rng(x.cfg.seed, StreamTag::net, static_cast<std::uint64_t>(std::llround(1 / r)) + (kind == BlockKind::circle ? 1000 : 0));
      const FragmentDecomposition fd = build_fragments(b, r, rng);
      const auto& c = fd.centers;
      double sep = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) sep = std::min(sep, b.distance(c[i], c[j]));
      if (c.size() < 2) sep = r;
      x.check("net_separation", sep, r / 2, 0.0, Relation::ge, m);
      Stream probe(x.cfg.seed, StreamTag::probe, static_cast<std::uint64_t>(std::llround(1 / r)));
      double worst = 0;
      for (std::size_t i = 0; i < 10000; ++i) {
        const double p = b.sample(probe);
        double best = std::numeric_limits<double>::infinity();
        for (double cc : c) best = std::min(best, b.distance(p, cc));
        worst = std::max(worst, best);
      }
      x.check("net_covering_worst", worst < r ? 1.0 : 0.0, 1.0, 0.0, Relation::abs, m + ";worst=" + fmt(worst));
      x.check("fragment_count_le_N_r4", static_cast<double>(fd.fragments.size()),
              static_cast<double>(covering_number(b, r / 4)), 0.0, Relation::le, m);
      const double lo = std::pow(r / 4, d + phi(d, r / 4));
      const double hi = std::pow(r, d - phi(d, r));
      bool sandwich = true, reach = true, inner = true;
      for (const auto& f : fd.fragments) {
        if (!(f.mass >= lo && f.mass <= hi)) sandwich = false;
        if (!(f.reach <= r)) reach = false;
        for (int t = 0; t < 50; ++t)
          if (fd.locate(b, b.sample_in_ball(f.center, r / 4, probe)) != f.center_index) inner = false;
        out.row(to_string(kind), r, f.center_index, f.center, f.mass, 2 * f.reach);
      }
      x.require("fragment_mass_sandwich", sandwich, m + ";lo=" + fmt(lo) + ";hi=" + fmt(hi));
      x.require("fragment_within_r", reach, m);
      x.require("fragment_contains_quarter_ball", inner, m);
      const auto grid = b.probe_grid(1000);
      for (double rp : {r / 2, r, 2 * r}) {
        const double bound = fragment_meeting_bound(d, r, rp);
        std::size_t worst_count = 0;
        for (double p : grid) worst_count = std::max(worst_count, fd.count_meeting(b, p, rp));
        x.check("meeting_count_le_bound", static_cast<double>(worst_count), bound, 0.0, Relation::le,
                m + ";" + meta_of({{"rp", rp}}));
        if (kind == BlockKind::circle && r == 0.1 && rp == 0.05)
          x.check("meeting_count_circle_r0.1_rp0.05", static_cast<double>(worst_count), 6, 0, Relation::le, m);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// scaling regressions

void decay_rows(Ctx& x, const DecayResult& r, const std::string& key, double alpha, double tol,
                const std::string& m) {
  x.check(key + "_slope", r.fit.slope, -alpha, tol, Relation::abs, m);
  for (std::size_t j = 0; j < r.n.size(); ++j)
    x.info(key + "(n=" + fmt(r.n[j]) + ")", r.values[j], m);
}

struct ScalingCase {
  double alpha, beta;
  BlockKind kind;
};

const std::vector<ScalingCase> kScalingCases{{1.0, 0.5, BlockKind::segment}, {0.5, 2.0, BlockKind::circle}};

std::vector<std::size_t> decade_list(std::size_t n_max) {
  std::vector<std::size_t> v;
  for (double n = 100; n <= static_cast<double>(n_max) * 1.0000001; n *= std::sqrt(10.0))
    v.push_back(static_cast<std::size_t>(std::llround(n)));
  return v;
}

void exp_decay(Ctx& x, bool gap, bool height) {
  CsvWriter out(x.path("_decay.csv"), {"quantity", "alpha", "beta", "n", "value"});
  for (const auto& c : kScalingCases) {
    StructureParams sp{spec_of(c.alpha, c.beta), BlockLaw{c.kind, 3, false}, x.cfg.seed};
    const auto ns = decade_list(x.cfg.n_max);
    const std::string m = meta_of({{"alpha", c.alpha}, {"beta", c.beta}, {"replicas", static_cast<double>(x.cfg.replicas)}}) +
                          ";block=" + to_string(c.kind);
    if (height) {
      const DecayResult r = subtree_height_decay(sp, ns, x.cfg.n_factor, x.cfg.replicas);
      decay_rows(x, r, "subtree_height", c.alpha, x.cfg.tol(0.15), m);
      for (std::size_t j = 0; j < r.n.size(); ++j) out.row("subtree_height", c.alpha, c.beta, r.n[j], r.values[j]);
    }
    if (gap) {
      const DecayResult r = hausdorff_gap_decay(sp, ns, x.cfg.n_factor, x.cfg.replicas);
      decay_rows(x, r, "hausdorff_gap", c.alpha, x.cfg.tol(0.15), m);
      for (std::size_t j = 0; j < r.n.size(); ++j) out.row("hausdorff_gap", c.alpha, c.beta, r.n[j], r.values[j]);
    }
  }
}

void exp_covering(Ctx& x, double tol) {
  CoveringVolumeConfig cc;
  cc.dp = {0.5, 2.0, 1.0};
  cc.s = 1.5;
  cc.i = 2;
  cc.epsilon = x.cfg.epsilon;
  cc.replicas = x.cfg.replicas;
  cc.samples = 500;
  cc.seed = x.cfg.seed;
  if (x.cfg.experiment == "covering-volume") {
    cc.dp = dims(x.cfg);
    cc.s = x.cfg.s;
    cc.i = x.cfg.i;
    cc.law = law_of(x.cfg);
    cc.samples = x.cfg.samples;
  }
  const CoveringVolumeResult r = covering_volume_experiment(cc);
  const std::string m = dp_meta(cc.dp) + ";" +
                        meta_of({{"i", static_cast<double>(cc.i)}, {"s", cc.s}, {"epsilon", cc.epsilon},
                                 {"gamma", r.gamma}, {"replicas", static_cast<double>(cc.replicas)}});
  x.check("covering_volume_exponent", r.fit.slope, r.target, tol, Relation::abs, m);
  x.check("uncovered_samples", static_cast<double>(r.uncovered), 0, 0, Relation::abs,
          m + ";probes=" + fmt(r.probes));
  CsvWriter out(x.path("_covering.csv"), {"n", "mean_volume", "mean_balls"});
  for (std::size_t j = 0; j < r.n.size(); ++j) out.row(r.n[j], r.mean_volume[j], r.mean_balls[j]);
}

void exp_scaling(Ctx& x) {
  exp_decay(x, true, true);
  ExperimentConfig c = x.cfg;
  c.replicas = 40;
  Ctx y(c, x.res);
  exp_covering(y, 0.3);
}

// ---------------------------------------------------------------------------
// leaf measure

void exp_leaf_measure(Ctx& x) {
  const double C = x.cfg.C;
  // chi(S) against a_k |S|: S = upper half of block 1, n_k = 200
  {
    const std::size_t nk = 200;
    StructureParams sp{spec_of(0.5, 2.0), BlockLaw{BlockKind::circle, 3, false}, x.cfg.seed};
    const BlockConstants bc = block_constants(sp.law, C, 1.0, x.cfg.seed);
    const double nuS = Block::circle().upper_half_mass();
    const auto reps = map_indexed<ChiResult>(x.cfg.replicas, [&](std::size_t r) {
      StructureParams p = sp;
      p.seed = replica_seed(x.cfg.seed, r);
      const GluedStructure g = GluedStructure::grow(p, 2 * nk);
      const Block& b1 = g.tree().block(1);
      return chi_mass(g, 1, [&](double c) { return b1.in_upper_half(c); }, nuS, nk, bc, C, 1.0);
    });
    std::vector<double> chi;
    for (const auto& r : reps) chi.push_back(r.chi);
    const MeanVar mv = mean_var(chi);
    const double expected = reps.front().expected;
    const std::string m = meta_of({{"n_k", static_cast<double>(nk)}, {"S_mass", reps.front().S_mass},
                                   {"replicas", static_cast<double>(chi.size())}});
    x.check("chi_mean_vs_a_k_S", mv.mean, expected, 3 * mv.sem(), Relation::abs, m);
    CsvWriter out(x.path("_chi.csv"), {"n_k", "x", "empirical_tail", "bound"});
    // fitted constant: smallest c with 2 exp(-x^2 n_k |S| / c) above every tail
    std::vector<std::pair<double, double>> tails;
    double c_fit = 0;
    for (double t : {0.25, 0.5, 1.0, 1.5, 2.0}) {
      std::size_t over = 0;
      for (double v : chi)
        if (std::fabs(v - expected) > t * expected) ++over;
      const double tail = static_cast<double>(over) / static_cast<double>(chi.size());
      tails.emplace_back(t, tail);
      if (tail > 0 && tail < 2)
        c_fit = std::max(c_fit, t * t * nk * reps.front().S_mass / -std::log(tail / 2));
    }
    for (const auto& [t, tail] : tails) {
      const double bound = c_fit > 0 ? 2 * std::exp(-t * t * nk * reps.front().S_mass / c_fit) : 0.0;
      out.row(nk, t, tail, bound);
      x.info("chi_tail(x=" + fmt(t) + ")", tail, m + ";bound=" + fmt(bound) + ";c_fit=" + fmt(c_fit));
    }
  }
  // a_k product exponent
  for (auto [beta, gamma] : {std::pair{2.0, 2.0}, std::pair{1.5, 3.0}}) {
    const BlockConstants bc{1.0, 0.5, false};
    const ProductFit pf = a_product_exponent(spec_of(0.5, beta), bc, gamma, x.cfg.n0, 12);
    x.check("a_product_slope", pf.slope, pf.target, x.cfg.tol(0.1), Relation::abs,
            meta_of({{"beta", beta}, {"gamma", gamma}, {"n0", static_cast<double>(x.cfg.n0)}, {"k_max", 12}}));
  }
  // |B_k| growth on nonempty replicas
  CsvWriter census(x.path("_census.csv"), {"beta", "gamma", "replica", "k", "n_k", "member_count", "mass", "delta_k"});
  for (auto [beta, gamma] : {std::pair{1.5, 3.0}, std::pair{2.0, 2.0}}) {
    const DimensionParams dp{0.2, beta, 1.0};
    LeafParams lp;
    lp.gamma = gamma;
    lp.eta = 0.5;
    lp.epsilon = 0.05;
    lp.n0 = x.cfg.n0;
    lp.C = C;
    const bool admissible = ordering_holds(dp, lp);
    StructureParams sp{spec_of(dp.alpha, beta), BlockLaw{BlockKind::circle, 3, false}, x.cfg.seed};
    const std::size_t k_max = 2;
    const std::size_t reps = std::min<std::size_t>(x.cfg.replicas, 50);
    const auto gens = map_indexed<std::vector<Generation>>(reps, [&](std::size_t r) {
      StructureParams p = sp;
      p.seed = replica_seed(x.cfg.seed, r);
      return simulate_generations(p, dp, lp, k_max, 20'000'000, admissible);
    });
    std::vector<double> logn, logm;
    std::size_t nonempty = 0;
    for (std::size_t r = 0; r < gens.size(); ++r) {
      bool all = true;
      for (const auto& g : gens[r]) {
        census.row(beta, gamma, r, g.k, g.n_k, g.member_count, g.mass, g.delta);
        if (!(g.mass > 0)) all = false;
      }
      if (!all) continue;
      ++nonempty;
      for (const auto& g : gens[r]) {
        logn.push_back(static_cast<double>(std::log(g.n_k)));
        logm.push_back(static_cast<double>(std::log(g.mass)));
      }
    }
    const double target = gamma * (1 - beta) / (gamma - 1);
    const std::string m = meta_of({{"alpha", dp.alpha}, {"beta", beta}, {"gamma", gamma}, {"eta", lp.eta},
                                   {"epsilon", lp.epsilon}, {"n0", static_cast<double>(lp.n0)},
                                   {"k_max", static_cast<double>(k_max)},
                                   {"nonempty", static_cast<double>(nonempty)},
                                   {"replicas", static_cast<double>(gens.size())}});
    const double slope = logn.size() >= 2 ? fit_line(logn, logm).slope : std::nan("");
    if (admissible)
      x.check("B_k_growth_slope", slope, target, x.cfg.tol(0.3), Relation::abs, m);
    else
      x.info("B_k_growth_slope_outside_ordering", slope, m + ";target=" + fmt(target));
  }
}

// ---------------------------------------------------------------------------
// estimators

void exp_box_count(Ctx& x) {
  const auto radii = log_space(x.cfg.r_lo, x.cfg.r_hi, x.cfg.r_count);
  const std::size_t N = x.cfg.samples;
  auto sample_tree = [&](const BlockTree& t, std::uint64_t tag) {
    Stream rng(x.cfg.seed, StreamTag::probe, tag);
    std::vector<long double> cum{0.0L};
    for (std::size_t v = 1; v <= t.size(); ++v) cum.push_back(cum.back() + t.weight(v));
    std::vector<PointRef> pts;
    for (std::size_t i = 0; i < N; ++i) {
      const long double u = rng.uniform() * cum.back();
      std::size_t v = static_cast<std::size_t>(std::upper_bound(cum.begin() + 1, cum.end(), u) - cum.begin());
      v = std::min(v, t.size());
      pts.push_back({v, t.block(v).sample(rng)});
    }
    return pts;
  };
  struct Case {
    std::string name;
    BlockTree tree;
    double target;
  };
  std::vector<Case> cases;
  auto single = [](Block b) {
    BlockTree t;
    t.add_root(1, std::make_shared<const Block>(std::move(b)), 1.0, 1.0);
    return t;
  };
  cases.push_back({"segment", single(Block::segment()), 1.0});
  cases.push_back({"circle", single(Block::circle()), 1.0});
  cases.push_back({"finite_star5", single(Block::star(5)), 0.0});
  {
    BlockTree t = single(Block::segment());
    t.add_child(2, std::make_shared<const Block>(Block::segment()), 1.0, 1.0, 1, 0.5);
    cases.push_back({"two_glued_segments", std::move(t), 1.0});
  }
  std::uint64_t tag = 0;
  for (auto& c : cases) {
    const auto pts = sample_tree(c.tree, ++tag);
    const ScalingFit f = box_count(c.tree, pts, radii);
    x.check("box_count_dimension(" + c.name + ")", 0.0 - f.slope, c.target, x.cfg.tol(0.05), Relation::abs,
            meta_of({{"samples", static_cast<double>(N)}, {"r_lo", x.cfg.r_lo}, {"r_hi", x.cfg.r_hi},
                     {"window_lo", f.radii[f.win_hi - 1]}, {"window_hi", f.radii[f.win_lo]}}) +
                "; engineering tolerance");
    write_fit_csv(x.path("_" + c.name + ".csv"), f, c.name);
  }
  // local dimension of the uniform segment measure at interior probes
  const Block seg = Block::segment();
  Stream rng(x.cfg.seed, StreamTag::probe, 99);
  std::vector<PointRef> probes;
  while (probes.size() < 1000) {
    const double p = seg.sample(rng);
    if (p > 0.05 && p < 0.95) probes.push_back({1, p});
  }
  const auto lr = log_space(1e-3, 1e-2, 8);
  const LocalDimension ld =
      local_dimension([&](const PointRef& p, double r) { return seg.ball_mass(p.coord, r); }, probes, lr);
  x.check("local_dimension_q10(segment)", ld.quantile_slope, 1.0, x.cfg.tol(0.05), Relation::abs,
          "probes=1000;interior");

  // mu_bar_N only stands in for the limit measure: report how much the
  // ball masses move between N/4 and N on the same structure
  const std::size_t Nbig = std::max<std::size_t>(x.cfg.n_max, 8);
  const GluedStructure big = GluedStructure::grow(structure_of(x.cfg), Nbig);
  const GluedStructure small = GluedStructure::grow(structure_of(x.cfg), Nbig / 4);
  Stream prng(x.cfg.seed, StreamTag::probe, 100);
  std::vector<PointRef> gp;
  for (int i = 0; i < 200; ++i) gp.push_back(small.sample_mu_bar(prng));
  const auto gr = log_space(x.cfg.r_lo, x.cfg.r_hi, 8);
  double worst = 0;
  for (const auto& p : gp)
    for (double r : gr) worst = std::max(worst, std::fabs(big.mu_bar_ball(p, r) - small.mu_bar_ball(p, r)));
  const auto slope_of = [&](const GluedStructure& g) {
    return local_dimension([&](const PointRef& p, double r) { return g.mu_bar_ball(p, r); }, gp, gr)
        .median_slope;
  };
  const std::string nm = "N=" + std::to_string(Nbig) + ";N_small=" + std::to_string(Nbig / 4);
  x.info("mu_bar_N_max_ball_shift", worst, nm + ";probes=200");
  x.info("mu_bar_N_local_slope_median(N)", slope_of(big), nm);
  x.info("mu_bar_N_local_slope_median(N/4)", slope_of(small), nm);
}

void exp_hypothesis(Ctx& x) {
  const SequenceSpec spec = spec_of(x.cfg.alpha, x.cfg.beta);
  const std::size_t H = std::max<std::size_t>(x.cfg.n_max, 1 << 14);
  const std::pair<Hypothesis, const char*> hs[] = {{Hypothesis::circle_hyp, "circle"},
                                                   {Hypothesis::diamond_hyp, "diamond"},
                                                   {Hypothesis::square_hyp, "square"}};
  for (const auto& [h, name] : hs) {
    const HypothesisReport r = check_hypothesis(spec, h, H, x.cfg.epsilon);
    x.info(std::string("hypothesis_") + name, r.shape_ok ? 1.0 : 0.0,
           meta_of({{"alpha", x.cfg.alpha}, {"beta", x.cfg.beta}, {"value", r.value}}) + ";" + r.note);
  }
}

// ---------------------------------------------------------------------------
// determinism

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void exp_determinism(Ctx& x) {
  const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> runs{
      {"grow", {{"n_max", "2000"}}},
      {"layout", {{"n_max", "1000"}}},
      {"urn", {{"replicas", "300"}, {"horizon", "2000"}}},
      {"hausdorff-gap", {{"n_max", "1000"}, {"replicas", "6"}}},
      {"covering-volume", {{"replicas", "6"}, {"samples", "100"}}}};
  const int saved = max_threads();
  for (const auto& [name, over] : runs) {
    std::vector<std::string> first;
    bool same = true;
    for (int threads : {1, 3}) {
      ExperimentConfig c = defaults_for(name);
      for (const auto& [k, v] : over) c.set(k, v);
      c.seed = x.cfg.seed;
      c.out = (std::filesystem::path(x.cfg.out) / ("determinism_t" + std::to_string(threads))).string();
      set_threads(threads);
      const ExperimentResult r = run_experiment(c);
      std::vector<std::string> bytes;
      for (const auto& f : r.files) bytes.push_back(slurp(f));
      bytes.push_back(slurp((std::filesystem::path(c.out) / (name + "_results.csv")).string()));
      if (first.empty()) first = bytes;
      else same = same && bytes == first;
    }
    x.require("byte_identical(" + name + ")", same, "threads=1,3");
  }
  set_threads(saved);
}

using Runner = std::function<void(Ctx&)>;

const std::map<std::string, Runner>& registry() {
  static const std::map<std::string, Runner> r{
      {"dimension-formula", exp_dimension_formula},
      {"fi-iterate", exp_fi_iterate},
      {"fi-closed-form", exp_fi_closed_form},
      {"gamma-optimum", exp_gamma_optimum},
      {"dimension-surface", exp_dimension_surface},
      {"grow", exp_grow},
      {"layout", exp_layout},
      {"coupling", exp_coupling},
      {"urn", exp_urn},
      {"monotone", exp_monotone},
      {"net-fragment", exp_net_fragment},
      {"scaling", exp_scaling},
      {"hausdorff-gap", [](Ctx& x) { exp_decay(x, true, false); }},
      {"subtree-height", [](Ctx& x) { exp_decay(x, false, true); }},
      {"covering-volume", [](Ctx& x) { exp_covering(x, x.cfg.tol(0.3)); }},
      {"leaf-measure", exp_leaf_measure},
      {"box-count", exp_box_count},
      {"hypothesis-check", exp_hypothesis},
      {"determinism", exp_determinism},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : registry()) v.push_back(k);
    return v;
  }();
  return names;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto it = registry().find(cfg.experiment);
  if (it == registry().end()) throw ParameterError("unknown experiment '" + cfg.experiment + "'");
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec || !std::filesystem::is_directory(cfg.out)) throw IoError("cannot create output directory " + cfg.out);
  ExperimentResult res;
  res.experiment = cfg.experiment;
  Ctx ctx(cfg, res);
  it->second(ctx);
  write_results_csv((std::filesystem::path(cfg.out) / (cfg.experiment + "_results.csv")).string(), res.rows);
  return res;
}

}  // namespace mglue
