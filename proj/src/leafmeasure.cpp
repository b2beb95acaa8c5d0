#include "mglue/leafmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "mglue/csv.hpp"
#include "mglue/errors.hpp"

namespace mglue {

bool ordering_holds(const DimensionParams& dp, const LeafParams& lp) {
  const double d = dp.d;
  if (!(lp.eta > 0) || (d > 0 && !(lp.eta < 1 / d))) return false;
  if (!(lp.epsilon > 0) || !(lp.epsilon < 1 - lp.eta * d)) return false;
  const double bound = std::max(dp.alpha / lp.eta, (dp.beta - dp.alpha * d) / (1 - lp.eta * d - lp.epsilon));
  return lp.gamma > bound;
}

void validate_ordering(const DimensionParams& dp, const LeafParams& lp) {
  dp.validate();
  if (!(lp.gamma > 1)) throw ParameterError("generation exponent gamma must exceed 1");
  if (lp.n0 < 2) throw ParameterError("n0 must be >= 2");
  if (!ordering_holds(dp, lp))
    throw ParameterError("leaf-measure parameters violate the ordering constraint "
                         "gamma > max(alpha/eta, (beta - alpha d)/(1 - eta d - eps))");
}

double h_schedule(long double n) {
  return static_cast<double>(1.0L / std::log(std::log(n + std::exp(std::numbers::e_v<long double>))));
}

std::vector<long double> generation_indices(std::size_t n0, double gamma, std::size_t k_max) {
  std::vector<long double> out{static_cast<long double>(n0)};
  for (std::size_t k = 1; k <= k_max; ++k) {
    const long double p = std::pow(out.back(), static_cast<long double>(gamma));
    const long double r = std::round(p);
    // powers that are integers up to rounding are not bumped by the ceiling
    out.push_back(std::fabs(p - r) <= 1e-12L * p ? r : std::ceil(p));
  }
  return out;
}

PropertyReport check_property_P(const Block& b, double C, double d, std::size_t probe_density) {
  PropertyReport rep;
  rep.haut = b.haut();
  rep.height_ok = b.haut() >= 1 / C && b.haut() <= C;
  if (d == 0) {
    if (!b.is_finite()) {
      rep.detail = "(P_0) needs a finite block";
      return rep;
    }
    rep.third_ok = static_cast<double>(b.size()) <= C;
    rep.mass_ok = std::all_of(b.atoms().begin(), b.atoms().end(), [&](double a) { return a >= 1 / C; });
    rep.upper_mass = b.upper_half_mass();
    rep.pass = rep.height_ok && rep.mass_ok && rep.third_ok;
    if (!rep.pass) rep.detail = "(P_0) clause failed";
    return rep;
  }
  rep.upper_mass = b.upper_half_mass();
  rep.mass_ok = rep.upper_mass >= 1 / C;
  // (star_{r0}) with r0 = 1/C, compared in log space with a rounding margin
  const double r0 = 1 / C;
  rep.third_ok = true;
  const auto radii = log_space(1e-6, std::min(r0, 1.0) * (1 - 1e-9), 40);
  for (double x : b.probe_grid(probe_density)) {
    for (double r : radii) {
      const double m = b.ball_mass(x, r);
      const double ph = phi(d, r);
      const double lr = std::log(r);
      if (!(m > 0) || std::log(m) < (d + ph) * lr - 1e-12 || std::log(m) > (d - ph) * lr + 1e-12) {
        rep.third_ok = false;
        rep.detail = "ball sandwich fails at x=" + fmt(x) + " r=" + fmt(r);
        break;
      }
    }
    if (!rep.third_ok) break;
  }
  rep.pass = rep.height_ok && rep.mass_ok && rep.third_ok;
  if (!rep.height_ok) rep.detail = "height outside [1/C, C]";
  else if (!rep.mass_ok) rep.detail = "upper-half mass below 1/C";
  return rep;
}

BlockConstants block_constants(const BlockLaw& law, double C, double d, std::uint64_t seed,
                               std::size_t draws) {
  law.validate();
  BlockConstants bc;
  if (law.deterministic()) {
    const Block b = make_block(law, 0);
    bc.p = check_property_P(b, C, d).pass ? 1.0 : 0.0;
    bc.m = bc.p > 0 ? b.upper_half_mass() : 0.0;
    return bc;
  }
  bc.estimated = true;
  BlockSource src(law, seed);
  std::size_t pass = 0;
  long double msum = 0;
  for (std::size_t i = 1; i <= draws; ++i) {
    const BlockHandle b = src.at(i);
    if (!check_property_P(*b, C, d, 50).pass) continue;
    ++pass;
    msum += b->upper_half_mass();
  }
  bc.p = static_cast<double>(pass) / static_cast<double>(draws);
  bc.m = pass ? static_cast<double>(msum / static_cast<long double>(pass)) : 0.0;
  return bc;
}

namespace {

void finish_generation(Generation& g, double min_lambda_window, bool log_factor) {
  if (g.member_count == 0) {
    g.delta = 0;
    g.Lambda = 0;
    return;
  }
  g.Lambda = g.delta;
  if (log_factor) g.Lambda = std::min(g.Lambda, min_lambda_window / static_cast<double>(std::log(g.n_k)));
}

}  // namespace

std::vector<Generation> build_generations(const GluedStructure& s, const DimensionParams& dp,
                                          const LeafParams& lp, std::size_t k_max,
                                          bool enforce_ordering) {
  if (enforce_ordering) validate_ordering(dp, lp);
  const auto ns = generation_indices(lp.n0, lp.gamma, k_max);
  if (!(2 * ns.back() <= static_cast<long double>(s.size())))
    throw ParameterError("structure must be grown to at least 2 n_kmax = " + fmt(2 * ns.back()));
  const BlockTree& t = s.tree();
  const auto& seq = s.seq();
  std::vector<char> prev(s.size() + 1, 0), cur(s.size() + 1, 0);
  std::unordered_map<const Block*, bool> passes;
  std::vector<Generation> out;
  for (std::size_t k = 0; k <= k_max; ++k) {
    Generation g;
    g.k = k;
    g.n_k = ns[k];
    const auto n_k = static_cast<std::size_t>(ns[k]);
    const GoodSet window = good_window(s.params().seq, h_schedule(ns[k]), n_k);
    std::fill(cur.begin(), cur.end(), 0);
    g.delta = std::numeric_limits<double>::infinity();
    double min_lambda = std::numeric_limits<double>::infinity();
    for (std::size_t n : window.members) {
      min_lambda = std::min(min_lambda, seq.lambda[n]);
      const Block& b = t.block(n);
      auto it = passes.find(&b);
      if (it == passes.end()) it = passes.emplace(&b, check_property_P(b, lp.C, dp.d).pass).first;
      if (!it->second) continue;
      if (k > 0) {
        const std::size_t par = t.parent(n);
        if (!prev[par] || !t.block(par).in_upper_half(t.attach(n))) continue;
      }
      cur[n] = 1;
      const double mm = seq.w[n] * b.upper_half_mass();
      g.members.push_back(n);
      g.member_mass.push_back(mm);
      g.mass += mm;
      g.delta = std::min(g.delta, seq.lambda[n] * b.haut() / 2);
    }
    g.member_count = g.members.size();
    finish_generation(g, min_lambda, lp.log_factor);
    out.push_back(std::move(g));
    std::swap(prev, cur);
  }
  return out;
}

namespace {

std::uint64_t index_key(long double n) {
  if (n < 1.8e19L) return static_cast<std::uint64_t>(n);
  const double dn = static_cast<double>(n);
  std::uint64_t bits;
  std::memcpy(&bits, &dn, sizeof bits);
  return mix64(bits);
}

// failures before the first success, for spans beyond 64-bit counters
long double geometric_ld(Stream& rng, long double q) {
  if (q >= 1) return 0;
  if (!(q > 0)) return std::numeric_limits<long double>::infinity();
  return std::floor(std::log(static_cast<long double>(rng.uniform())) / std::log1p(-q));
}

}  // namespace

std::vector<Generation> simulate_generations(const StructureParams& sp, const DimensionParams& dp,
                                             const LeafParams& lp, std::size_t k_max,
                                             std::size_t member_budget, bool enforce_ordering) {
  if (enforce_ordering) validate_ordering(dp, lp);
  if (sp.seq.mode != SequenceMode::exact_power)
    throw ParameterError("sparse generations need exact-power sequences");
  const WeightOracle o(sp.seq);
  const BlockSource src(sp.law, sp.seed);
  const auto ns = generation_indices(lp.n0, lp.gamma, k_max);
  std::unordered_map<const Block*, bool> passes;
  auto admit = [&](long double n, Generation& g) {
    const BlockHandle b = src.at(index_key(n));
    bool ok;
    if (sp.law.deterministic()) {
      auto it = passes.find(b.get());
      if (it == passes.end()) it = passes.emplace(b.get(), check_property_P(*b, lp.C, dp.d).pass).first;
      ok = it->second;
    } else {
      ok = check_property_P(*b, lp.C, dp.d, 50).pass;
    }
    if (!ok) return;
    ++g.member_count;
    g.mass += o.w(n) * b->upper_half_mass();
    g.delta = std::min(g.delta, static_cast<double>(o.lambda(n)) * b->haut() / 2);
  };
  std::vector<Generation> out;
  bool dead = false;
  std::size_t total_members = 0;
  for (std::size_t k = 0; k <= k_max; ++k) {
    Generation g;
    g.k = k;
    g.n_k = ns[k];
    g.delta = std::numeric_limits<double>::infinity();
    const auto [lo, hi] = good_window_interval(sp.seq, h_schedule(ns[k]), ns[k]);
    const double min_lambda = static_cast<double>(o.lambda(hi));
    if (dead || hi < lo || !std::isfinite(static_cast<double>(hi))) {
      g.truncated = dead && !out.empty() && out.back().truncated;
      finish_generation(g, min_lambda, lp.log_factor);
      out.push_back(g);
      dead = true;
      continue;
    }
    if (k == 0) {
      for (long double n = lo; n <= hi; n += 1) admit(n, g);
    } else {
      const long double Bk = out.back().mass;
      if (Bk > 0) {
        Stream rng(sp.seed, StreamTag::generation, k);
        const long double Wlo = o.W(lo - 1);
        const long double q = std::min(1.0L, Bk / Wlo);
        long double n = lo - 1;
        while (true) {
          n += 1 + geometric_ld(rng, q);
          if (!(n <= hi)) break;
          // accept with probability (|B_k| / W_{n-1}) / q
          if (rng.uniform() * o.W(n - 1) > Wlo) continue;
          admit(n, g);
          if (total_members + g.member_count > member_budget) {
            g.truncated = true;
            break;
          }
        }
      }
    }
    total_members += g.member_count;
    finish_generation(g, min_lambda, lp.log_factor);
    if (g.member_count == 0 || g.truncated) dead = true;
    out.push_back(g);
  }
  return out;
}

long double log_a_k(const WeightOracle& o, const BlockConstants& bc, long double L) {
  const SequenceSpec& sp = o.spec();
  if (sp.mode != SequenceMode::exact_power) throw ParameterError("log_a_k needs exact-power sequences");
  if (!(bc.p > 0 && bc.m > 0)) return -std::numeric_limits<long double>::infinity();
  const long double log_pm = std::log(static_cast<long double>(bc.p) * bc.m);
  if (L < std::log(1e15L)) {
    const long double n = std::round(std::exp(L));
    const auto [lo, hi] = good_window_interval(sp, h_schedule(n), n);
    if (hi < lo) return -std::numeric_limits<long double>::infinity();
    return log_pm + std::log(window_ratio_sum(o, std::max(lo, 2.0L), hi));
  }
  if (!(sp.beta > 1)) throw ParameterError("asymptotic a_k needs beta > 1");
  // window [n, rho n] with rho = min(2, caps from the good-set thresholds)
  const long double h = 1.0L / std::log(L);  // h(n) for astronomically large n
  long double log_rho = std::log(2.0L);
  log_rho = std::min(log_rho, (std::log(static_cast<long double>(sp.weight_scale)) + h * L) / sp.beta);
  log_rho = std::min(log_rho, (std::log(static_cast<long double>(sp.lambda_scale)) + h * L) / sp.alpha);
  const long double b1 = sp.beta - 1;
  // sum_{i=n}^{rho n} c i^-beta / W_inf ~ c n^(1-beta) (1 - rho^(1-beta)) / ((beta-1) W_inf)
  return log_pm + std::log(static_cast<long double>(sp.weight_scale) / (b1 * o.W_inf())) - b1 * L +
         std::log(-std::expm1(-b1 * log_rho));
}

ProductFit a_product_exponent(const SequenceSpec& spec, const BlockConstants& bc, double gamma,
                              std::size_t n0, std::size_t k_max) {
  if (k_max < 4) throw ParameterError("a_product_exponent needs k_max >= 4 for a regression");
  if (!(spec.beta > 1)) throw ParameterError("a_product_exponent needs beta > 1");
  if (!(gamma > 1)) throw ParameterError("gamma must exceed 1");
  const WeightOracle o(spec);
  ProductFit pf;
  pf.target = gamma * (1 - spec.beta) / (gamma - 1);
  long double L = std::log(static_cast<long double>(n0));
  long double acc = 0;
  std::vector<double> xs, ys;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const long double n = std::exp(L);
    if (n < 1e18L) {
      const long double p = std::pow(n, static_cast<long double>(gamma));
      const long double r = std::round(p);
      L = std::log(std::fabs(p - r) <= 1e-12L * p ? r : std::ceil(p));
    } else {
      L *= gamma;  // the ceiling is invisible at this size
    }
    acc += log_a_k(o, bc, L);
    pf.log_n.push_back(static_cast<double>(L));
    pf.log_prod.push_back(static_cast<double>(acc));
  }
  const std::size_t m = std::max<std::size_t>(4, k_max / 2);
  const std::size_t first = k_max - m;
  std::vector<double> x(pf.log_n.begin() + static_cast<std::ptrdiff_t>(first), pf.log_n.end());
  std::vector<double> y(pf.log_prod.begin() + static_cast<std::ptrdiff_t>(first), pf.log_prod.end());
  pf.slope = fit_line(x, y).slope;
  return pf;
}

PiK::PiK(const GluedStructure& s, const Generation& g) : s_(&s), members_(g.members) {
  if (g.members.empty()) throw EmptyGenerationError("generation " + std::to_string(g.k) + " is empty");
  is_member_.assign(s.size() + 1, 0);
  for (std::size_t n : members_) {
    is_member_[n] = 1;
    total_ += s.seq().w[n] * s.tree().block(n).upper_half_mass();
    cum_.push_back(static_cast<double>(total_));
  }
}

PointRef PiK::sample(Stream& rng) const {
  const double u = rng.uniform() * cum_.back();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.end()) --it;
  const std::size_t n = members_[static_cast<std::size_t>(it - cum_.begin())];
  return PointRef{n, s_->tree().block(n).sample_upper_half(rng)};
}

double PiK::ball(const PointRef& x, double r) const {
  const BlockTree& t = s_->tree();
  long double m = 0;
  t.visit_ball(x, r, [&](std::size_t node, double entry, double offset) {
    if (!is_member_[node]) return;
    m += s_->seq().w[node] * t.block(node).ball_upper_mass(entry, (r - offset) / t.lambda(node));
  });
  return static_cast<double>(m / total_);
}

void write_census_csv(const std::string& path, const std::vector<std::vector<Generation>>& reps) {
  CsvWriter out(path, {"replica", "k", "n_k", "member_count", "mass", "delta_k"});
  for (std::size_t r = 0; r < reps.size(); ++r)
    for (const auto& g : reps[r]) out.row(r, g.k, g.n_k, g.member_count, g.mass, g.delta);
}

}  // namespace mglue
