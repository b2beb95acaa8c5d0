#include "mglue/glue.hpp"

#include <algorithm>
#include <cmath>

#include "mglue/csv.hpp"
#include "mglue/errors.hpp"

namespace mglue {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  return v[static_cast<std::size_t>(std::floor(pos))];
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
  }
  return out;
}

GluedStructure::GluedStructure(StructureParams p)
    : params_(std::move(p)), source_(params_.law, params_.seed) {
  params_.seq.validate();
  seq_ = make_sequences(params_.seq, 1);
  tree_.add_root(1, source_.at(1), seq_.lambda[1], seq_.w[1]);
  Stream z(params_.seed, StreamTag::mark_point, 1);
  MarkedStep m;
  m.J = 1;
  m.Y = PointRef{1, tree_.block(1).sample(z)};
  m.renewed = true;
  m.increment = tree_.height_in(1, m.Y.coord);
  m.height = m.increment;
  traj_.assign(2, m);  // slot 0 unused
}

GluedStructure GluedStructure::grow(StructureParams p, std::size_t n_target) {
  GluedStructure s(std::move(p));
  s.grow_to(n_target);
  return s;
}

void GluedStructure::grow_to(std::size_t n_target) {
  if (n_target <= size()) return;
  seq_ = make_sequences(params_.seq, n_target);
  tree_.reserve(n_target);
  traj_.reserve(n_target + 1);
  while (size() < n_target) step();
}

std::size_t GluedStructure::sample_index(std::size_t n, Stream& rng) const {
  const double target = rng.uniform() * seq_.W[n];
  auto first = seq_.W.begin() + 1;
  auto it = std::upper_bound(first, seq_.W.begin() + static_cast<std::ptrdiff_t>(n) + 1, target);
  std::size_t k = static_cast<std::size_t>(it - seq_.W.begin());
  if (k > n) {
    // rounding put the target at the top: fall back to the last charged block
    k = n;
    while (k > 1 && !(seq_.w[k] > 0)) --k;
  }
  return k;
}

void GluedStructure::step() {
  const std::size_t n = size();
  const std::size_t m = n + 1;
  const MarkedStep& cur = traj_[n];
  Stream coin(params_.seed, StreamTag::mark_coin, m);
  const double u = coin.uniform();
  const double ratio = seq_.W[m] > 0 ? seq_.w[m] / seq_.W[m] : 0.0;
  BlockHandle blk = source_.at(m);
  MarkedStep next = cur;
  next.renewed = false;
  next.increment = 0;
  if (u <= ratio) {
    // (K_n, X_n) := (J_n, Y_n) and the mark moves onto the new block
    tree_.add_child(m, blk, seq_.lambda[m], seq_.w[m], cur.Y.block, cur.Y.coord);
    Stream z(params_.seed, StreamTag::mark_point, m);
    next.J = m;
    next.Y = PointRef{m, tree_.block(m).sample(z)};
    next.renewed = true;
    next.increment = tree_.height_in(m, next.Y.coord);
    next.height = cur.height + next.increment;
    next.discrete_height = cur.discrete_height + 1;
  } else {
    Stream ip(params_.seed, StreamTag::attach, n);
    const std::size_t k = sample_index(n, ip);
    const double x = tree_.block(k).sample(ip);
    tree_.add_child(m, blk, seq_.lambda[m], seq_.w[m], k, x);
  }
  traj_.push_back(next);
}

PointRef GluedStructure::sample_mu_bar(Stream& rng) const {
  const std::size_t k = sample_index(size(), rng);
  return PointRef{k, tree_.block(k).sample(rng)};
}

double GluedStructure::mu_bar_ball(const PointRef& x, double r) const {
  tree_.check(x);
  long double mass = 0;
  tree_.visit_ball(x, r, [&](std::size_t node, double entry, double offset) {
    const double lam = tree_.lambda(node);
    if (!(lam > 0)) {
      if (offset < r) mass += tree_.weight(node);
      return;
    }
    mass += tree_.weight(node) * tree_.block(node).ball_mass(entry, (r - offset) / lam);
  });
  return static_cast<double>(mass / seq_.W[size()]);
}

void GluedStructure::write_csv(const std::string& path) const {
  CsvWriter out(path, {"n", "parent", "attach_coord", "lambda", "w", "depth"});
  for (std::size_t n = 1; n <= size(); ++n)
    out.row(n, tree_.parent(n), tree_.attach(n), tree_.lambda(n), tree_.weight(n), tree_.depth(n));
}

void GluedStructure::write_trajectory_csv(const std::string& path) const {
  CsvWriter out(path, {"step", "J", "height", "discrete_height"});
  for (std::size_t n = 1; n <= size(); ++n)
    out.row(n, traj_[n].J, traj_[n].height, traj_[n].discrete_height);
}

UrnTrajectory urn_trajectory(const Sequences& s, std::size_t n, std::size_t horizon, Stream& rng) {
  if (n == 0 || horizon < n) throw ParameterError("urn needs 1 <= n <= horizon");
  if (horizon > s.size()) throw ParameterError("urn horizon beyond the sequences");
  UrnTrajectory t;
  t.n = n;
  t.M.reserve(horizon - n + 1);
  double M = s.w[n] / s.W[n];
  t.M.push_back(M);
  for (std::size_t i = n; i < horizon; ++i) {
    const double u = rng.uniform();
    const double keep = s.W[i] / s.W[i + 1];
    const double add = s.w[i + 1] / s.W[i + 1];
    M = keep * M + (u <= M ? add : 0.0);
    t.M.push_back(M);
  }
  return t;
}

MomentResult discrete_height_moment(const SequenceSpec& spec, std::size_t n, double theta,
                                    std::size_t replicas, std::uint64_t seed) {
  if (n < 2) throw ParameterError("moment needs n >= 2");
  if (std::fabs(theta) * static_cast<double>(n) > 700)
    throw NumericalError("exp(theta * n) would overflow; reduce theta or n");
  const Sequences s = make_sequences(spec, n);
  const double c = std::expm1(theta);
  long double logp = 0, sum = 0;
  for (std::size_t k = 2; k <= n; ++k) {
    const double q = s.w[k] / s.W[k];
    logp += std::log1p(c * q);
    sum += q;
  }
  MomentResult r;
  r.product = static_cast<double>(std::exp(logp));
  r.bound = static_cast<double>(std::exp(c * sum));
  if (replicas > 0) {
    long double acc = 0;
    for (std::size_t rep = 0; rep < replicas; ++rep) {
      const std::uint64_t rs = replica_seed(seed, rep);
      std::size_t h = 0;
      for (std::size_t k = 2; k <= n; ++k) {
        Stream coin(rs, StreamTag::mark_coin, k);
        if (coin.uniform() <= s.w[k] / s.W[k]) ++h;
      }
      acc += std::exp(static_cast<long double>(theta) * static_cast<long double>(h));
    }
    r.mc = static_cast<double>(acc / static_cast<long double>(replicas));
  }
  return r;
}

std::pair<GluedStructure, GluedStructure> monotone_coupling(const StructureParams& p,
                                                            const SequenceSpec& lambda_b,
                                                            std::size_t n) {
  const Sequences a = make_sequences(p.seq, n);
  for (const SequenceSpec* sp : {&p.seq, &lambda_b})
    if (sp->mode == SequenceMode::user_table && sp->lambda_table.size() < n)
      throw ParameterError("coupled sequences have different lengths");
  if (p.seq.mode == SequenceMode::user_table && lambda_b.mode == SequenceMode::user_table &&
      p.seq.lambda_table.size() != lambda_b.lambda_table.size())
    throw ParameterError("coupled sequences have different lengths");
  const Sequences b = make_sequences(lambda_b, n);
  for (std::size_t k = 1; k <= n; ++k) {
    if (a.w[k] != b.w[k]) throw ParameterError("coupled structures need identical weights");
    if (b.lambda[k] > a.lambda[k]) throw ParameterError("coupling needs lambda'_n <= lambda_n");
  }
  StructureParams pb = p;
  pb.seq = lambda_b;
  return {GluedStructure::grow(p, n), GluedStructure::grow(pb, n)};
}

double hausdorff_gap(const GluedStructure& s, std::size_t n) {
  return hausdorff_gap(s, n, s.size());
}

double hausdorff_gap(const GluedStructure& s, std::size_t n, std::size_t N) {
  const BlockTree& t = s.tree();
  if (n == 0) throw ParameterError("hausdorff_gap needs n >= 1");
  if (N > t.size()) throw ParameterError("hausdorff_gap: N exceeds the structure size");
  if (n >= N) return 0.0;
  // e[i] = dist(rho_i, T_n) along the attachment chain
  std::vector<double> e(N + 1, 0.0);
  double gap = 0;
  for (std::size_t i = n + 1; i <= N; ++i) {
    const std::size_t p = t.parent(i);
    e[i] = (p <= n) ? 0.0 : e[p] + t.height_in(p, t.attach(i));
    gap = std::max(gap, e[i] + t.lambda(i) * t.block(i).haut());
  }
  return gap;
}

LineFit loglog_fit(const std::vector<double>& n, const std::vector<double>& values) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < std::min(n.size(), values.size()); ++i) {
    if (!(n[i] > 0) || !(values[i] > 0)) continue;
    x.push_back(std::log(n[i]));
    y.push_back(std::log(values[i]));
  }
  return fit_line(x, y);
}

}  // namespace mglue
