#include "mglue/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mglue/csv.hpp"
#include "mglue/errors.hpp"

namespace mglue {

ScalingFit fit_scaling(std::vector<double> radii, std::vector<double> values) {
  if (radii.size() != values.size()) throw ParameterError("fit_scaling: size mismatch");
  std::vector<std::size_t> order(radii.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radii[a] > radii[b]; });
  ScalingFit f;
  for (std::size_t i : order) {
    f.radii.push_back(radii[i]);
    f.values.push_back(values[i]);
  }
  const std::size_t n = f.radii.size();
  f.win_lo = n >= 6 ? n / 6 : 0;
  f.win_hi = n >= 6 ? n - n / 6 : n;
  std::vector<double> x, y;
  bool all_equal = true;
  for (std::size_t i = f.win_lo; i < f.win_hi; ++i) {
    if (!(f.radii[i] > 0) || !(f.values[i] > 0)) continue;
    x.push_back(std::log(f.radii[i]));
    y.push_back(std::log(f.values[i]));
    if (f.values[i] != f.values[f.win_lo]) all_equal = false;
  }
  if (x.size() < 2 || all_equal) {
    f.degenerate = true;
    f.r2 = 1;
    if (!y.empty()) f.intercept = y.front();
    return f;
  }
  const LineFit lf = fit_line(x, y);
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.r2 = lf.r2;
  return f;
}

std::size_t greedy_net_count(const BlockTree& t, const std::vector<PointRef>& pts, double r) {
  std::vector<PointRef> centers;
  for (const auto& p : pts) {
    bool covered = false;
    for (const auto& c : centers) {
      if (t.distance(p, c) < r) {
        covered = true;
        break;
      }
    }
    if (!covered) centers.push_back(p);
  }
  return centers.size();
}

std::vector<std::size_t> net_counts(const BlockTree& t, const std::vector<PointRef>& pts,
                                    const std::vector<double>& radii) {
  return map_indexed<std::size_t>(radii.size(),
                                  [&](std::size_t i) { return greedy_net_count(t, pts, radii[i]); });
}

namespace serial {
std::vector<std::size_t> net_counts(const BlockTree& t, const std::vector<PointRef>& pts,
                                    const std::vector<double>& radii) {
  return serial::map_indexed<std::size_t>(
      radii.size(), [&](std::size_t i) { return greedy_net_count(t, pts, radii[i]); });
}
}  // namespace serial

ScalingFit box_count(const BlockTree& t, const std::vector<PointRef>& pts,
                     const std::vector<double>& radii) {
  if (pts.empty()) throw ParameterError("box_count: empty sample");
  for (const auto& p : pts) t.check(p);
  const auto counts = net_counts(t, pts, radii);
  std::vector<double> v(counts.begin(), counts.end());
  ScalingFit f = fit_scaling(radii, v);
  const bool same = std::all_of(pts.begin(), pts.end(), [&](const PointRef& p) { return p == pts.front(); });
  if (same) {
    f.degenerate = true;
    f.slope = 0;
  }
  return f;
}

namespace {

struct SubNode {
  std::size_t node;
  std::size_t label;
};

// T(b_n) grown by thinning: block k joins with probability W_S(k-1)/W_{k-1},
// proposed at the constant rate W_S/W_n between acceptances.
BlockTree simulate_substructure(const WeightOracle& o, const BlockSource& src, std::size_t n,
                                long double horizon, Stream& rng) {
  BlockTree t;
  t.add_root(n, src.at(n), static_cast<double>(o.lambda(n)), static_cast<double>(o.w(n)));
  std::vector<long double> cum{0.0L, o.w(n)};
  const long double Wn = o.W(n);
  long double k = static_cast<long double>(n);
  for (;;) {
    const long double q = std::min(1.0L, cum.back() / Wn);
    const std::uint64_t skip = rng.geometric(static_cast<double>(q));
    k += 1.0L + static_cast<long double>(skip);
    if (!(k <= horizon)) break;
    const long double accept = Wn / o.W(k - 1) * (cum.back() / Wn) / q;
    if (!(rng.uniform() < accept)) continue;
    const long double target = rng.uniform() * cum.back();
    auto it = std::upper_bound(cum.begin() + 1, cum.end(), target);
    std::size_t par = static_cast<std::size_t>(it - cum.begin());
    if (par > t.size()) par = t.size();
    const double x = t.block(par).sample(rng);
    const auto label = static_cast<std::size_t>(k);
    t.add_child(label, src.at(label), static_cast<double>(o.lambda(k)),
                static_cast<double>(o.w(k)), par, x);
    cum.push_back(cum.back() + o.w(k));
  }
  return t;
}

struct CoverOne {
  double volume = 0;
  double balls = 0;
  std::size_t probes = 0;
  std::size_t uncovered = 0;
};

}  // namespace

CoveringVolumeResult covering_volume_experiment(const CoveringVolumeConfig& cfg) {
  cfg.dp.validate();
  cfg.law.validate();
  if (!cfg.dp.in_regime()) throw DomainError("covering_volume_experiment needs beta > 1 and alpha d < 1");
  if (cfg.i != 1 && cfg.i != 2) throw ParameterError("covering_volume_experiment supports i in {1, 2}");
  if (cfg.n_list.size() < 2) throw ParameterError("covering_volume_experiment needs two n values");
  const DimensionParams& dp = cfg.dp;
  const double s_prev = cfg.i == 1 ? std::numeric_limits<double>::infinity() : 1.0 / dp.alpha;
  if (!(cfg.s >= dp.d) || !(cfg.s <= s_prev)) throw DomainError("covering_volume_experiment: s out of range");
  if (!(cfg.epsilon > 0)) throw ParameterError("covering_volume_experiment: epsilon must be positive");

  CoveringVolumeResult res;
  res.target = f_value(dp, cfg.i, cfg.s);
  res.gamma = cfg.i == 1 ? 1.0 : gamma_next(dp, f_value(dp, 1, cfg.s), cfg.s);
  const double a = dp.alpha, eps = cfg.epsilon, s = cfg.s;

  SequenceSpec spec;
  spec.alpha = dp.alpha;
  spec.beta = dp.beta;
  const WeightOracle o(spec);

  for (std::size_t n : cfg.n_list) {
    const double nd = static_cast<double>(n);
    if (cfg.i == 1) {
      res.n.push_back(nd);
      res.mean_volume.push_back(std::pow(2 * std::pow(nd, -a + eps), s));
      res.mean_balls.push_back(1);
      continue;
    }
    const double g = res.gamma;
    const double net_ball = std::pow(nd, -a * g + eps);
    const double child_cut = std::pow(nd, g);
    const long double horizon = static_cast<long double>(cfg.horizon_factor) * child_cut;
    const auto reps = map_indexed<CoverOne>(cfg.replicas, [&](std::size_t r) {
      CoverOne out;
      const std::uint64_t seed = replica_seed(cfg.seed, r);
      const BlockSource src(cfg.law, seed);
      Stream rng(seed, StreamTag::substructure, n);
      const BlockTree t = simulate_substructure(o, src, n, horizon, rng);
      const Block& bn = t.block(1);
      const double lam_n = t.lambda(1);
      Stream net_rng(seed, StreamTag::net, n);
      std::vector<double> centers =
          build_net(bn, std::pow(nd, -a * g) / lam_n / cfg.net_refine, net_rng);
      std::sort(centers.begin(), centers.end());
      out.balls = static_cast<double>(centers.size());
      out.volume = static_cast<double>(centers.size()) * std::pow(2 * net_ball, s);
      for (std::size_t c : t.children(1)) {
        if (static_cast<double>(t.label(c)) > child_cut) continue;
        out.volume += std::pow(2 * std::pow(static_cast<double>(t.label(c)), -a + eps), s);
        out.balls += 1;
      }
      // coverage of a weight-sampled set of points of T(b_n)
      std::vector<long double> cum{0.0L};
      for (std::size_t v = 1; v <= t.size(); ++v) cum.push_back(cum.back() + t.weight(v));
      Stream probe(seed, StreamTag::probe, n);
      for (std::size_t j = 0; j < cfg.samples; ++j) {
        const long double target = probe.uniform() * cum.back();
        auto it = std::upper_bound(cum.begin() + 1, cum.end(), target);
        std::size_t v = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), t.size());
        const PointRef p{v, t.block(v).sample(probe)};
        ++out.probes;
        std::size_t top = v;
        while (top != 0 && t.parent(top) != 1) top = t.parent(top);
        bool ok = false;
        if (top != 0 && static_cast<double>(t.label(top)) <= child_cut) {
          const double rad = std::pow(static_cast<double>(t.label(top)), -a + eps);
          ok = t.distance(p, PointRef{top, t.block(top).root()}) < rad;
        }
        if (!ok) {
          const PointRef q = t.project(p, n);
          const double up = t.distance_to_projection(p, n);
          double best = std::numeric_limits<double>::infinity();
          for (double c : centers) best = std::min(best, lam_n * bn.distance(q.coord, c));
          ok = up + best < net_ball;
        }
        if (!ok) ++out.uncovered;
      }
      return out;
    });
    double vol = 0, balls = 0;
    for (const auto& r : reps) {
      vol += r.volume;
      balls += r.balls;
      res.probes += r.probes;
      res.uncovered += r.uncovered;
    }
    res.n.push_back(nd);
    res.mean_volume.push_back(vol / static_cast<double>(reps.size()));
    res.mean_balls.push_back(balls / static_cast<double>(reps.size()));
  }
  res.fit = loglog_fit(res.n, res.mean_volume);
  return res;
}

namespace {

DecayResult finish_decay(const std::vector<std::size_t>& n_list,
                         const std::vector<std::vector<double>>& per_rep) {
  DecayResult d;
  for (std::size_t j = 0; j < n_list.size(); ++j) {
    long double acc = 0;
    std::size_t cnt = 0;
    for (const auto& r : per_rep) {
      if (r[j] > 0) {
        acc += std::log(r[j]);
        ++cnt;
      }
    }
    d.n.push_back(static_cast<double>(n_list[j]));
    d.values.push_back(cnt ? static_cast<double>(std::exp(acc / static_cast<long double>(cnt))) : 0.0);
  }
  d.fit = loglog_fit(d.n, d.values);
  return d;
}

}  // namespace

DecayResult hausdorff_gap_decay(const StructureParams& sp, const std::vector<std::size_t>& n_list,
                                std::size_t N_factor, std::size_t replicas) {
  if (N_factor < 8) throw ParameterError("hausdorff_gap_decay needs N_factor >= 8");
  if (n_list.empty()) throw ParameterError("hausdorff_gap_decay: empty n list");
  const std::size_t n_max = *std::max_element(n_list.begin(), n_list.end());
  const auto per_rep = map_indexed<std::vector<double>>(replicas, [&](std::size_t r) {
    StructureParams p = sp;
    p.seed = replica_seed(sp.seed, r);
    const GluedStructure g = GluedStructure::grow(p, N_factor * n_max);
    std::vector<double> out;
    for (std::size_t n : n_list) out.push_back(hausdorff_gap(g, n, N_factor * n));
    return out;
  });
  return finish_decay(n_list, per_rep);
}

DecayResult subtree_height_decay(const StructureParams& sp, const std::vector<std::size_t>& n_list,
                                 std::size_t N_factor, std::size_t replicas) {
  if (n_list.empty()) throw ParameterError("subtree_height_decay: empty n list");
  const std::size_t n_max = *std::max_element(n_list.begin(), n_list.end());
  const auto per_rep = map_indexed<std::vector<double>>(replicas, [&](std::size_t r) {
    StructureParams p = sp;
    p.seed = replica_seed(sp.seed, r);
    const GluedStructure g = GluedStructure::grow(p, std::max<std::size_t>(1, N_factor) * n_max);
    const auto H = subtree_heights(g.tree());
    std::vector<double> out;
    for (std::size_t n : n_list) out.push_back(H[n]);
    return out;
  });
  return finish_decay(n_list, per_rep);
}

void write_fit_csv(const std::string& path, const ScalingFit& f, const std::string& what) {
  CsvWriter out(path, {"what", "r", "count_or_mass", "log_r", "log_val", "slope", "intercept", "r2",
                       "window_lo", "window_hi"});
  for (std::size_t i = 0; i < f.radii.size(); ++i) {
    const double lv = f.values[i] > 0 ? std::log(f.values[i]) : -std::numeric_limits<double>::infinity();
    out.row(what, f.radii[i], f.values[i], std::log(f.radii[i]), lv, "", "", "", "", "");
  }
  const double wlo = f.win_lo < f.radii.size() ? f.radii[f.win_lo] : 0.0;
  const double whi = f.win_hi > 0 && f.win_hi <= f.radii.size() ? f.radii[f.win_hi - 1] : 0.0;
  out.row(what + ":summary", "", "", "", "", f.slope, f.intercept, f.r2, wlo, whi);
}

}  // namespace mglue
