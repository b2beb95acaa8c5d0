#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mglue/analytic.hpp"
#include "mglue/block_tree.hpp"
#include "mglue/glue.hpp"
#include "mglue/parallel.hpp"
#include "mglue/stats.hpp"

namespace mglue {

struct ScalingFit {
  std::vector<double> radii;
  std::vector<double> values;
  std::size_t win_lo = 0;  // fit window [win_lo, win_hi)
  std::size_t win_hi = 0;
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  bool degenerate = false;
};

/// log-log fit on the middle two thirds of the radii (all of them when
/// fewer than 6 are given). Nonpositive values are left out.
ScalingFit fit_scaling(std::vector<double> radii, std::vector<double> values);

/// Greedy sequential r-net on the sample: a point becomes a center unless
/// some earlier center is at distance < r.
std::size_t greedy_net_count(const BlockTree& t, const std::vector<PointRef>& pts, double r);

/// Net counts for each radius; radii are processed in parallel.
std::vector<std::size_t> net_counts(const BlockTree& t, const std::vector<PointRef>& pts,
                                    const std::vector<double>& radii);
namespace serial {
std::vector<std::size_t> net_counts(const BlockTree& t, const std::vector<PointRef>& pts,
                                    const std::vector<double>& radii);
}

/// Box-counting fit; the dimension estimate is -slope.
ScalingFit box_count(const BlockTree& t, const std::vector<PointRef>& pts,
                     const std::vector<double>& radii);

struct LocalDimension {
  std::vector<ScalingFit> fits;
  std::vector<char> skipped;  // zero mass at the largest radius
  double quantile_slope = 0;
  double median_slope = 0;
  double q = 0.1;
};

/// Per-probe slope of log mu(B(x, r)) against log r; `ball(x, r)` returns
/// the measure of the open ball. Probes are processed in parallel.
template <typename Ball>
LocalDimension local_dimension(Ball&& ball, const std::vector<PointRef>& probes,
                               const std::vector<double>& radii, double q = 0.1);

struct CoveringVolumeConfig {
  DimensionParams dp{0.5, 2.0, 1.0};
  BlockLaw law{BlockKind::circle, 3, false};
  std::vector<std::size_t> n_list{100, 178, 316, 562, 1000};
  std::size_t i = 2;
  double s = 1.5;
  double epsilon = 0.02;
  std::size_t replicas = 40;
  std::size_t samples = 500;
  double horizon_factor = 8;  // substructures are simulated up to this times n^gamma
  double net_refine = 2;      // net radius divisor on top of the covering radius
  std::uint64_t seed = 1;
};

struct CoveringVolumeResult {
  double gamma = 0;                 // gamma_i(s)
  double target = 0;                // f_i(s)
  std::vector<double> n;
  std::vector<double> mean_volume;
  std::vector<double> mean_balls;
  LineFit fit;
  std::size_t probes = 0;
  std::size_t uncovered = 0;
};

/// Recursive covering of T(b_n): net balls on b_n of radius
/// n^(-alpha gamma + eps) plus step-(i-1) coverings of the children with
/// index <= n^gamma. T(b_n) is simulated by thinning up to the horizon.
CoveringVolumeResult covering_volume_experiment(const CoveringVolumeConfig& cfg);

struct DecayResult {
  std::vector<double> n;
  std::vector<double> values;  // geometric mean over replicas
  LineFit fit;
};

/// d_H(T_n, T_{factor n}), exact, averaged in log over replicas.
DecayResult hausdorff_gap_decay(const StructureParams& sp, const std::vector<std::size_t>& n_list,
                                std::size_t N_factor, std::size_t replicas);
/// haut(T(b_n)) inside T_N with N = factor * max(n_list).
DecayResult subtree_height_decay(const StructureParams& sp, const std::vector<std::size_t>& n_list,
                                 std::size_t N_factor, std::size_t replicas);

void write_fit_csv(const std::string& path, const ScalingFit& f, const std::string& what);

// ---------------------------------------------------------------------------

template <typename Ball>
LocalDimension local_dimension(Ball&& ball, const std::vector<PointRef>& probes,
                               const std::vector<double>& radii, double q) {
  LocalDimension out;
  out.q = q;
  struct One {
    ScalingFit fit;
    char skipped = 0;
  };
  auto one = [&](std::size_t i) {
    One o;
    std::vector<double> m(radii.size());
    double largest = 0;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      m[j] = ball(probes[i], radii[j]);
      if (radii[j] > radii[arg]) arg = j;
    }
    largest = m[arg];
    if (!(largest > 0)) {
      o.skipped = 1;
      return o;
    }
    o.fit = fit_scaling(radii, m);
    return o;
  };
  const auto all = map_indexed<One>(probes.size(), one);
  std::vector<double> slopes;
  for (const auto& o : all) {
    out.fits.push_back(o.fit);
    out.skipped.push_back(o.skipped);
    if (!o.skipped) slopes.push_back(o.fit.slope);
  }
  out.quantile_slope = quantile(slopes, q);
  out.median_slope = quantile(slopes, 0.5);
  return out;
}

}  // namespace mglue
