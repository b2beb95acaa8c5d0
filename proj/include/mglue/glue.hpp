#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mglue/block_tree.hpp"
#include "mglue/blocks.hpp"
#include "mglue/params.hpp"
#include "mglue/rng.hpp"
#include "mglue/stats.hpp"

namespace mglue {

struct StructureParams {
  SequenceSpec seq;
  BlockLaw law;
  std::uint64_t seed = 1;
};

/// Marked point (J_n, Y_n) after n blocks.
struct MarkedStep {
  std::size_t J = 1;
  PointRef Y;
  double height = 0;             // dist(root, Y_n)
  std::size_t discrete_height = 0;  // depth of J_n in the genealogy tree
  bool renewed = false;          // U_n <= w_n / W_n
  double increment = 0;          // lambda_n D(rho_n, Z_n) when renewed
};

/// The glued structure T_n together with its genealogy tree and the marked
/// point trajectory. Growth always runs the marked-point coupling: when the
/// coin U_{n+1} <= w_{n+1}/W_{n+1}, block n+1 attaches at (J_n, Y_n);
/// otherwise at an independent draw from the normalised weight measure.
/// All randomness is drawn from per-index substreams of the seed.
class GluedStructure {
 public:
  explicit GluedStructure(StructureParams p);
  static GluedStructure grow(StructureParams p, std::size_t n_target);
  void grow_to(std::size_t n_target);

  std::size_t size() const { return tree_.size(); }
  const StructureParams& params() const { return params_; }
  const Sequences& seq() const { return seq_; }
  const BlockTree& tree() const { return tree_; }
  std::size_t parent(std::size_t n) const { return tree_.parent(n); }
  std::size_t depth(std::size_t n) const { return tree_.depth(n); }
  double attach(std::size_t n) const { return tree_.attach(n); }
  /// Entry n (1-based) is the marked point after n blocks.
  const MarkedStep& marked(std::size_t n) const { return traj_[n]; }
  PointRef root() const { return PointRef{1, tree_.block(1).root()}; }

  double distance(const PointRef& a, const PointRef& b) const { return tree_.distance(a, b); }
  PointRef project(const PointRef& x, std::size_t n) const { return tree_.project(x, n); }

  /// K ~ w_k / W_n by binary search on the prefix sums.
  std::size_t sample_index(std::size_t n, Stream& rng) const;
  /// A point of T_N distributed as the normalised weight measure.
  PointRef sample_mu_bar(Stream& rng) const;
  /// mu_bar_N(B(x, r)), exact for the built-in blocks.
  double mu_bar_ball(const PointRef& x, double r) const;

  void write_csv(const std::string& path) const;
  void write_trajectory_csv(const std::string& path) const;

 private:
  void step();

  StructureParams params_;
  BlockSource source_;
  Sequences seq_;
  BlockTree tree_;
  std::vector<MarkedStep> traj_;
};

struct UrnTrajectory {
  std::size_t n = 0;
  std::vector<double> M;  // M[j] = M^{(n)}_{n+j}
};

/// Relative mass of the substructure above block n as a time-dependent urn.
UrnTrajectory urn_trajectory(const Sequences& s, std::size_t n, std::size_t horizon, Stream& rng);

struct MomentResult {
  double mc = 0;
  double product = 0;
  double bound = 0;
};

/// E exp(theta haut_T(J_n)): Monte Carlo over the coin sums, exact product,
/// and the log(1+x) <= x bound.
MomentResult discrete_height_moment(const SequenceSpec& spec, std::size_t n, double theta,
                                    std::size_t replicas, std::uint64_t seed);

/// Same randomness, two scaling sequences.
std::pair<GluedStructure, GluedStructure> monotone_coupling(const StructureParams& p,
                                                            const SequenceSpec& lambda_b,
                                                            std::size_t n);

/// Exact d_H(T_n, T_N) for N = structure size.
double hausdorff_gap(const GluedStructure& s, std::size_t n);
/// Exact d_H(T_n, T_N) for n <= N <= structure size.
double hausdorff_gap(const GluedStructure& s, std::size_t n, std::size_t N);

/// Least squares fit of log(values) against log(n).
LineFit loglog_fit(const std::vector<double>& n, const std::vector<double>& values);

}  // namespace mglue
