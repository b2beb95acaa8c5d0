#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mglue/rng.hpp"

namespace mglue {

enum class BlockKind { segment, circle, finite };

std::string to_string(BlockKind k);
BlockKind parse_block_kind(const std::string& s);

/// Unscaled pointed measured compact metric space. Coordinates are a
/// parameter in [0,1] for segment and circle and an atom index for finite
/// blocks. The root is coordinate 0 in every kind.
class Block {
 public:
  static Block segment();
  static Block circle();
  /// k points, pairwise distance 1 through a hidden center, uniform atoms.
  static Block star(std::size_t k);
  /// Star whose arm lengths are given; D(i,j) = arm_i + arm_j.
  static Block star_arms(std::vector<double> arms, std::vector<double> atoms);
  static Block finite(std::vector<std::vector<double>> dist, std::vector<double> atoms);

  BlockKind kind() const { return kind_; }
  bool is_finite() const { return kind_ == BlockKind::finite; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<double>& atoms() const { return atoms_; }

  double root() const { return 0.0; }
  double distance(double x, double y) const;
  double haut() const { return haut_; }
  double diam() const { return diam_; }

  /// nu of the open ball B(x, r).
  double ball_mass(double x, double r) const;
  /// Upper half {x : D(root, x) > haut/2}.
  bool in_upper_half(double x) const;
  /// nu{D(root, x) >= haut/2}, the mass entering property (P_d).
  double upper_half_mass() const;
  /// nu(B(x, r) intersected with the upper half).
  double ball_upper_mass(double x, double r) const;

  double sample(Stream& rng) const;
  /// nu conditioned on the upper half.
  double sample_upper_half(Stream& rng) const;
  /// nu conditioned on the open ball B(x, r); requires positive mass.
  double sample_in_ball(double x, double r, Stream& rng) const;
  /// Deterministic probe points covering the block (grid or all atoms).
  std::vector<double> probe_grid(std::size_t density) const;

  /// Small JSON record: kind and parameters.
  std::string describe() const;

 private:
  Block() = default;
  void finish();

  BlockKind kind_ = BlockKind::segment;
  std::vector<std::vector<double>> dist_;
  std::vector<double> atoms_;
  std::vector<double> cdf_;
  double haut_ = 0;
  double diam_ = 0;
};

using BlockHandle = std::shared_ptr<const Block>;

/// Exponent slack of the ball-mass sandwich for the built-in continua.
double phi(double d, double r);

/// Law of the underlying block B. Deterministic kinds share one instance.
struct BlockLaw {
  BlockKind kind = BlockKind::circle;
  std::size_t k = 3;          // finite: number of points
  bool random_arms = false;   // finite: arms uniform on [1/4, 3/4]

  void validate() const;
  bool deterministic() const { return kind != BlockKind::finite || !random_arms; }
  /// Intrinsic dimension d of the family.
  double dimension() const { return kind == BlockKind::finite ? 0.0 : 1.0; }
  std::string describe() const;
};

/// Per-index realisations of a law. Deterministic laws hand out one shared
/// instance; random laws draw block n from its own substream.
class BlockSource {
 public:
  BlockSource(BlockLaw law, std::uint64_t seed);
  BlockHandle at(std::uint64_t index) const;
  const BlockLaw& law() const { return law_; }

 private:
  BlockLaw law_;
  std::uint64_t seed_;
  BlockHandle shared_;
};

/// Build a single block; k = 0 or a zero atom is rejected.
Block make_block(const BlockLaw& law, std::uint64_t seed);

/// Upper bound on the minimal number of open r-balls covering the block.
/// Exact for segment and circle, greedy for finite blocks.
std::size_t covering_number(const Block& b, double r);

struct NetOptions {
  std::uint64_t draw_budget = 50'000'000;
};

/// Sequential acceptance net: nu-samples at distance >= r/2 from all kept
/// centers are kept until the r-balls cover the block (checked exactly).
std::vector<double> build_net(const Block& b, double r, Stream& rng, const NetOptions& opt = {});
/// Exact covering test for open r-balls around the centers.
bool covers(const Block& b, const std::vector<double>& centers, double r);

struct Fragment {
  std::size_t center_index = 0;
  double center = 0;
  std::vector<std::pair<double, double>> pieces;  // continuum: half-open arcs/intervals
  std::vector<std::size_t> atom_ids;              // finite
  double mass = 0;
  double reach = 0;  // sup of D(center, x) over the fragment
};

struct FragmentDecomposition {
  double r = 0;
  std::vector<double> centers;
  std::vector<Fragment> fragments;

  /// Index of the fragment containing x (nearest center, earlier wins ties).
  std::size_t locate(const Block& b, double x) const;
  /// Number of fragments meeting the open ball B(x, rp).
  std::size_t count_meeting(const Block& b, double x, double rp) const;
};

FragmentDecomposition build_fragments(const Block& b, double r, Stream& rng,
                                      const NetOptions& opt = {});

/// Upper bound of the boules-et-fragments estimate with explicit constants:
/// 4^(d+phi(r/4)) 3^(d-phi(rp+2r)) max(r,rp)^(d-phi(rp+2r)) r^(-d-phi(r/4)).
double fragment_meeting_bound(double d, double r, double rp);

void write_fragments_csv(const std::string& path, const FragmentDecomposition& fd);

}  // namespace mglue
