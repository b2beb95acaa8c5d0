#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "mglue/analytic.hpp"
#include "mglue/errors.hpp"
#include "mglue/glue.hpp"

namespace mglue {

struct LeafParams {
  double gamma = 3.0;   // n_{k+1} = ceil(n_k^gamma)
  double eta = 0.5;     // fragment-size exponent
  double epsilon = 0.05;
  std::size_t n0 = 10;
  double C = 4.0;       // (P_d) constant
  bool log_factor = true;  // Lambda_k uses min lambda / log n_k
};

/// eta in (0, 1/d), eps in (0, 1 - eta d), gamma > max(alpha/eta, (beta - alpha d)/(1 - eta d - eps)).
void validate_ordering(const DimensionParams& dp, const LeafParams& lp);
bool ordering_holds(const DimensionParams& dp, const LeafParams& lp);

/// Window tolerance h(n) = 1 / log log(n + e^e).
double h_schedule(long double n);

/// n_0, ..., n_kmax; entries overflow to +inf rather than wrap.
std::vector<long double> generation_indices(std::size_t n0, double gamma, std::size_t k_max);

struct PropertyReport {
  bool pass = false;
  bool height_ok = false;
  bool mass_ok = false;     // upper-half mass (d > 0) or atom floor (d = 0)
  bool third_ok = false;    // ball sandwich (d > 0) or cardinality (d = 0)
  double haut = 0;
  double upper_mass = 0;
  std::string detail;
};

PropertyReport check_property_P(const Block& b, double C, double d, std::size_t probe_density = 200);

/// p = P(B satisfies (P_d)) and m = E[upper-half mass | (P_d)].
struct BlockConstants {
  double p = 1;
  double m = 0.5;
  bool estimated = false;
};

BlockConstants block_constants(const BlockLaw& law, double C, double d, std::uint64_t seed,
                               std::size_t draws = 100000);

struct Generation {
  std::size_t k = 0;
  long double n_k = 0;
  std::vector<std::size_t> members;  // node ids (dense) or labels (sparse)
  std::vector<double> member_mass;   // w_n nu_n(upper half)
  std::size_t member_count = 0;
  long double mass = 0;              // |B_k|
  double delta = 0;                  // min over members of lambda_n haut_n / 2
  double Lambda = 0;                 // delta ^ (min lambda over the window / log n_k)
  bool truncated = false;            // member budget hit
};

/// Generations read off a dense structure grown to at least 2 n_{k_max}.
std::vector<Generation> build_generations(const GluedStructure& s, const DimensionParams& dp,
                                          const LeafParams& lp, std::size_t k_max,
                                          bool enforce_ordering = true);

/// Same generations simulated directly: blocks of window k+1 land on the
/// upper halves of generation k at rate |B_k| / W_{n-1}, drawn by thinning.
/// Exact in law and independent of the blocks outside the windows.
std::vector<Generation> simulate_generations(const StructureParams& sp, const DimensionParams& dp,
                                             const LeafParams& lp, std::size_t k_max,
                                             std::size_t member_budget = 20'000'000,
                                             bool enforce_ordering = true);

struct ChiResult {
  double chi = 0;
  double a_k = 0;
  double S_mass = 0;
  double expected = 0;  // a_k |S|
  std::size_t grafted = 0;
};

/// chi(S) for a region S of block i, given as the coordinates accepted by
/// in_S together with its unscaled mass nu_S.
template <typename Pred>
ChiResult chi_mass(const GluedStructure& s, std::size_t i, Pred in_S, double nu_S, std::size_t n_k,
                   const BlockConstants& bc, double C, double d);

/// a_k = p m sum_{i in G_{n_k}} w_i / W_{i-1} for any n_k (log space past tables).
long double log_a_k(const WeightOracle& o, const BlockConstants& bc, long double log_n_k);

struct ProductFit {
  double slope = 0;
  double target = 0;
  std::vector<double> log_n;
  std::vector<double> log_prod;
};

/// Fit of log prod_{i<=k} a_i against log n_k on the largest k.
ProductFit a_product_exponent(const SequenceSpec& spec, const BlockConstants& bc, double gamma,
                              std::size_t n0, std::size_t k_max);

/// Normalised mass measure on the upper halves of a generation.
class PiK {
 public:
  PiK(const GluedStructure& s, const Generation& g);
  PointRef sample(Stream& rng) const;
  double ball(const PointRef& x, double r) const;
  double total() const { return static_cast<double>(total_); }

 private:
  const GluedStructure* s_;
  std::vector<std::size_t> members_;
  std::vector<char> is_member_;
  std::vector<double> cum_;
  long double total_ = 0;
};

void write_census_csv(const std::string& path, const std::vector<std::vector<Generation>>& reps);

// ---------------------------------------------------------------------------

template <typename Pred>
ChiResult chi_mass(const GluedStructure& s, std::size_t i, Pred in_S, double nu_S, std::size_t n_k,
                   const BlockConstants& bc, double C, double d) {
  ChiResult r;
  if (i == 0 || i >= n_k) throw ParameterError("chi_mass needs a block index below n_k");
  if (s.size() < 2 * n_k) throw ParameterError("structure too small for the window");
  const GoodSet g = good_window(s.params().seq, h_schedule(n_k), n_k);
  const auto& seq = s.seq();
  long double sum = 0;
  long double chi = 0;
  std::unordered_map<const Block*, bool> passes;
  for (std::size_t n : g.members) {
    sum += seq.w[n] / seq.W[n - 1];
    if (s.parent(n) != i || !in_S(s.attach(n))) continue;
    const Block& b = s.tree().block(n);
    auto it = passes.find(&b);
    if (it == passes.end()) it = passes.emplace(&b, check_property_P(b, C, d).pass).first;
    if (!it->second) continue;
    chi += seq.w[n] * b.upper_half_mass();
    ++r.grafted;
  }
  r.chi = static_cast<double>(chi);
  r.a_k = static_cast<double>(bc.p * bc.m * sum);
  r.S_mass = seq.w[i] * nu_S;
  r.expected = r.a_k * r.S_mass;
  return r;
}

}  // namespace mglue
