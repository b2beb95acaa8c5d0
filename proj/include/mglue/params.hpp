#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace mglue {

enum class SequenceMode { exact_power, user_table };

/// Scaling factors lambda_n = c_l n^-alpha and weights w_n = c_w n^-beta,
/// or explicit tables (entry 0 is index 1).
struct SequenceSpec {
  double alpha = 0.5;
  double beta = 2.0;
  double lambda_scale = 1.0;
  double weight_scale = 1.0;
  SequenceMode mode = SequenceMode::exact_power;
  std::vector<double> lambda_table;
  std::vector<double> weight_table;

  void validate() const;
  double lambda_at(std::size_t n) const;
  double weight_at(std::size_t n) const;
};

/// 1-based arrays; slot 0 holds lambda = w = W = 0.
struct Sequences {
  std::vector<double> lambda;
  std::vector<double> w;
  std::vector<double> W;

  std::size_t size() const { return w.empty() ? 0 : w.size() - 1; }
};

Sequences make_sequences(const SequenceSpec& spec, std::size_t n_max);

/// Sequence values at indices far beyond any array. W_n is an exact
/// compensated sum up to the table size and an Euler-Maclaurin expansion
/// past it; user tables are only defined on their own range.
class WeightOracle {
 public:
  explicit WeightOracle(SequenceSpec spec, std::size_t table = std::size_t{1} << 16);

  const SequenceSpec& spec() const { return spec_; }
  long double w(long double n) const;
  long double lambda(long double n) const;
  /// W evaluated at real n >= 1 (integer n gives the prefix sum).
  long double W(long double n) const;
  /// W_infinity; +inf when beta <= 1.
  long double W_inf() const;
  long double table_size() const { return static_cast<long double>(table_.size() - 1); }

 private:
  long double tail(long double from, long double to) const;
  SequenceSpec spec_;
  std::vector<long double> table_;
};

struct GoodSet {
  double epsilon = 0;
  std::vector<std::size_t> members;
};

/// G^eps restricted to [lo, hi].
GoodSet good_set(const SequenceSpec& spec, double epsilon, std::size_t lo, std::size_t hi);
/// G_n^eps = {k in [n, 2n] : w_k >= n^-beta-eps, lambda_k >= n^-alpha-eps}.
GoodSet good_window(const SequenceSpec& spec, double epsilon, std::size_t n);
/// Closed-form G_n^eps for exact powers as an index interval [n, hi]
/// (hi < n when empty). Works for n far beyond any table.
std::pair<long double, long double> good_window_interval(const SequenceSpec& spec, double epsilon,
                                                         long double n);

enum class Hypothesis { circle_hyp, diamond_hyp, square_hyp };

struct HypothesisReport {
  Hypothesis which{};
  bool shape_ok = true;
  std::string note;
  double value = 0;
  std::vector<std::pair<std::size_t, double>> checkpoints;
};

HypothesisReport check_hypothesis(const SequenceSpec& spec, Hypothesis which, std::size_t horizon,
                                  double epsilon);

/// S_n = sum_{k<=n} w_k / W_k.
double log_sum_ratio(const SequenceSpec& spec, std::size_t n);

/// sum_{i=lo}^{hi} w_i / W_{i-1} for lo >= 2, using quadrature on the
/// Euler-Maclaurin prefix once the range is too large to sum directly.
long double window_ratio_sum(const WeightOracle& oracle, long double lo, long double hi);

void write_sequences_csv(const std::string& path, const Sequences& seq);

}  // namespace mglue
