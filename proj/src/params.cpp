#include "mglue/params.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "mglue/csv.hpp"
#include "mglue/errors.hpp"

namespace mglue {

namespace {

// Neumaier compensated accumulator in extended precision.
struct Accumulator {
  long double sum = 0;
  long double comp = 0;
  void add(long double x) {
    const long double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  long double value() const { return sum + comp; }
};

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void SequenceSpec::validate() const {
  if (mode == SequenceMode::exact_power) {
    if (!finite(alpha) || !finite(beta) || !finite(lambda_scale) || !finite(weight_scale))
      throw ParameterError("sequence exponents and prefactors must be finite");
    if (alpha <= 0) throw ParameterError("alpha must be positive");
    if (lambda_scale <= 0 || weight_scale <= 0)
      throw ParameterError("sequence prefactors must be positive");
    return;
  }
  if (lambda_table.empty() || weight_table.empty())
    throw ParameterError("user tables must be non-empty");
  if (lambda_table.size() != weight_table.size())
    throw ParameterError("lambda and weight tables differ in length");
  for (double l : lambda_table)
    if (!finite(l) || l < 0) throw ParameterError("lambda table entries must be finite and >= 0");
  for (double w : weight_table)
    if (!finite(w) || w < 0) throw ParameterError("weight table entries must be finite and >= 0");
  if (!(weight_table[0] > 0)) throw ParameterError("w_1 must be positive");
}

double SequenceSpec::lambda_at(std::size_t n) const {
  if (mode == SequenceMode::user_table) {
    if (n == 0 || n > lambda_table.size()) throw ParameterError("index outside lambda table");
    return lambda_table[n - 1];
  }
  return lambda_scale * std::pow(static_cast<double>(n), -alpha);
}

double SequenceSpec::weight_at(std::size_t n) const {
  if (mode == SequenceMode::user_table) {
    if (n == 0 || n > weight_table.size()) throw ParameterError("index outside weight table");
    return weight_table[n - 1];
  }
  return weight_scale * std::pow(static_cast<double>(n), -beta);
}

Sequences make_sequences(const SequenceSpec& spec, std::size_t n_max) {
  if (n_max == 0) throw ParameterError("empty sequence: n_max must be >= 1");
  spec.validate();
  Sequences s;
  s.lambda.assign(n_max + 1, 0.0);
  s.w.assign(n_max + 1, 0.0);
  s.W.assign(n_max + 1, 0.0);
  Accumulator acc;
  for (std::size_t n = 1; n <= n_max; ++n) {
    s.lambda[n] = spec.lambda_at(n);
    s.w[n] = spec.weight_at(n);
    acc.add(s.w[n]);
    s.W[n] = static_cast<double>(acc.value());
  }
  return s;
}

WeightOracle::WeightOracle(SequenceSpec spec, std::size_t table) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.mode == SequenceMode::user_table) table = spec_.weight_table.size();
  table_.assign(table + 1, 0.0L);
  Accumulator acc;
  for (std::size_t n = 1; n <= table; ++n) {
    acc.add(static_cast<long double>(spec_.weight_at(n)));
    table_[n] = acc.value();
  }
}

long double WeightOracle::w(long double n) const {
  if (spec_.mode == SequenceMode::user_table) return spec_.weight_at(static_cast<std::size_t>(n));
  return static_cast<long double>(spec_.weight_scale) * std::pow(n, -static_cast<long double>(spec_.beta));
}

long double WeightOracle::lambda(long double n) const {
  if (spec_.mode == SequenceMode::user_table) return spec_.lambda_at(static_cast<std::size_t>(n));
  return static_cast<long double>(spec_.lambda_scale) *
         std::pow(n, -static_cast<long double>(spec_.alpha));
}

// sum_{from < k <= to} c k^-b by Euler-Maclaurin with two derivative terms.
long double WeightOracle::tail(long double a, long double b) const {
  const long double be = spec_.beta;
  const long double c = spec_.weight_scale;
  auto f = [&](long double x) { return std::pow(x, -be); };
  auto f1 = [&](long double x) { return -be * std::pow(x, -be - 1); };
  auto f3 = [&](long double x) { return -be * (be + 1) * (be + 2) * std::pow(x, -be - 3); };
  long double integral;
  if (std::fabs(be - 1) < 1e-15L)
    integral = std::log(b / a);
  else
    integral = (std::pow(b, 1 - be) - std::pow(a, 1 - be)) / (1 - be);
  const long double s = integral + (f(b) - f(a)) / 2 + (f1(b) - f1(a)) / 12 - (f3(b) - f3(a)) / 720;
  return c * s;
}

long double WeightOracle::W(long double n) const {
  if (n < 1) return 0;
  const long double top = table_size();
  if (n <= top) {
    const auto i = static_cast<std::size_t>(n);
    if (static_cast<long double>(i) == n) return table_[i];
    if (spec_.mode == SequenceMode::user_table) return table_[i];
    // continuous interpolation between integers keeps the quadrature smooth
    if (i + 1 <= table_.size() - 1) {
      const long double t = n - static_cast<long double>(i);
      return table_[i] + t * (table_[i + 1] - table_[i]);
    }
  }
  if (spec_.mode == SequenceMode::user_table)
    throw ParameterError("index beyond the user table");
  return table_.back() + tail(top, n);
}

long double WeightOracle::W_inf() const {
  if (spec_.mode == SequenceMode::user_table) return table_.back();
  if (spec_.beta <= 1) return std::numeric_limits<long double>::infinity();
  const long double a = table_size();
  const long double be = spec_.beta;
  const long double s = std::pow(a, 1 - be) / (be - 1) - std::pow(a, -be) / 2 +
                        be * std::pow(a, -be - 1) / 12 -
                        be * (be + 1) * (be + 2) * std::pow(a, -be - 3) / 720;
  return table_.back() + spec_.weight_scale * s;
}

namespace {

// 8-point Gauss-Legendre nodes and weights on [-1, 1] (positive half).
constexpr std::array<long double, 4> kGLx{0.1834346424956498049394761423601840L,
                                          0.5255324099163289858177390491892464L,
                                          0.7966664774136267395915539364758304L,
                                          0.9602898564975362316835608685694730L};
constexpr std::array<long double, 4> kGLw{0.3626837833783619829651504492771957L,
                                          0.3137066458778872873379622019866013L,
                                          0.2223810344533744705443559944262409L,
                                          0.1012285362903762591525313543099622L};

// sum_{i=lo}^{hi} w_i / W_{i-lag}.
long double ratio_sum(const WeightOracle& o, long double lo, long double hi, int lag) {
  if (hi < lo) return 0;
  Accumulator acc;
  const long double direct_end = std::min(hi, lo + 4194304.0L);
  for (long double i = lo; i <= direct_end; i += 1) {
    const long double W = o.W(i - lag);
    if (W > 0) acc.add(o.w(i) / W);
  }
  if (direct_end < hi) {
    // remaining terms: Euler-Maclaurin with the integral in log coordinates
    const long double a = direct_end + 1;
    const long double b = hi;
    auto g = [&](long double x) { return o.w(x) / o.W(x - lag); };
    const long double ta = std::log(a);
    const long double tb = std::log(b);
    const auto panels = static_cast<int>(std::ceil((tb - ta) / 0.25L)) + 1;
    const long double h = (tb - ta) / panels;
    Accumulator integral;
    for (int p = 0; p < panels; ++p) {
      const long double mid = ta + (p + 0.5L) * h;
      for (std::size_t q = 0; q < kGLx.size(); ++q)
        for (int sgn : {-1, 1}) {
          const long double t = mid + sgn * kGLx[q] * h / 2;
          const long double x = std::exp(t);
          integral.add(kGLw[q] * g(x) * x * h / 2);
        }
    }
    acc.add(integral.value());
    acc.add((g(a) + g(b)) / 2);
  }
  return acc.value();
}

}  // namespace

GoodSet good_set(const SequenceSpec& spec, double epsilon, std::size_t lo, std::size_t hi) {
  if (!(epsilon > 0)) throw ParameterError("epsilon must be positive");
  GoodSet g;
  g.epsilon = epsilon;
  lo = std::max<std::size_t>(lo, 1);
  for (std::size_t k = lo; k <= hi; ++k) {
    const double kk = static_cast<double>(k);
    if (spec.weight_at(k) >= std::pow(kk, -spec.beta - epsilon) &&
        spec.lambda_at(k) >= std::pow(kk, -spec.alpha - epsilon))
      g.members.push_back(k);
  }
  return g;
}

GoodSet good_window(const SequenceSpec& spec, double epsilon, std::size_t n) {
  if (!(epsilon > 0)) throw ParameterError("epsilon must be positive");
  GoodSet g;
  g.epsilon = epsilon;
  if (n == 0) return g;
  const double nn = static_cast<double>(n);
  const double wt = std::pow(nn, -spec.beta - epsilon);
  const double lt = std::pow(nn, -spec.alpha - epsilon);
  for (std::size_t k = n; k <= 2 * n; ++k)
    if (spec.weight_at(k) >= wt && spec.lambda_at(k) >= lt) g.members.push_back(k);
  return g;
}

std::pair<long double, long double> good_window_interval(const SequenceSpec& spec, double epsilon,
                                                         long double n) {
  if (spec.mode != SequenceMode::exact_power)
    throw ParameterError("closed-form windows need exact-power sequences");
  if (!(epsilon > 0)) throw ParameterError("epsilon must be positive");
  long double hi = 2 * n;
  // c k^-e >= n^-e-eps  <=>  k <= (c n^(e+eps))^(1/e) for e > 0
  auto cap = [&](long double c, long double e) {
    if (e > 0) {
      const long double logk = (std::log(c) + (e + epsilon) * std::log(n)) / e;
      if (logk < std::log(hi)) hi = std::floor(std::exp(logk) * (1 + 1e-15L));
    } else {
      // nondecreasing sequence: the smallest k in the window is the binding one
      if (c * std::pow(n, -e) < std::pow(n, -e - static_cast<long double>(epsilon))) hi = n - 1;
    }
  };
  cap(spec.weight_scale, spec.beta);
  cap(spec.lambda_scale, spec.alpha);
  return {n, hi};
}

HypothesisReport check_hypothesis(const SequenceSpec& spec, Hypothesis which, std::size_t horizon,
                                  double epsilon) {
  if (horizon < 10) throw ParameterError("hypothesis horizon must be >= 10");
  if (!(epsilon > 0)) throw ParameterError("epsilon must be positive");
  spec.validate();
  HypothesisReport rep;
  rep.which = which;
  const bool power = spec.mode == SequenceMode::exact_power;
  if (which == Hypothesis::circle_hyp && power && !(spec.beta < 1)) {
    rep.shape_ok = false;
    rep.note = "beta >= 1, hypothesis shape mismatch";
  } else if (which == Hypothesis::diamond_hyp && power && !(spec.beta > 1)) {
    rep.shape_ok = false;
    rep.note = "beta <= 1, hypothesis shape mismatch";
  } else if (which == Hypothesis::square_hyp && power && spec.beta != 1) {
    rep.shape_ok = false;
    rep.note = "beta != 1, hypothesis shape mismatch";
  }
  auto good = [&](std::size_t k) {
    const double kk = static_cast<double>(k);
    return spec.weight_at(k) >= std::pow(kk, -spec.beta - epsilon) &&
           spec.lambda_at(k) >= std::pow(kk, -spec.alpha - epsilon);
  };
  std::vector<std::size_t> checks;
  for (std::size_t c = 16; c < horizon; c *= 2) checks.push_back(c);
  checks.push_back(horizon);

  switch (which) {
    case Hypothesis::circle_hyp: {
      Accumulator num, den;
      std::size_t next = 0;
      for (std::size_t k = 1; k <= horizon; ++k) {
        const double w = spec.weight_at(k);
        den.add(w);
        if (good(k)) num.add(w);
        if (k == checks[next]) {
          rep.checkpoints.emplace_back(k, static_cast<double>(num.value() / den.value()));
          ++next;
        }
      }
      rep.value = rep.checkpoints.back().second;
      break;
    }
    case Hypothesis::diamond_hyp: {
      for (std::size_t c : checks) {
        const double nn = static_cast<double>(c);
        const double wt = std::pow(nn, -spec.beta - epsilon);
        const double lt = std::pow(nn, -spec.alpha - epsilon);
        std::size_t cnt = 0;
        for (std::size_t k = c; k <= 2 * c; ++k)
          if (spec.weight_at(k) >= wt && spec.lambda_at(k) >= lt) ++cnt;
        rep.checkpoints.emplace_back(c, static_cast<double>(cnt) / nn);
      }
      rep.value = rep.checkpoints.back().second;
      break;
    }
    case Hypothesis::square_hyp: {
      if (horizon < 16) throw DomainError("square hypothesis needs N >= 16");
      WeightOracle oracle(spec);
      for (std::size_t c : checks) {
        const long double N = static_cast<long double>(c);
        const long double top = std::floor(std::pow(N, 1.0L + epsilon));
        Accumulator acc;
        if (top - N < 5e6L) {
          for (long double k = N; k <= top; k += 1) {
            const auto kk = static_cast<std::size_t>(k);
            if (spec.mode == SequenceMode::user_table && kk > spec.weight_table.size()) break;
            if (good(kk)) acc.add(oracle.w(k) / oracle.W(k));
          }
        } else {
          // exact powers are good everywhere, so the indicator drops out
          acc.add(ratio_sum(oracle, N, top, 0));
        }
        const double lll = std::log(std::log(std::log(static_cast<double>(c))));
        rep.checkpoints.emplace_back(c, static_cast<double>(acc.value()) / lll);
      }
      rep.value = rep.checkpoints.back().second;
      break;
    }
  }
  return rep;
}

double log_sum_ratio(const SequenceSpec& spec, std::size_t n) {
  if (n == 0) throw ParameterError("log_sum_ratio needs n >= 1");
  spec.validate();
  Accumulator W, S;
  for (std::size_t k = 1; k <= n; ++k) {
    const long double w = spec.weight_at(k);
    W.add(w);
    const long double Wk = W.value();
    if (Wk > 0) S.add(w / Wk);
  }
  return static_cast<double>(S.value());
}

long double window_ratio_sum(const WeightOracle& oracle, long double lo, long double hi) {
  if (lo < 2) throw ParameterError("window_ratio_sum needs lo >= 2");
  return ratio_sum(oracle, lo, hi, 1);
}

void write_sequences_csv(const std::string& path, const Sequences& seq) {
  CsvWriter out(path, {"n", "lambda", "w", "W"});
  for (std::size_t n = 1; n <= seq.size(); ++n) out.row(n, seq.lambda[n], seq.w[n], seq.W[n]);
}

}  // namespace mglue
