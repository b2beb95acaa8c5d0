#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace mglue {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  std::size_t points = 0;
};

/// Ordinary least squares y = slope x + intercept.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const std::size_t n = std::min(x.size(), y.size());
  f.points = n;
  if (n < 2) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

struct MeanVar {
  double mean = 0;
  double var = 0;  // unbiased sample variance
  std::size_t n = 0;
  double sem() const { return n > 1 ? std::sqrt(var / static_cast<double>(n)) : 0.0; }
};

inline MeanVar mean_var(const std::vector<double>& v) {
  MeanVar m;
  m.n = v.size();
  if (v.empty()) return m;
  long double s = 0;
  for (double x : v) s += x;
  const long double mu = s / static_cast<long double>(v.size());
  long double q = 0;
  for (double x : v) q += (x - mu) * (x - mu);
  m.mean = static_cast<double>(mu);
  m.var = v.size() > 1 ? static_cast<double>(q / static_cast<long double>(v.size() - 1)) : 0.0;
  return m;
}

/// Value at quantile q in [0,1] (lower interpolation), v need not be sorted.
double quantile(std::vector<double> v, double q);

std::vector<double> log_space(double lo, double hi, std::size_t n);

}  // namespace mglue
