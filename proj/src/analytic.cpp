#include "mglue/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mglue/csv.hpp"
#include "mglue/errors.hpp"

namespace mglue {

void DimensionParams::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(d))
    throw ParameterError("dimension parameters must be finite");
  if (!(alpha > 0)) throw ParameterError("alpha must be positive");
  if (d < 0) throw ParameterError("d must be nonnegative");
}

namespace {

void require_regime(const DimensionParams& p) {
  p.validate();
  if (!p.in_regime()) throw ParameterError("needs beta > 1 and alpha d < 1");
}

}  // namespace

double F(const DimensionParams& p, double s, double x) {
  const double a = p.alpha, b = p.beta, d = p.d;
  const double den = 1 + x + a * s - a * d;
  if (!(den > 0)) throw DomainError("F(s, x) outside its domain (denominator <= 0)");
  return a * (-d + b * d - b * s - d * x) / den;
}

double dF_dx(const DimensionParams& p, double s, double x) {
  const double a = p.alpha;
  const double den = 1 + x + a * s - a * p.d;
  if (!(den > 0)) throw DomainError("F(s, x) outside its domain (denominator <= 0)");
  return a * (p.beta - a * p.d) * (s - p.d) / (den * den);
}

double f_value(const DimensionParams& p, std::size_t i, double s) {
  if (i == 0) throw ParameterError("f_i is indexed from 1");
  double x = -p.alpha * s;
  for (std::size_t k = 1; k < i; ++k) x = F(p, s, x);
  return x;
}

double solve_s(const DimensionParams& p, std::size_t i, double s_prev, std::size_t* steps) {
  if (i == 1) return 1.0 / p.alpha;
  double lo = p.d, hi = s_prev;
  const double flo = f_value(p, i, lo) + 1;
  const double fhi = f_value(p, i, hi) + 1;
  if (!(flo > 0) || !(fhi < 0))
    throw NumericalError("bisection bracket failure for s_" + std::to_string(i) + ": f(d)+1 = " +
                         fmt(flo) + ", f(s_prev)+1 = " + fmt(fhi));
  std::size_t n = 0;
  while (hi - lo > 1e-12 && n < 200) {
    const double mid = 0.5 * (lo + hi);
    if (f_value(p, i, mid) + 1 > 0)
      lo = mid;
    else
      hi = mid;
    ++n;
  }
  if (steps) *steps = n;
  return 0.5 * (lo + hi);
}

FiIteration iterate_fi(const DimensionParams& p, std::size_t i_max, std::size_t grid_size,
                       bool stop_on_convergence) {
  require_regime(p);
  if (i_max == 0) throw ParameterError("i_max must be >= 1");
  if (stop_on_convergence) i_max = std::min<std::size_t>(i_max, 200);
  FiIteration out;
  double s_prev = 1.0 / p.alpha;
  for (std::size_t i = 1; i <= i_max; ++i) {
    FiState st;
    st.i = i;
    st.s_i = solve_s(p, i, s_prev, &st.bisection_steps);
    // f_i lives on [d, s_{i-1}]; for i = 1 take [d, 1/alpha]
    const double top = s_prev;
    st.grid.resize(grid_size);
    st.f.resize(grid_size);
    for (std::size_t g = 0; g < grid_size; ++g) {
      const double t = grid_size == 1 ? 0.0
                                      : 0.5 * (1 - std::cos(std::numbers::pi * static_cast<double>(g) /
                                                            static_cast<double>(grid_size - 1)));
      st.grid[g] = p.d + t * (top - p.d);
      st.f[g] = f_value(p, i, st.grid[g]);
    }
    out.states.push_back(std::move(st));
    const double s_new = out.states.back().s_i;
    if (i > 1 && std::fabs(s_prev - s_new) < 1e-10) {
      out.converged = true;
      if (stop_on_convergence) break;
    }
    s_prev = s_new;
  }
  return out;
}

double discriminant(const DimensionParams& p, double s) {
  const double a = p.alpha, b = p.beta, d = p.d;
  return 1 + 2 * a * s + a * a * s * s - 4 * a * d + 4 * a * b * d - 4 * a * b * s;
}

double f_infinity(const DimensionParams& p, double s) {
  const double D = discriminant(p, s);
  if (D < 0) {
    // rounding at s = s_infinity can leave a tiny negative discriminant
    if (D > -1e-13) return -(1 + p.alpha * s) / 2;
    throw DomainError("f_infinity: negative discriminant, s beyond s_infinity");
  }
  return (-(1 + p.alpha * s) + std::sqrt(D)) / 2;
}

double s_infinity(const DimensionParams& p) {
  require_regime(p);
  return (2 * p.beta - 1 - 2 * std::sqrt((p.beta - 1) * (p.beta - p.alpha * p.d))) / p.alpha;
}

double dim_formula(const DimensionParams& p) {
  p.validate();
  if (p.in_regime())
    return (2 * p.beta - 1 - 2 * std::sqrt((p.beta - 1) * (p.beta - p.alpha * p.d))) / p.alpha;
  return 1.0 / p.alpha;
}

double gamma_next(const DimensionParams& p, double f_i_at_s, double s) {
  const double den = f_i_at_s + 1 - p.alpha * p.d + p.alpha * s;
  if (!(den > 0)) throw DomainError("gamma_{i+1}: nonpositive denominator");
  return (p.beta - p.alpha * p.d) / den;
}

double g_exponent(const DimensionParams& p, double gamma) {
  const double a = p.alpha, b = p.beta, d = p.d;
  return d - (gamma * a * d - a * d + b - gamma) / (a * gamma * (gamma - 1));
}

double gamma_bar(const DimensionParams& p) {
  require_regime(p);
  const double a = p.alpha, b = p.beta, d = p.d;
  return (b - a * d + std::sqrt((b - 1) * (b - a * d))) / (1 - a * d);
}

GammaSchedule gamma_schedule(const DimensionParams& p, const FiIteration& it) {
  require_regime(p);
  GammaSchedule g;
  for (std::size_t k = 0; k < it.states.size(); ++k) {
    const double s = it.states[k].s_i;
    g.gamma.push_back(gamma_next(p, f_value(p, it.states[k].i, s), s));
  }
  g.gamma_bar = gamma_bar(p);
  // golden-section search on a bracket found by a log-spaced scan
  const double lo0 = (p.beta - p.alpha * p.d) / (1 - p.alpha * p.d);
  const double hi0 = 1e3;
  const std::size_t scan = 4000;
  std::size_t best = 1;
  double best_v = -INFINITY;
  std::vector<double> xs(scan + 1);
  for (std::size_t k = 0; k <= scan; ++k) {
    xs[k] = lo0 * std::pow(hi0 / lo0, static_cast<double>(k) / scan);
    const double v = g_exponent(p, xs[k]);
    if (k > 0 && v > best_v) {
      best_v = v;
      best = k;
    }
  }
  // g is flat at its maximum, so comparing values stalls near sqrt(eps);
  // bisect on the sign of g' instead
  const double ad = p.alpha * p.d;
  auto slope_sign = [&](double x) {
    const double N = x * (ad - 1) + p.beta - ad;
    const double h = (ad - 1) * x * (x - 1) - N * (2 * x - 1);
    return -h;  // sign of g'(x)
  };
  double a = xs[best - 1], b = xs[std::min(best + 1, scan)];
  if (slope_sign(a) > 0 && slope_sign(b) < 0) {
    for (int k = 0; k < 200 && b - a > 4e-16 * b; ++k) {
      const double m = 0.5 * (a + b);
      (slope_sign(m) > 0 ? a : b) = m;
    }
  }
  g.gamma_numeric = 0.5 * (a + b);
  g.g_max = g_exponent(p, g.gamma_numeric);
  return g;
}

std::vector<SurfaceCell> surface_sweep(const std::vector<double>& alphas,
                                       const std::vector<double>& betas, double d) {
  std::vector<SurfaceCell> out;
  out.reserve(alphas.size() * betas.size());
  for (double a : alphas)
    for (double b : betas) {
      DimensionParams p{a, b, d};
      SurfaceCell c{a, b, d, p.in_regime() ? "main" : "inverse-alpha", dim_formula(p)};
      out.push_back(c);
    }
  return out;
}

SurfaceCheck check_surface(const std::vector<SurfaceCell>& cells, std::size_t na, std::size_t nb,
                           double limit_tol) {
  SurfaceCheck ck;
  auto at = [&](std::size_t i, std::size_t j) -> const SurfaceCell& { return cells[i * nb + j]; };
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      const SurfaceCell& c = at(i, j);
      const bool main = c.regime == "main";
      if (main) {
        if (!(c.dimension > c.d && c.dimension < 1 / c.alpha)) ck.bounds = false;
      } else if (c.dimension != 1 / c.alpha) {
        ck.other_branch = false;
      }
      if (main && i + 1 < na && at(i + 1, j).regime == "main" &&
          at(i + 1, j).alpha > c.alpha && at(i + 1, j).dimension > c.dimension)
        ck.monotone_alpha = false;
      if (main && j + 1 < nb && at(i, j + 1).regime == "main" &&
          at(i, j + 1).beta > c.beta && at(i, j + 1).dimension > c.dimension)
        ck.monotone_beta = false;
    }
  for (std::size_t i = 0; i < na; ++i) {
    const SurfaceCell& c = at(i, 0);
    if (c.alpha * c.d >= 1) continue;
    const double gap = std::fabs(dim_formula({c.alpha, 1 + 1e-10, c.d}) - 1 / c.alpha);
    ck.worst_limit_gap = std::max(ck.worst_limit_gap, gap);
    if (!(gap < limit_tol)) ck.limit = false;
  }
  return ck;
}

void write_surface_csv(const std::string& path, const std::vector<SurfaceCell>& cells) {
  CsvWriter out(path, {"alpha", "beta", "d", "regime", "dimension"});
  for (const auto& c : cells) out.row(c.alpha, c.beta, c.d, c.regime, c.dimension);
}

void write_fi_csv(const std::string& path, const DimensionParams& p, const FiIteration& it,
                  const std::vector<double>& probes) {
  CsvWriter out(path, {"i", "s_i", "f_i_at_probe_points"});
  for (const auto& st : it.states) {
    std::string vals;
    for (std::size_t k = 0; k < probes.size(); ++k) {
      std::string v;
      try {
        v = fmt(f_value(p, st.i, probes[k]));
      } catch (const DomainError&) {
        v = "nan";
      }
      vals += (k ? ";" : "") + v;
    }
    out.row(st.i, st.s_i, vals);
  }
}

}  // namespace mglue
