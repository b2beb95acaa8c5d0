#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mglue {

struct DimensionParams {
  double alpha = 0.5;
  double beta = 2.0;
  double d = 1.0;

  void validate() const;
  /// beta > 1 and alpha d < 1: the branch where the f_i recursion is used.
  bool in_regime() const { return beta > 1 && alpha * d < 1; }
};

/// F(s, x) = alpha(-d + beta d - beta s - d x) / (1 + x + alpha s - alpha d).
double F(const DimensionParams& p, double s, double x);
/// d/dx F(s, x) in closed form.
double dF_dx(const DimensionParams& p, double s, double x);
/// f_i(s) by the exact recursion from f_1(s) = -alpha s.
double f_value(const DimensionParams& p, std::size_t i, double s);

struct FiState {
  std::size_t i = 0;
  double s_i = 0;                // root of f_i(s) = -1
  std::vector<double> grid;      // Chebyshev nodes on [d, s_{i-1}]
  std::vector<double> f;         // f_i on the grid
  std::size_t bisection_steps = 0;
};

struct FiIteration {
  std::vector<FiState> states;   // states[0] is i = 1
  bool converged = false;        // |s_i - s_{i+1}| < 1e-10 reached
};

/// Runs the recursion up to i_max (at most 200 when stop_on_convergence).
FiIteration iterate_fi(const DimensionParams& p, std::size_t i_max, std::size_t grid_size = 512,
                       bool stop_on_convergence = true);
/// Root of f_i(s) = -1 on [d, s_prev] by bisection to 1e-12.
double solve_s(const DimensionParams& p, std::size_t i, double s_prev, std::size_t* steps = nullptr);

double discriminant(const DimensionParams& p, double s);
double f_infinity(const DimensionParams& p, double s);
double s_infinity(const DimensionParams& p);
double dim_formula(const DimensionParams& p);

/// gamma_{i+1}(s) = (beta - alpha d) / (f_i(s) + 1 - alpha d + alpha s).
double gamma_next(const DimensionParams& p, double f_i_at_s, double s);
/// Heuristic lower-bound exponent g(gamma).
double g_exponent(const DimensionParams& p, double gamma);
double gamma_bar(const DimensionParams& p);

struct GammaSchedule {
  std::vector<double> gamma;  // gamma_{i+1}(s_i) for the supplied states
  double gamma_bar = 0;
  double gamma_numeric = 0;   // argmax of g found numerically
  double g_max = 0;
};

GammaSchedule gamma_schedule(const DimensionParams& p, const FiIteration& it);

struct SurfaceCell {
  double alpha = 0;
  double beta = 0;
  double d = 0;
  std::string regime;
  double dimension = 0;
};

std::vector<SurfaceCell> surface_sweep(const std::vector<double>& alphas,
                                       const std::vector<double>& betas, double d);

struct SurfaceCheck {
  bool bounds = true;          // d < dim < 1/alpha on the main branch
  bool monotone_alpha = true;
  bool monotone_beta = true;
  bool limit = true;           // beta -> 1+ recovers 1/alpha
  bool other_branch = true;    // 1/alpha exactly off the main branch
  double worst_limit_gap = 0;
};

/// Checks a sweep laid out alpha-major over the given grids.
SurfaceCheck check_surface(const std::vector<SurfaceCell>& cells, std::size_t n_alpha,
                           std::size_t n_beta, double limit_tol);

void write_surface_csv(const std::string& path, const std::vector<SurfaceCell>& cells);
void write_fi_csv(const std::string& path, const DimensionParams& p, const FiIteration& it,
                  const std::vector<double>& probes);

}  // namespace mglue
