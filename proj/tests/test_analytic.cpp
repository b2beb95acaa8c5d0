#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mglue/analytic.hpp"
#include "mglue/errors.hpp"

using namespace mglue;

namespace {
const DimensionParams base{0.5, 2.0, 1.0};

std::vector<DimensionParams> grid() {
  std::vector<DimensionParams> g;
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double b : {1.1, 1.5, 2.0, 3.0, 5.0})
      for (double d : {0.5, 1.0})
        if (a * d < 1) g.push_back({a, b, d});
  return g;
}
}  // namespace

TEST_CASE("F by hand") {
  CHECK(F(base, 1.5, 0.0) == doctest::Approx(-0.8).epsilon(1e-15));
  CHECK(F(base, 1.0, 0.0) == doctest::Approx(-0.5).epsilon(1e-15));
  for (const auto& p : grid())
    for (double x : {-0.5, 0.0, 1.0, 7.0}) CHECK(F(p, p.d, x) == doctest::Approx(-p.alpha * p.d));
  CHECK_THROWS_AS(F(base, 1.0, -2.0), DomainError);
}

TEST_CASE("dF/dx is positive and matches finite differences") {
  for (const auto& p : grid())
    for (double s : {p.d + 0.01, p.d + 0.3, p.d + 1.0})
      for (double x : {-0.4, 0.0, 0.5, 3.0}) {
        const double h = 1e-6;
        const double fd = (F(p, s, x + h) - F(p, s, x - h)) / (2 * h);
        CHECK(dF_dx(p, s, x) > 0);
        CHECK(dF_dx(p, s, x) == doctest::Approx(fd).epsilon(1e-6));
      }
}

TEST_CASE("f_i recursion") {
  for (double s : {1.0, 1.3, 2.0}) CHECK(f_value(base, 1, s) == -0.5 * s);
  for (const auto& p : grid())
    for (std::size_t i : {1ul, 2ul, 10ul, 50ul})
      CHECK(f_value(p, i, p.d) == doctest::Approx(-p.alpha * p.d).epsilon(1e-13));
  CHECK(f_value(base, 2, 1.5) == doctest::Approx(F(base, 1.5, -0.75)));
  CHECK_THROWS_AS(f_value(base, 0, 1.0), ParameterError);
}

TEST_CASE("s_i decreases towards s_infinity") {
  const FiIteration it = iterate_fi(base, 50, 64, false);
  CHECK(it.states[0].s_i == doctest::Approx(2.0).epsilon(1e-11));
  const double sinf = s_infinity(base);
  for (std::size_t k = 0; k + 1 < it.states.size(); ++k) {
    CHECK(it.states[k + 1].s_i <= it.states[k].s_i);
    CHECK(it.states[k + 1].s_i >= sinf - 1e-10);
    // f_i steepens near s_i, so a 1e-12 root in s leaves ~1e-9 in f
    CHECK(f_value(base, it.states[k].i, it.states[k].s_i) == doctest::Approx(-1).epsilon(1e-7));
  }
}

TEST_CASE("closed form fixed point") {
  for (const auto& p : grid()) {
    const double sinf = s_infinity(p);
    CHECK(sinf > p.d);
    CHECK(f_infinity(p, p.d) == doctest::Approx(-p.alpha * p.d).epsilon(1e-12));
    CHECK(f_infinity(p, sinf) == doctest::Approx(-(1 + p.alpha * sinf) / 2).epsilon(1e-7));
    CHECK(discriminant(p, sinf) == doctest::Approx(0).epsilon(1e-12).scale(1));
    for (double t : {0.0, 0.3, 0.7, 0.99}) {
      const double s = p.d + t * (sinf - p.d);
      CHECK(discriminant(p, s) >= 0);
      const double f = f_infinity(p, s);
      CHECK(F(p, s, f) == doctest::Approx(f).epsilon(1e-11));
    }
    CHECK(dim_formula(p) == doctest::Approx(sinf));
  }
  CHECK_THROWS_AS(f_infinity(base, s_infinity(base) + 0.1), DomainError);
}

TEST_CASE("dimension examples and the other branch") {
  CHECK(dim_formula(base) == doctest::Approx(6 - 4 * std::sqrt(1.5)).epsilon(1e-14));
  CHECK(dim_formula({0.5, 0.8, 1.0}) == 2.0);
  CHECK(dim_formula({0.5, 2.0, 2.0}) == 2.0);
  CHECK(dim_formula({0.5, 1.0, 1.0}) == 2.0);
  CHECK_THROWS_AS(dim_formula({0.0, 2.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(dim_formula({0.5, 2.0, -1.0}), ParameterError);
  CHECK_THROWS_AS(s_infinity({0.5, 0.8, 1.0}), ParameterError);
  CHECK_THROWS_AS(gamma_bar({0.5, 2.0, 2.0}), ParameterError);
}

TEST_CASE("gamma schedule") {
  CHECK(gamma_bar(base) == doctest::Approx(3 + 2 * std::sqrt(1.5)).epsilon(1e-14));
  for (const auto& p : grid()) {
    const FiIteration it = iterate_fi(p, 30, 32, false);
    const GammaSchedule g = gamma_schedule(p, it);
    for (double v : g.gamma) CHECK(v > 1);
    CHECK(g.gamma_numeric == doctest::Approx(g.gamma_bar).epsilon(1e-6));
    CHECK(g.g_max == doctest::Approx(dim_formula(p)).epsilon(1e-9));
    CHECK(g_exponent(p, g.gamma_bar * 1.1) <= g.g_max);
    CHECK(g_exponent(p, g.gamma_bar * 0.95) <= g.g_max);
  }
}

TEST_CASE("surface sweep") {
  std::vector<double> as, bs;
  for (int i = 1; i <= 9; ++i) as.push_back(0.1 * i);
  for (int j = 0; j <= 8; ++j) bs.push_back(1.05 + 0.5 * j);
  const auto cells = surface_sweep(as, bs, 1.0);
  const SurfaceCheck ck = check_surface(cells, as.size(), bs.size(), 1e-3);
  CHECK(ck.bounds);
  CHECK(ck.monotone_alpha);
  CHECK(ck.monotone_beta);
  CHECK(ck.limit);
  CHECK(ck.other_branch);
  const auto off = surface_sweep({0.5}, {0.5, 0.9}, 1.0);
  for (const auto& c : off) {
    CHECK(c.regime == "inverse-alpha");
    CHECK(c.dimension == 2.0);
  }
}

TEST_CASE("reference dimension value") {
  CHECK(dim_formula({0.6, 1.5, 1.0}) == doctest::Approx(10.0 / 3 - std::sqrt(5.0)).epsilon(1e-12));
  const FiIteration it = iterate_fi(base, 2, 32, false);
  CHECK(it.states[1].s_i == doctest::Approx(4.0 / 3).epsilon(1e-10));
  for (double s : {1.0, 1.2, 1.4}) CHECK(f_value(base, 2, s) == doctest::Approx(1 - 1.5 * s).epsilon(1e-14));
}
