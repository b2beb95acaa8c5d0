#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mglue/errors.hpp"
#include "mglue/leafmeasure.hpp"

using namespace mglue;

namespace {

StructureParams circles(std::uint64_t seed = 1) {
  StructureParams p;
  p.seq.alpha = 0.5;
  p.seq.beta = 2.0;
  p.law = BlockLaw{BlockKind::circle, 3, false};
  p.seed = seed;
  return p;
}

LeafParams leaf(double gamma) {
  LeafParams lp;
  lp.gamma = gamma;
  lp.eta = 0.5;
  lp.epsilon = 0.05;
  lp.n0 = 10;
  lp.C = 4;
  return lp;
}

}  // namespace

TEST_CASE("property (P) on the built-in blocks") {
  CHECK(check_property_P(Block::circle(), 4, 1).pass);
  const PropertyReport seg = check_property_P(Block::segment(), 1.5, 1);
  CHECK_FALSE(seg.pass);
  CHECK(seg.height_ok);
  CHECK_FALSE(seg.mass_ok);
  CHECK(check_property_P(Block::star(3), 3, 0).pass);
  CHECK_FALSE(check_property_P(Block::star(4), 3, 0).pass);
  CHECK_FALSE(check_property_P(Block::circle(), 4, 0).pass);
  CHECK_FALSE(check_property_P(Block::circle(), 1.5, 1).pass);
}

TEST_CASE("ordering constraint") {
  const DimensionParams dp{0.5, 2.0, 1.0};
  CHECK(ordering_holds(dp, leaf(3.5)));
  CHECK_FALSE(ordering_holds(dp, leaf(3.0)));
  CHECK_THROWS_AS(validate_ordering(dp, leaf(3.0)), ParameterError);
  LeafParams bad = leaf(10);
  bad.eta = 1.0;
  CHECK_FALSE(ordering_holds(dp, bad));
  bad = leaf(10);
  bad.epsilon = 0.6;
  CHECK_FALSE(ordering_holds(dp, bad));
  bad = leaf(10);
  bad.n0 = 1;
  CHECK_THROWS_AS(validate_ordering(dp, bad), ParameterError);
  // (beta, gamma) = (2, 2) is infeasible for every alpha and eta
  for (double a : {0.1, 0.3, 0.5, 0.9})
    for (double eta : {0.05, 0.2, 0.5, 0.9}) {
      LeafParams lp = leaf(2.0);
      lp.eta = eta;
      lp.epsilon = 0.01;
      CHECK_FALSE(ordering_holds({a, 2.0, 1.0}, lp));
    }
}

TEST_CASE("window tolerance and generation indices") {
  CHECK(h_schedule(0) == doctest::Approx(1.0).epsilon(1e-15));
  double last = 2;
  for (long double n : {1.0L, 10.0L, 1e3L, 1e9L, 1e100L}) {
    const double h = h_schedule(n);
    CHECK(h < last);
    CHECK(h > 0);
    last = h;
  }
  const auto ns = generation_indices(10, 2.0, 3);
  REQUIRE(ns.size() == 4);
  CHECK(ns[1] == 100);
  CHECK(ns[2] == 10000);
  CHECK(ns[3] == 1e8L);
  const auto odd = generation_indices(10, 1.5, 2);
  CHECK(odd[1] == 32);
  CHECK(odd[2] == std::ceil(std::pow(32.0L, 1.5L)));
  const auto big = generation_indices(10, 3, 12);
  CHECK(std::isinf(big.back()));
}

TEST_CASE("dense generations are nested upper-half attachments") {
  const DimensionParams dp{0.5, 2.0, 1.0};
  const LeafParams lp = leaf(3.5);
  const auto ns = generation_indices(lp.n0, lp.gamma, 1);
  const GluedStructure s = GluedStructure::grow(circles(), static_cast<std::size_t>(2 * ns[1]));
  const auto gens = build_generations(s, dp, lp, 1);
  REQUIRE(gens.size() == 2);
  CHECK(gens[0].member_count > 0);
  for (const auto& g : gens) {
    long double sum = 0;
    for (std::size_t j = 0; j < g.members.size(); ++j) {
      const std::size_t n = g.members[j];
      CHECK(static_cast<long double>(n) >= g.n_k);
      CHECK(static_cast<long double>(n) <= 2 * g.n_k);
      CHECK(g.member_mass[j] == doctest::Approx(s.seq().w[n] * 0.5));
      sum += g.member_mass[j];
    }
    CHECK(static_cast<double>(sum) == doctest::Approx(static_cast<double>(g.mass)));
  }
  for (std::size_t n : gens[1].members) {
    const std::size_t par = s.parent(n);
    CHECK(std::find(gens[0].members.begin(), gens[0].members.end(), par) != gens[0].members.end());
    CHECK(s.tree().block(par).in_upper_half(s.attach(n)));
  }
  CHECK_THROWS_AS(build_generations(GluedStructure::grow(circles(), 100), dp, lp, 1), ParameterError);
}

TEST_CASE("PiK is a probability measure on the upper halves") {
  const DimensionParams dp{0.5, 2.0, 1.0};
  const LeafParams lp = leaf(3.5);
  const GluedStructure s = GluedStructure::grow(circles(3), 200);
  const auto gens = build_generations(s, dp, lp, 0);
  const PiK pi(s, gens[0]);
  CHECK(pi.total() == doctest::Approx(static_cast<double>(gens[0].mass)));
  CHECK(pi.ball(s.root(), 1e9) == doctest::Approx(1.0).epsilon(1e-12));
  Stream rng(8);
  for (int i = 0; i < 2000; ++i) {
    const PointRef x = pi.sample(rng);
    REQUIRE(std::find(gens[0].members.begin(), gens[0].members.end(), x.block) != gens[0].members.end());
    REQUIRE(s.tree().block(x.block).in_upper_half(x.coord));
  }
  Generation empty;
  CHECK_THROWS_AS(PiK(s, empty), EmptyGenerationError);
}

TEST_CASE("chi mass") {
  const GluedStructure s = GluedStructure::grow(circles(5), 400);
  const BlockConstants bc = block_constants(s.params().law, 4, 1, 1);
  CHECK(bc.p == 1.0);
  CHECK(bc.m == 0.5);
  const ChiResult none = chi_mass(s, 1, [](double) { return false; }, 0.0, 100, bc, 4, 1);
  CHECK(none.chi == 0);
  CHECK(none.S_mass == 0);
  CHECK(none.expected == 0);
  CHECK(none.grafted == 0);
  const ChiResult all = chi_mass(s, 1, [](double) { return true; }, 1.0, 100, bc, 4, 1);
  CHECK(all.a_k > 0);
  CHECK(all.expected == doctest::Approx(all.a_k * s.seq().w[1]));
  CHECK_THROWS_AS(chi_mass(s, 150, [](double) { return true; }, 1.0, 100, bc, 4, 1), ParameterError);
  CHECK_THROWS_AS(chi_mass(s, 1, [](double) { return true; }, 1.0, 300, bc, 4, 1), ParameterError);
}

TEST_CASE("a_k products decay at the predicted rate") {
  SequenceSpec sp;
  sp.alpha = 0.5;
  sp.beta = 2.0;
  const BlockConstants bc{1.0, 0.5, false};
  const ProductFit f = a_product_exponent(sp, bc, 2.0, 10, 12);
  CHECK(f.target == doctest::Approx(-2.0));
  CHECK(f.slope == doctest::Approx(f.target).epsilon(0.01));
  sp.beta = 1.5;
  const ProductFit g = a_product_exponent(sp, bc, 3.0, 10, 12);
  CHECK(g.slope == doctest::Approx(-0.75).epsilon(0.01));
  CHECK_THROWS_AS(a_product_exponent(sp, bc, 3.0, 10, 1), ParameterError);
  CHECK_THROWS_AS(a_product_exponent(sp, bc, 1.0, 10, 8), ParameterError);
  sp.beta = 0.8;
  CHECK_THROWS_AS(a_product_exponent(sp, bc, 3.0, 10, 8), ParameterError);
}

TEST_CASE("sparse simulation matches the dense construction in law") {
  const DimensionParams dp{0.5, 2.0, 1.0};
  const LeafParams lp = leaf(3.5);
  const std::size_t R = 300;
  double dense = 0, sparse = 0;
  for (std::size_t r = 0; r < R; ++r) {
    const GluedStructure s = GluedStructure::grow(circles(100 + r), 2 * 3163);
    dense += static_cast<double>(build_generations(s, dp, lp, 1)[1].mass);
    sparse += static_cast<double>(simulate_generations(circles(5000 + r), dp, lp, 1)[1].mass);
  }
  CHECK(sparse / R == doctest::Approx(dense / R).epsilon(0.15));
}
