#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "mglue/blocks.hpp"
#include "mglue/errors.hpp"
#include "mglue/stats.hpp"

using namespace mglue;

TEST_CASE("built-in geometry") {
  const Block c = Block::circle();
  CHECK(c.haut() == 0.5);
  CHECK(c.diam() == 0.5);
  CHECK(c.distance(0.1, 0.9) == doctest::Approx(0.2));
  for (double r : {0.01, 0.2, 0.49}) CHECK(c.ball_mass(0.3, r) == doctest::Approx(2 * r));
  const Block s = Block::segment();
  CHECK(s.haut() == 1.0);
  CHECK(s.distance(0, 0.3) == 0.3);
  CHECK(s.ball_mass(0.05, 0.1) == doctest::Approx(0.15));
}

TEST_CASE("metric axioms on sampled triples") {
  Stream rng(3);
  for (const Block& b : {Block::segment(), Block::circle(), Block::star(4)}) {
    for (int i = 0; i < 10000; ++i) {
      const double x = b.sample(rng), y = b.sample(rng), z = b.sample(rng);
      REQUIRE(b.distance(x, x) == 0);
      REQUIRE(b.distance(x, y) == b.distance(y, x));
      REQUIRE(b.distance(x, z) <= b.distance(x, y) + b.distance(y, z) + 1e-15);
    }
  }
}

TEST_CASE("block validation") {
  CHECK_THROWS_AS(Block::star(0), ParameterError);
  CHECK_THROWS_AS(Block::finite({{0, 1}, {1, 0}}, {1.0, 0.0}), ParameterError);
  CHECK_THROWS_AS(Block::finite({{0, 1}, {2, 0}}, {0.5, 0.5}), ParameterError);
  CHECK_THROWS_AS(Block::finite({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}, {0.2, 0.3, 0.5}), ParameterError);
  BlockLaw one{BlockKind::finite, 1, false};
  CHECK_THROWS_AS(one.validate(), ParameterError);
  BlockLaw zero{BlockKind::finite, 0, false};
  CHECK_THROWS_AS(make_block(zero, 1), ParameterError);
  CHECK(parse_block_kind("circle") == BlockKind::circle);
  CHECK_THROWS_AS(parse_block_kind("torus"), ParameterError);
}

TEST_CASE("sampling moments") {
  Stream rng(11);
  const Block c = Block::circle();
  std::vector<double> h;
  for (int i = 0; i < 1000000; ++i) h.push_back(c.distance(0, c.sample(rng)));
  const MeanVar m = mean_var(h);
  CHECK(std::fabs(m.mean - 0.25) < 3 * m.sem());
  const Block s = Block::segment();
  std::vector<double> h2;
  for (int i = 0; i < 1000000; ++i) {
    const double x = s.sample(rng);
    h2.push_back(x * x);
  }
  const MeanVar m2 = mean_var(h2);
  CHECK(std::fabs(m2.mean - 1.0 / 3) < 3 * m2.sem());
  const Block two = Block::star(2);
  std::vector<double> hits;
  for (int i = 0; i < 100000; ++i) hits.push_back(two.sample(rng) == 0 ? 1.0 : 0.0);
  const MeanVar m3 = mean_var(hits);
  CHECK(std::fabs(m3.mean - 0.5) < 3 * m3.sem());
}

TEST_CASE("sampling is deterministic under a seed") {
  Stream a(5), b(5);
  const Block c = Block::circle();
  for (int i = 0; i < 100; ++i) CHECK(c.sample(a) == c.sample(b));
}

TEST_CASE("covering numbers") {
  CHECK(covering_number(Block::segment(), 2) == 1);
  CHECK(covering_number(Block::circle(), 0.3) == 2);
  const auto n = covering_number(Block::segment(), 0.001);
  CHECK(n >= 500);
  CHECK(n <= 1000);
  CHECK(covering_number(Block::star(5), 0.5) == 5);
  CHECK(covering_number(Block::star(5), 1.5) == 1);
}

TEST_CASE("nets") {
  Stream rng(2);
  CHECK(build_net(Block::segment(), 3, rng).size() == 1);
  for (const Block& b : {Block::segment(), Block::circle()}) {
    for (double r : {0.2, 0.05}) {
      const auto c = build_net(b, r, rng);
      if (b.kind() == BlockKind::circle && r == 0.2) {
        CHECK(c.size() >= 3);
        CHECK(c.size() <= 10);
      }
      for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) REQUIRE(b.distance(c[i], c[j]) >= r / 2);
      CHECK(covers(b, c, r));
      for (int t = 0; t < 10000; ++t) {
        const double x = b.sample(rng);
        double best = std::numeric_limits<double>::infinity();
        for (double cc : c) best = std::min(best, b.distance(x, cc));
        REQUIRE(best < r);
      }
    }
  }
}

TEST_CASE("fragments") {
  Stream rng(4);
  const FragmentDecomposition one = build_fragments(Block::segment(), 3, rng);
  REQUIRE(one.fragments.size() == 1);
  CHECK(one.fragments[0].mass == doctest::Approx(1.0));
  for (const Block& b : {Block::segment(), Block::circle()}) {
    const double r = 0.2;
    const FragmentDecomposition fd = build_fragments(b, r, rng);
    double total = 0;
    for (const auto& f : fd.fragments) {
      total += f.mass;
      CHECK(f.mass >= std::pow(r / 4, 1 + phi(1, r / 4)));
      CHECK(f.mass <= std::pow(r, 1 - phi(1, r)));
      CHECK(f.reach <= r);
      for (int t = 0; t < 200; ++t) REQUIRE(fd.locate(b, b.sample_in_ball(f.center, r / 4, rng)) == f.center_index);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fd.fragments.size() <= covering_number(b, r / 4));
    // partition: each probe lands in one fragment whose center is nearest
    for (double p : b.probe_grid(1000)) {
      const std::size_t k = fd.locate(b, p);
      for (std::size_t j = 0; j < fd.centers.size(); ++j)
        REQUIRE(b.distance(p, fd.centers[k]) <= b.distance(p, fd.centers[j]));
    }
  }
  const Block c = Block::circle();
  const FragmentDecomposition fd = build_fragments(c, 0.1, rng);
  std::size_t worst = 0;
  for (double p : c.probe_grid(1000)) worst = std::max(worst, fd.count_meeting(c, p, 0.05));
  CHECK(worst <= 6);
  CHECK(static_cast<double>(worst) <= fragment_meeting_bound(1, 0.1, 0.05));
}

TEST_CASE("phi and the ball-mass sandwich") {
  CHECK(phi(1, 0.5) == 0.5);
  CHECK(phi(1, 0.01) == doctest::Approx(std::log(2) / std::log(100)));
  double prev = 0;
  for (double r = 1e-6; r < 1; r *= 1.5) {
    CHECK(phi(1, r) >= prev);
    prev = phi(1, r);
  }
  Stream rng(8);
  for (const Block& b : {Block::segment(), Block::circle()}) {
    for (int i = 0; i < 1000; ++i) {
      const double x = b.sample(rng);
      const double r = rng.uniform(1e-6, 0.25);
      const double m = b.ball_mass(x, r);
      REQUIRE(m >= std::pow(r, 1 + phi(1, r)) * (1 - 1e-12));
      // the circle sits exactly on the upper edge: 2r = r^(1 - phi)
      REQUIRE(m <= std::pow(r, 1 - phi(1, r)) * (1 + 1e-12));
    }
  }
}

TEST_CASE("block sources share deterministic blocks and seed random ones") {
  const BlockSource det(BlockLaw{BlockKind::circle, 3, false}, 1);
  CHECK(det.at(1).get() == det.at(2).get());
  const BlockSource rnd(BlockLaw{BlockKind::finite, 4, true}, 9);
  const BlockSource rnd2(BlockLaw{BlockKind::finite, 4, true}, 9);
  CHECK(rnd.at(7)->distance(0, 1) == rnd2.at(7)->distance(0, 1));
  CHECK(rnd.at(7)->distance(0, 1) != rnd.at(8)->distance(0, 1));
}
