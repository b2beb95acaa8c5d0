#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "mglue/errors.hpp"
#include "mglue/glue.hpp"

using namespace mglue;

namespace {

StructureParams power(double a, double b, BlockKind k = BlockKind::circle, std::uint64_t seed = 1) {
  StructureParams p;
  p.seq.alpha = a;
  p.seq.beta = b;
  p.law = BlockLaw{k, 3, false};
  p.seed = seed;
  return p;
}

StructureParams table(std::vector<double> lambda, std::vector<double> w, std::uint64_t seed = 1) {
  StructureParams p;
  p.seq.mode = SequenceMode::user_table;
  p.seq.lambda_table = std::move(lambda);
  p.seq.weight_table = std::move(w);
  p.law = BlockLaw{BlockKind::segment, 3, false};
  p.seed = seed;
  return p;
}

// Wilson-Hilferty upper tail of a chi-square statistic
double chi2_pvalue(double x, double k) {
  const double z = (std::cbrt(x / k) - (1 - 2 / (9 * k))) / std::sqrt(2 / (9 * k));
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

TEST_CASE("genealogy invariants") {
  const GluedStructure g = GluedStructure::grow(power(0.5, 2), 5000);
  CHECK(g.depth(1) == 0);
  for (std::size_t n = 2; n <= g.size(); ++n) {
    REQUIRE(g.parent(n) < n);
    REQUIRE(g.depth(n) == g.depth(g.parent(n)) + 1);
  }
  const GluedStructure two = GluedStructure::grow(power(0.5, 2), 2);
  CHECK(two.parent(2) == 1);
}

TEST_CASE("two equal weights split the third block evenly") {
  std::size_t hits = 0;
  const std::size_t R = 100000;
  for (std::size_t r = 0; r < R; ++r) {
    const GluedStructure g = GluedStructure::grow(table({1, 1, 1}, {1, 1, 1}, r + 1), 3);
    if (g.parent(3) == 1) ++hits;
  }
  const double p = static_cast<double>(hits) / R;
  CHECK(std::fabs(p - 0.5) < 3 * std::sqrt(0.25 / R));
}

TEST_CASE("parent law under the coupling") {
  const std::size_t R = 100000;
  for (std::size_t n : {10ul, 100ul}) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < R; ++r) {
      const GluedStructure g = GluedStructure::grow(power(0.5, 2, BlockKind::circle, 1000 + r), n);
      if (g.parent(n) == 1) ++hits;
    }
    const Sequences s = make_sequences(power(0.5, 2).seq, n);
    const double q = s.w[1] / s.W[n - 1];
    CHECK(std::fabs(static_cast<double>(hits) / R - q) < 3 * std::sqrt(q * (1 - q) / R));
  }
}

TEST_CASE("distance by hand and metric axioms") {
  BlockTree t;
  auto seg = std::make_shared<const Block>(Block::segment());
  t.add_root(1, seg, 1.0, 1.0);
  t.add_child(2, seg, 0.5, 1.0, 1, 0.3);
  CHECK(t.distance({1, 0.7}, {2, 1.0}) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(t.distance({2, 0.4}, {2, 0.4}) == 0);
  CHECK(t.project({2, 0.8}, 1) == PointRef{1, 0.3});
  CHECK(t.project({1, 0.8}, 1) == PointRef{1, 0.8});
  CHECK_THROWS(t.check({3, 0.1}));

  const GluedStructure g = GluedStructure::grow(power(0.5, 1.5), 3000);
  Stream rng(5);
  for (int i = 0; i < 10000; ++i) {
    const PointRef a = g.sample_mu_bar(rng), b = g.sample_mu_bar(rng), c = g.sample_mu_bar(rng);
    REQUIRE(g.distance(a, b) == g.distance(b, a));
    REQUIRE(g.distance(a, c) <= g.distance(a, b) + g.distance(b, c) + 1e-14);
  }
}

TEST_CASE("projection matches the explicit path sum") {
  const GluedStructure g = GluedStructure::grow(power(0.5, 0.5, BlockKind::segment), 2000);
  Stream rng(6);
  for (int i = 0; i < 1000; ++i) {
    const PointRef x = g.sample_mu_bar(rng);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(2000));
    const PointRef p = g.project(x, n);
    REQUIRE(p.block <= n);
    REQUIRE(g.distance(x, p) == g.tree().distance_to_projection(x, n));
  }
}

TEST_CASE("marked point coupling") {
  const GluedStructure g = GluedStructure::grow(power(0.5, 2), 1000);
  for (std::size_t n = 2; n <= 1000; ++n) {
    const MarkedStep& m = g.marked(n);
    REQUIRE(m.height >= g.marked(n - 1).height);
    REQUIRE(m.Y.block == m.J);
    const double step = g.distance(m.Y, g.marked(n - 1).Y);
    REQUIRE(std::fabs(step - (m.renewed ? m.increment : 0.0)) <= 1e-12);
    REQUIRE(g.project(m.Y, n - 1) == g.marked(n - 1).Y);
  }
  // no weight past block 1: Y never moves
  std::vector<double> lam(50, 1.0), w(50, 0.0);
  w[0] = 1;
  const GluedStructure z = GluedStructure::grow(table(lam, w), 50);
  for (std::size_t n = 1; n <= 50; ++n) CHECK(z.marked(n).Y == z.marked(1).Y);
}

TEST_CASE("J_n has law w_k / W_n") {
  const std::size_t n = 100, R = 100000;
  const Sequences s = make_sequences(power(0.5, 2).seq, n);
  std::vector<double> counts(n + 1, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    const GluedStructure g = GluedStructure::grow(power(0.5, 2, BlockKind::circle, 77 + r), n);
    counts[g.marked(n).J] += 1;
  }
  // merge the tail into bins with expected count >= 5
  double stat = 0, obs = 0, exp = 0;
  std::size_t bins = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    obs += counts[k];
    exp += R * s.w[k] / s.W[n];
    if (exp >= 5 || k == n) {
      stat += (obs - exp) * (obs - exp) / exp;
      ++bins;
      obs = exp = 0;
    }
  }
  CHECK(chi2_pvalue(stat, static_cast<double>(bins - 1)) > 0.001);
}

TEST_CASE("discrete height moments") {
  const MomentResult z = discrete_height_moment(power(0.5, 2).seq, 50, 0.0, 100, 1);
  CHECK(z.mc == 1.0);
  CHECK(z.product == 1.0);
  CHECK(z.bound == 1.0);
  SequenceSpec ones;
  ones.alpha = 1;
  ones.beta = 0;
  const MomentResult o = discrete_height_moment(ones, 30, 0.7, 0, 1);
  double want = 1;
  for (int k = 2; k <= 30; ++k) want *= 1 + std::expm1(0.7) / k;
  CHECK(o.product == doctest::Approx(want).epsilon(1e-12));
  for (double th : {-2.0, -0.5, 0.3, 1.0, 3.0})
    for (std::size_t n : {2ul, 20ul, 200ul}) {
      const MomentResult r = discrete_height_moment(power(0.5, 1.5).seq, n, th, 0, 1);
      CHECK(r.product <= r.bound);
    }
  CHECK_THROWS_AS(discrete_height_moment(ones, 1000, 1.0, 1, 1), NumericalError);
  CHECK_THROWS_AS(discrete_height_moment(ones, 1, 1.0, 1, 1), ParameterError);
}

TEST_CASE("urn trajectories") {
  const Sequences s = make_sequences(power(0.5, 2).seq, 2000);
  Stream rng(1);
  const UrnTrajectory t = urn_trajectory(s, 10, 2000, rng);
  CHECK(t.M.front() == s.w[10] / s.W[10]);
  for (std::size_t j = 0; j + 1 < t.M.size(); ++j) {
    const std::size_t i = 10 + j;
    const double keep = s.W[i] / s.W[i + 1] * t.M[j];
    const bool ok = t.M[j + 1] == keep || t.M[j + 1] == keep + s.w[i + 1] / s.W[i + 1];
    REQUIRE(ok);
  }
  SequenceSpec cut;
  cut.mode = SequenceMode::user_table;
  cut.lambda_table.assign(100, 1.0);
  cut.weight_table.assign(100, 0.0);
  for (int i = 0; i < 10; ++i) cut.weight_table[i] = 1.0;
  const Sequences c = make_sequences(cut, 100);
  const UrnTrajectory f = urn_trajectory(c, 10, 100, rng);
  for (double m : f.M) CHECK(m == 0.1);
  CHECK_THROWS_AS(urn_trajectory(s, 10, 5, rng), ParameterError);
}

TEST_CASE("urn mass above block n decays like n^-1") {
  const std::size_t H = 200000;
  const Sequences s = make_sequences(power(0.5, 2).seq, H);
  std::vector<double> ns, mx;
  for (std::size_t n : {100ul, 1000ul}) {
    double worst = 0;
    for (std::size_t r = 0; r < 100; ++r) {
      Stream rng(replica_seed(3, r));
      worst = std::max(worst, urn_trajectory(s, n, H, rng).M.back());
    }
    ns.push_back(static_cast<double>(n));
    mx.push_back(worst);
  }
  CHECK(loglog_fit(ns, mx).slope <= -0.8);
}

TEST_CASE("monotone coupling") {
  const StructureParams p = power(0.5, 2);
  {
    const auto [a, b] = monotone_coupling(p, p.seq, 500);
    Stream rng(2);
    for (int i = 0; i < 1000; ++i) {
      const PointRef x = a.sample_mu_bar(rng), y = a.sample_mu_bar(rng);
      REQUIRE(a.distance(x, y) == b.distance(x, y));
    }
  }
  SequenceSpec big = p.seq;
  big.alpha = 0.4;
  CHECK_THROWS_AS(monotone_coupling(p, big, 100), ParameterError);
  SequenceSpec heavier = p.seq;
  heavier.beta = 1.5;
  CHECK_THROWS_AS(monotone_coupling(p, heavier, 100), ParameterError);
  StructureParams t = table({1, 1, 1, 1}, {1, 1, 1, 1});
  SequenceSpec shorter = t.seq;
  shorter.lambda_table = {1, 1, 1};
  shorter.weight_table = {1, 1, 1};
  CHECK_THROWS_AS(monotone_coupling(t, shorter, 4), ParameterError);
}

TEST_CASE("hausdorff gap is exact") {
  const GluedStructure g = GluedStructure::grow(power(0.5, 2), 3000);
  for (std::size_t n : {1ul, 10ul, 300ul}) {
    double brute = 0;
    for (std::size_t i = n + 1; i <= g.size(); ++i)
      brute = std::max(brute, g.tree().distance_to_projection({i, 0.5}, n));
    CHECK(hausdorff_gap(g, n) == doctest::Approx(brute).epsilon(1e-12));
    Stream rng(n);
    for (int k = 0; k < 1000; ++k) {
      const PointRef x = g.sample_mu_bar(rng);
      REQUIRE(g.tree().distance_to_projection(x, n) <= hausdorff_gap(g, n) + 1e-15);
    }
  }
  CHECK(hausdorff_gap(g, 3000) == 0);
  CHECK(hausdorff_gap(g, 100, 100) == 0);
  std::vector<double> lam(200, 0.0), w(200, 1.0);
  const GluedStructure flat = GluedStructure::grow(table(lam, w), 200);
  CHECK(hausdorff_gap(flat, 5) == 0);
}

TEST_CASE("subtree heights match brute force") {
  const GluedStructure g = GluedStructure::grow(power(0.5, 0.5), 400);
  const auto H = subtree_heights(g.tree());
  for (std::size_t i = 1; i <= g.size(); i += 7) {
    double best = g.tree().lambda(i) * 0.5;
    for (std::size_t j = i + 1; j <= g.size(); ++j) {
      std::size_t a = j;
      while (a > i) a = g.parent(a);
      if (a != i) continue;
      best = std::max(best, g.distance({i, 0.0}, {j, 0.0}) + g.tree().lambda(j) * 0.5);
    }
    CHECK(H[i] == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("mu_bar ball masses") {
  const GluedStructure g = GluedStructure::grow(power(0.5, 2), 1000);
  CHECK(g.mu_bar_ball(g.root(), 1e9) == doctest::Approx(1.0).epsilon(1e-12));
  // Monte Carlo check of one ball
  Stream rng(4);
  const PointRef c{1, 0.25};
  const double r = 0.2;
  std::size_t in = 0;
  const std::size_t R = 200000;
  for (std::size_t i = 0; i < R; ++i)
    if (g.distance(g.sample_mu_bar(rng), c) < r) ++in;
  const double p = static_cast<double>(in) / R;
  CHECK(std::fabs(p - g.mu_bar_ball(c, r)) < 4 * std::sqrt(p * (1 - p) / R) + 1e-12);
}

TEST_CASE("structures are reproducible and csv dumps work") {
  const GluedStructure a = GluedStructure::grow(power(0.6, 1.5), 500);
  const GluedStructure b = GluedStructure::grow(power(0.6, 1.5), 500);
  for (std::size_t n = 2; n <= 500; ++n) {
    REQUIRE(a.parent(n) == b.parent(n));
    REQUIRE(a.attach(n) == b.attach(n));
  }
  CHECK_THROWS_AS(a.write_csv("/nonexistent/dir/x.csv"), IoError);
}
