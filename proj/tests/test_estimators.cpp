#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "mglue/errors.hpp"
#include "mglue/estimators.hpp"

using namespace mglue;

namespace {

BlockTree single(Block b) {
  BlockTree t;
  t.add_root(1, std::make_shared<const Block>(std::move(b)), 1.0, 1.0);
  return t;
}

std::vector<PointRef> sample(const BlockTree& t, std::size_t n, std::uint64_t seed) {
  Stream rng(seed);
  std::vector<PointRef> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({1, t.block(1).sample(rng)});
  return pts;
}

}  // namespace

TEST_CASE("fit_scaling on exact powers") {
  std::vector<double> r, v;
  for (int i = 0; i < 12; ++i) {
    r.push_back(std::pow(0.5, i));
    v.push_back(3 * std::pow(r.back(), -1.7));
  }
  const ScalingFit f = fit_scaling(r, v);
  CHECK(f.slope == doctest::Approx(-1.7).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.win_lo == 2);
  CHECK(f.win_hi == 10);
  CHECK(f.radii.front() > f.radii.back());
  CHECK(fit_scaling({0.1, 0.2}, {1, 1}).degenerate);
  CHECK(fit_scaling({0.1}, {1}).degenerate);
  CHECK_FALSE(fit_scaling({0.1, 0.2, 0.4}, {1, 2, 4}).degenerate);
}

TEST_CASE("net counts sit between covering numbers") {
  const BlockTree seg = single(Block::segment());
  const BlockTree circ = single(Block::circle());
  for (const BlockTree* t : {&seg, &circ}) {
    const auto pts = sample(*t, 20000, 3);
    for (double r : {0.3, 0.1, 0.03, 0.01}) {
      const std::size_t n = greedy_net_count(*t, pts, r);
      CHECK(n + 1 >= covering_number(t->block(1), r));
      CHECK(n <= covering_number(t->block(1), r / 2));
    }
  }
}

TEST_CASE("net counts are monotone in r and equal to the serial reference") {
  GluedStructure g = GluedStructure::grow(
      StructureParams{SequenceSpec{}, BlockLaw{BlockKind::circle, 3, false}, 2}, 2000);
  Stream rng(1);
  std::vector<PointRef> pts;
  for (int i = 0; i < 3000; ++i) pts.push_back(g.sample_mu_bar(rng));
  const auto radii = log_space(1e-3, 0.3, 10);
  const auto par = net_counts(g.tree(), pts, radii);
  const auto ser = serial::net_counts(g.tree(), pts, radii);
  CHECK(par == ser);
  for (std::size_t j = 0; j + 1 < radii.size(); ++j) CHECK(par[j] >= par[j + 1]);
  for (std::size_t j = 0; j < radii.size(); ++j) CHECK(par[j] == greedy_net_count(g.tree(), pts, radii[j]));
}

TEST_CASE("box counting recovers simple dimensions") {
  const auto radii = log_space(1e-3, 1e-1, 12);
  const BlockTree seg = single(Block::segment());
  CHECK(-box_count(seg, sample(seg, 10000, 1), radii).slope == doctest::Approx(1.0).epsilon(0.05));
  const BlockTree star = single(Block::star(5));
  const ScalingFit s = box_count(star, sample(star, 2000, 1), radii);
  CHECK(s.slope == 0);
  const std::vector<PointRef> one{{1, 0.3}};
  const ScalingFit p = box_count(seg, one, radii);
  CHECK(p.degenerate);
  CHECK(p.slope == 0);
}

TEST_CASE("box counting is stable when the sample doubles") {
  const auto radii = log_space(1e-3, 1e-1, 12);
  const BlockTree circ = single(Block::circle());
  const double a = box_count(circ, sample(circ, 10000, 1), radii).slope;
  const double b = box_count(circ, sample(circ, 20000, 2), radii).slope;
  CHECK(std::fabs(a - b) < 0.05);
}

TEST_CASE("local dimension of the uniform segment measure") {
  const BlockTree seg = single(Block::segment());
  const auto probes = sample(seg, 200, 4);
  const auto radii = log_space(1e-4, 1e-2, 10);
  auto ball = [&](const PointRef& x, double r) { return seg.block(1).ball_mass(x.coord, r); };
  const LocalDimension ld = local_dimension(ball, probes, radii, 0.1);
  CHECK(ld.median_slope == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(ld.quantile_slope == doctest::Approx(1.0).epsilon(1e-3));
  auto zero = [](const PointRef&, double) { return 0.0; };
  const LocalDimension z = local_dimension(zero, probes, radii, 0.1);
  for (char s : z.skipped) CHECK(s == 1);
}

TEST_CASE("decay experiments") {
  StructureParams sp{SequenceSpec{}, BlockLaw{BlockKind::circle, 3, false}, 1};
  sp.seq.alpha = 0.5;
  sp.seq.beta = 2.0;
  const DecayResult d = hausdorff_gap_decay(sp, {100, 300, 1000}, 8, 10);
  REQUIRE(d.values.size() == 3);
  CHECK(d.values[0] > d.values[2]);
  CHECK(d.fit.slope == doctest::Approx(-0.5).epsilon(0.3));
  const DecayResult h = subtree_height_decay(sp, {100, 300, 1000}, 8, 10);
  CHECK(h.fit.slope == doctest::Approx(-0.5).epsilon(0.3));
  CHECK_THROWS_AS(hausdorff_gap_decay(sp, {100}, 2, 1), ParameterError);
}

TEST_CASE("covering volume runs and covers its probes") {
  CoveringVolumeConfig c;
  c.n_list = {50, 100, 200};
  c.replicas = 4;
  c.samples = 200;
  const CoveringVolumeResult r = covering_volume_experiment(c);
  CHECK(r.uncovered == 0);
  CHECK(r.probes > 0);
  CHECK(r.gamma > 1);
  CHECK(r.fit.slope < 0);
}

TEST_CASE("fit csv") {
  CHECK_THROWS_AS(write_fit_csv("/nonexistent/dir/f.csv", ScalingFit{}, "x"), IoError);
}
