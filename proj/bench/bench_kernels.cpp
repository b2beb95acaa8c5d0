#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "mglue/estimators.hpp"
#include "mglue/glue.hpp"
#include "mglue/parallel.hpp"

using namespace mglue;

namespace {

struct Sample {
  BlockTree tree;
  std::vector<PointRef> pts;
  std::vector<double> radii;
};

const Sample& segment_sample() {
  static const Sample s = [] {
    Sample out;
    out.tree.add_root(1, std::make_shared<const Block>(Block::segment()), 1.0, 1.0);
    Stream rng(7);
    for (int i = 0; i < 10000; ++i) out.pts.push_back({1, out.tree.block(1).sample(rng)});
    out.radii = log_space(1e-3, 1e-1, 12);
    return out;
  }();
  return s;
}

void BM_net_counts_parallel(benchmark::State& st) {
  const Sample& s = segment_sample();
  for (auto _ : st) benchmark::DoNotOptimize(net_counts(s.tree, s.pts, s.radii));
}

void BM_net_counts_serial(benchmark::State& st) {
  const Sample& s = segment_sample();
  for (auto _ : st) benchmark::DoNotOptimize(serial::net_counts(s.tree, s.pts, s.radii));
}

double gap_replica(std::size_t r) {
  StructureParams p;
  p.seq.alpha = 0.5;
  p.seq.beta = 2.0;
  p.seed = replica_seed(11, r);
  const GluedStructure g = GluedStructure::grow(p, 20000);
  return hausdorff_gap(g, 1000);
}

void BM_replicas_parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(map_indexed<double>(16, gap_replica));
}

void BM_replicas_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::map_indexed<double>(16, gap_replica));
}

}  // namespace

BENCHMARK(BM_net_counts_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_net_counts_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_replicas_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_replicas_serial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
