#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "textseam/kernels.hpp"
#include "textseam/reference.hpp"

namespace {

using namespace textseam;

PointCloud random_cloud(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> coords(n * dim);
  for (double& c : coords) c = normal(rng);
  return PointCloud(n, dim, std::move(coords));
}

std::vector<std::vector<double>> random_series(std::size_t count, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> out(count, std::vector<double>(len));
  for (auto& s : out) {
    for (double& v : s) v = normal(rng);
  }
  return out;
}

template <double (*Mst)(const PointCloud&, double)>
void BM_Mst(benchmark::State& state) {
  const auto cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 768, 1);
  for (auto _ : state) benchmark::DoNotOptimize(Mst(cloud, 1.0));
}

template <Matrix (*Gram)(std::span<const std::vector<double>>, double)>
void BM_Gram(benchmark::State& state) {
  const auto series = random_series(static_cast<std::size_t>(state.range(0)), 40, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Gram(series, 1.0));
}

template <std::vector<std::optional<double>> (*Tle)(const PointCloud&, const TleOptions&)>
void BM_Tle(benchmark::State& state) {
  const auto cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 8, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Tle(cloud, TleOptions{}));
}

template <Matrix (*Dist)(const PointCloud&)>
void BM_Distances(benchmark::State& state) {
  const auto cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 768, 4);
  for (auto _ : state) benchmark::DoNotOptimize(Dist(cloud));
}

}  // namespace

BENCHMARK(BM_Mst<textseam::reference::prim_mst_length>)->Name("mst/serial")->Arg(256)->Arg(1000);
BENCHMARK(BM_Mst<textseam::kernels::prim_mst_length>)->Name("mst/openmp")->Arg(256)->Arg(1000);
BENCHMARK(BM_Gram<textseam::reference::gak_gram>)->Name("gak_gram/serial")->Arg(50)->Arg(100);
BENCHMARK(BM_Gram<textseam::kernels::gak_gram>)->Name("gak_gram/openmp")->Arg(50)->Arg(100);
BENCHMARK(BM_Tle<textseam::reference::tle_point_estimates>)->Name("tle/serial")->Arg(1000);
BENCHMARK(BM_Tle<textseam::kernels::tle_point_estimates>)->Name("tle/openmp")->Arg(1000);
BENCHMARK(BM_Distances<textseam::reference::pairwise_sq_distances>)->Name("distances/serial")->Arg(200);
BENCHMARK(BM_Distances<textseam::kernels::pairwise_sq_distances>)->Name("distances/openmp")->Arg(200);

BENCHMARK_MAIN();
