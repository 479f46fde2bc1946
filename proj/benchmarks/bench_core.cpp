#include <benchmark/benchmark.h>

#include <random>

#include "cls/cls.hpp"

using namespace cls;

namespace {

Configuration make_config(const LatentSpace& space, int n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Configuration c{space, {}};
  for (int i = 0; i < n; ++i) {
    Vec p(space.dim);
    for (int k = 0; k < space.dim; ++k) p[k] = 2.0 * normal(eng);
    if (space.kind == SpaceKind::HalfPlane) p[1] = std::exp(0.8 * normal(eng));
    c.points.push_back(p);
  }
  return c;
}

void bm_dist_euclidean(benchmark::State& state) {
  const auto space = LatentSpace::euclidean(2);
  const Configuration c = make_config(space, 2, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(dist(space, c.points[0], c.points[1]));
}
BENCHMARK(bm_dist_euclidean);

void bm_dist_half_plane(benchmark::State& state) {
  const auto space = LatentSpace::half_plane();
  const Configuration c = make_config(space, 2, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(dist(space, c.points[0], c.points[1]));
}
BENCHMARK(bm_dist_half_plane);

void bm_loglik_norm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Configuration c = make_config(LatentSpace::euclidean(2), n, 3);
  const auto w = LinkFunction::logistic(2.0);
  const Graph g = generate_graph(c, w, 4);
  for (auto _ : state) benchmark::DoNotOptimize(loglik_norm(c, g, w).value);
}
BENCHMARK(bm_loglik_norm)->Arg(30)->Arg(100);

void bm_loglik_grad(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Configuration c = make_config(LatentSpace::euclidean(2), n, 5);
  const auto w = LinkFunction::logistic(2.0);
  const Graph g = generate_graph(c, w, 6);
  for (auto _ : state) benchmark::DoNotOptimize(loglik_grad(c, g, w));
}
BENCHMARK(bm_loglik_grad)->Arg(30)->Arg(100);

void bm_mle_embed(benchmark::State& state) {
  const auto space = LatentSpace::euclidean(2);
  const Configuration c = make_config(space, 30, 7);
  const auto w = LinkFunction::logistic(2.0);
  const Graph g = generate_graph(c, w, 8);
  EmbedOptions opts;
  opts.restarts = 1;
  opts.max_iters = 200;
  for (auto _ : state) benchmark::DoNotOptimize(mle_embed(g, space, w, 9, opts).objective);
}
BENCHMARK(bm_mle_embed)->Unit(benchmark::kMillisecond);

void bm_align_configs(benchmark::State& state) {
  const auto space = LatentSpace::euclidean(2);
  const Configuration x = make_config(space, 50, 10);
  const Configuration y = apply_isometry(random_isometry(space, 11), x);
  for (auto _ : state) benchmark::DoNotOptimize(align_configs(x, y).dist_class);
}
BENCHMARK(bm_align_configs)->Unit(benchmark::kMillisecond);

void bm_kde_eval(benchmark::State& state) {
  const auto space = LatentSpace::euclidean(2);
  const Configuration c = make_config(space, 200, 12);
  const NodeDensity kde_density = kde(c);
  Vec at(2);
  at << 0.3, -0.8;
  for (auto _ : state) benchmark::DoNotOptimize(density_eval(kde_density, at));
}
BENCHMARK(bm_kde_eval);

}  // namespace

BENCHMARK_MAIN();
