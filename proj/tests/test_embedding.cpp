#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"

using namespace cls;
using ts::vec2;

namespace {

Graph path_graph(int n) {
  Graph g(n);
  for (int i = 0; i + 1 < n; ++i) g.set_edge(i, i + 1, true);
  return g;
}

Graph two_cliques(int k) {
  Graph g(2 * k);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      g.set_edge(i, j, true);
      g.set_edge(k + i, k + j, true);
    }
  return g;
}

}  // namespace

TEST_CASE("initializer basics") {
  const auto e2 = LatentSpace::euclidean(2);
  const auto w = LinkFunction::logistic(2.0);

  const Configuration single =
      init_embedding(Graph(1), e2, w, InitStrategy::RandomBall, 3);
  REQUIRE(single.n() == 1);
  CHECK(single.points[0] == base_point(e2));

  const Configuration a = init_embedding(path_graph(6), e2, w, InitStrategy::RandomBall, 9);
  const Configuration b = init_embedding(path_graph(6), e2, w, InitStrategy::RandomBall, 9);
  for (int i = 0; i < 6; ++i) REQUIRE(a.points[i] == b.points[i]);
}

TEST_CASE("graph-distance initializer spreads a path by hop count") {
  const auto e2 = LatentSpace::euclidean(2);
  const Configuration c =
      init_embedding(path_graph(10), e2, LinkFunction::logistic(2.0), InitStrategy::GraphMds, 5);
  double hop1 = 0, hop5 = 0;
  int n1 = 0, n5 = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) {
      const double d = dist(e2, c.points[i], c.points[j]);
      if (j - i == 1) hop1 += d, ++n1;
      if (j - i == 5) hop5 += d, ++n5;
    }
  CHECK(hop1 / n1 < hop5 / n5);
}

TEST_CASE("embedding is deterministic in the seed") {
  const auto f = NodeDensity::gaussian(Vec::Zero(2), 4.0 * Mat::Identity(2, 2));
  const auto w = LinkFunction::logistic(2.0);
  const GraphSample s = generate_graph_iid(f, 16, w, 44);
  EmbedOptions opts;
  opts.restarts = 2;
  opts.max_iters = 150;
  const EmbeddingResult a = mle_embed(s.graph, LatentSpace::euclidean(2), w, 7, opts);
  const EmbeddingResult b = mle_embed(s.graph, LatentSpace::euclidean(2), w, 7, opts);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
  for (int i = 0; i < 16; ++i) REQUIRE(a.estimate.points[i] == b.estimate.points[i]);
}

TEST_CASE("result invariants: objective, trace, feasibility") {
  const auto f = NodeDensity::gaussian(Vec::Zero(2), 4.0 * Mat::Identity(2, 2));
  const auto w = LinkFunction::logistic(2.0);
  const GraphSample s = generate_graph_iid(f, 20, w, 48);
  EmbedOptions opts;
  opts.restarts = 2;
  opts.max_iters = 200;
  for (const auto& space : {LatentSpace::euclidean(2), LatentSpace::half_plane()}) {
    const EmbeddingResult r = mle_embed(s.graph, space, w, 11, opts);
    CHECK(std::abs(r.objective - loglik(r.estimate, s.graph, w, LogGuard::Clamped).value) <=
          1e-9);
    REQUIRE(!r.objective_trace.empty());
    for (std::size_t i = 0; i + 1 < r.objective_trace.size(); ++i)
      REQUIRE(r.objective_trace[i + 1] >= r.objective_trace[i] - 1e-12);
    const double radius = 0.5 * 4.0 * std::log(20.0);
    const Vec base = base_point(space);
    for (const Vec& p : r.estimate.points)
      REQUIRE(dist(space, base, p) <= radius + 1e-6);

    const Isometry iso = random_isometry(space, 4242);
    CHECK(std::abs(loglik(apply_isometry(iso, r.estimate), s.graph, w).value - r.objective) <=
          1e-9);
  }
}

TEST_CASE("two nodes with an edge collapse to the grid-search optimum") {
  Graph g(2);
  g.set_edge(0, 1, true);
  const auto w = LinkFunction::logistic(2.0);
  EmbedOptions opts;
  opts.restarts = 2;
  opts.t_max = 2.0;

  // Dense scan of the two-node likelihood over the feasible separation.
  double best_d = 0, best_v = -1e300;
  for (int k = 0; k <= 20000; ++k) {
    const double d = 2.0 * k / 20000.0;
    Configuration c{LatentSpace::euclidean(1), {ts::vec1(0), ts::vec1(d)}};
    const double v = loglik(c, g, w).value;
    if (v > best_v) best_v = v, best_d = d;
  }

  const EmbeddingResult r = mle_embed(g, LatentSpace::euclidean(2), w, 5, opts);
  const double got = dist(LatentSpace::euclidean(2), r.estimate.points[0], r.estimate.points[1]);
  CHECK(std::abs(got - best_d) <= 1e-3);
}

TEST_CASE("two nodes without an edge separate to the feasible diameter") {
  const auto w = LinkFunction::logistic(2.0);
  EmbedOptions opts;
  opts.restarts = 2;
  opts.t_max = 2.0;
  const EmbeddingResult r = mle_embed(Graph(2), LatentSpace::euclidean(2), w, 6, opts);
  const double got = dist(LatentSpace::euclidean(2), r.estimate.points[0], r.estimate.points[1]);
  CHECK(got >= 2.0 - 1e-3);
  CHECK(r.boundary_hit);
}

TEST_CASE("embedding rejects unusable inputs") {
  EmbedOptions opts;
  CHECK_THROWS_AS(mle_embed(Graph(2), LatentSpace::euclidean(2),
                            LinkFunction::hard_threshold(), 1, opts),
                  usage_error);
  opts.restarts = 0;
  CHECK_THROWS_AS(mle_embed(Graph(2), LatentSpace::euclidean(2),
                            LinkFunction::logistic(2.0), 1, opts),
                  usage_error);
  opts.restarts = 1;
  opts.step0 = 0.0;
  CHECK_THROWS_AS(mle_embed(Graph(2), LatentSpace::euclidean(2),
                            LinkFunction::logistic(2.0), 1, opts),
                  usage_error);
}

TEST_CASE("disconnected graphs are laid out per component") {
  const auto w = LinkFunction::logistic(2.0);
  EmbedOptions opts;
  opts.restarts = 1;
  opts.max_iters = 100;
  const EmbeddingResult r = mle_embed(two_cliques(5), LatentSpace::euclidean(2), w, 9, opts);
  CHECK(r.mds_components == 2);
  CHECK(std::isfinite(r.objective));
}

TEST_CASE("embedding beats a random layout on recovery error") {
  const auto e2 = LatentSpace::euclidean(2);
  const auto f = NodeDensity::gaussian(Vec::Zero(2), 4.0 * Mat::Identity(2, 2));
  const auto w = LinkFunction::logistic(2.0);
  EmbedOptions opts;
  opts.restarts = 4;
  opts.max_iters = 300;
  const int reps = 10;
  int wins = 0;
  for (int r = 0; r < reps; ++r) {
    const GraphSample s = generate_graph_iid(f, 40, w, substream(8800, r));
    const EmbeddingResult est = mle_embed(s.graph, e2, w, substream(8801, r), opts);
    const double err_est = align_configs(s.config, est.estimate).dist_class;
    const Configuration random_layout =
        sample_ball_uniform(e2, 40, 0.5 * 4.0 * std::log(40.0), substream(8802, r));
    const double err_rand = align_configs(s.config, random_layout).dist_class;
    if (err_est < err_rand) ++wins;
  }
  CHECK(wins >= 9);
}
