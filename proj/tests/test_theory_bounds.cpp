#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"

using namespace cls;
using ts::vec1;

TEST_CASE("uniform deviation probability bound closed forms") {
  const BoundValue b = mcdiarmid_uniform_bound(2, 0.1, 0.1);
  CHECK(b.raw == doctest::Approx(0.73575888234288464).epsilon(1e-12));
  CHECK(b.clipped == b.raw);
  CHECK(b.log_value == doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-12));

  CHECK(mcdiarmid_uniform_bound(2, 0.1, 1e-15).raw == doctest::Approx(2.0).epsilon(1e-12));

  const double e1 = mcdiarmid_uniform_bound(5, 0.3, 0.5).raw;
  const double e2 = mcdiarmid_uniform_bound(5, 0.3, 1.0).raw;
  const double e3 = mcdiarmid_uniform_bound(5, 0.3, 2.0).raw;
  CHECK(e1 > e2);
  CHECK(e2 > e3);
}

TEST_CASE("per-pair deviation bound uses the configuration's logits") {
  // Two nodes at distance log2 - 1/2 with steepness 2 have pair logit exactly
  // 1, so the denominator is the lone weight 4^-3.
  Configuration c{LatentSpace::euclidean(1), {vec1(0.0), vec1(std::log(2.0) - 0.5)}};
  const auto w = LinkFunction::logistic(2.0);
  const BoundValue b = mcdiarmid_pair_bound(c, w, 0.1);
  CHECK(b.raw == doctest::Approx(1.0545848480860971).epsilon(1e-12));
  CHECK(b.clipped == 1.0);

  // All logits zero: the weighted likelihood is graph-independent, so any
  // positive deviation has probability zero.
  Configuration flat{LatentSpace::euclidean(1), {vec1(0.0), vec1(std::log(2.0))}};
  const BoundValue zero = mcdiarmid_pair_bound(flat, w, 0.1);
  CHECK(zero.raw == 0.0);
  CHECK(zero.clipped == 0.0);

  CHECK_THROWS_AS(mcdiarmid_pair_bound(c, LinkFunction::hard_threshold(), 0.1),
                  unbounded_logit_error);
}

TEST_CASE("graph-independent weighted likelihood when all logits vanish") {
  Configuration flat{LatentSpace::euclidean(1), {vec1(0.0), vec1(std::log(2.0))}};
  const auto w = LinkFunction::logistic(2.0);
  Graph with_edge(2), without(2);
  with_edge.set_edge(0, 1, true);
  CHECK(loglik_norm(flat, with_edge, w).value ==
        doctest::Approx(loglik_norm(flat, without, w).value).epsilon(1e-15));
}

TEST_CASE("pseudo-dimension bound evaluates the formula") {
  CHECK(pseudo_dim_bound(1, 1, 2) == doctest::Approx(5.0575327458897952).epsilon(1e-12));
  CHECK(pseudo_dim_bound(10, 2, 2) == doctest::Approx(63.150654917795905).epsilon(1e-12));
}

TEST_CASE("covering number bound closed forms") {
  CHECK(covering_number_bound(0.5, 0.0).raw ==
        doctest::Approx(2.7182818284590452).epsilon(1e-12));
  CHECK(covering_number_bound(2.0 * M_E, 1.0).raw ==
        doctest::Approx(5.4365636569180905).epsilon(1e-12));

  // Independent spot evaluation in log space.
  const double pdim = pseudo_dim_bound(10, 2, 2);
  const double want = 1.0 + std::log(pdim + 1.0) + pdim * std::log(2.0 * M_E / 0.1);
  CHECK(ts::rel_err(covering_number_bound(0.1, pdim).log_value, want) <= 1e-12);
}

TEST_CASE("growth function bound closed form") {
  CHECK(growth_function_bound(2, 2, 4) == doctest::Approx(59.112448791445202).epsilon(1e-12));
}

TEST_CASE("uniform deviation bound composes its pieces") {
  const int n = 50;
  const double v = 0.01, eps = 1.0;
  const BoundValue b = uniform_deviation_bound(n, 2, 2, v, eps);
  const double pdim = pseudo_dim_bound(n, 2, 2);
  const double want = std::log(4.0) + covering_number_bound(eps / 16.0, pdim).log_value -
                      eps * eps / (8.0 * n * (n - 1) * v * v);
  CHECK(ts::rel_err(b.log_value, want) <= 1e-9);
  // At this logit bound the covering term dominates and the bound is vacuous.
  CHECK(b.log_value > 0.0);
  CHECK(b.clipped == 1.0);

  // Small logit bounds push the exponential term into control.
  const BoundValue tight = uniform_deviation_bound(n, 2, 2, 1e-5, eps);
  CHECK(tight.log_value < 0.0);
  CHECK(tight.raw == 0.0);  // underflows linearly, the log value carries it
  CHECK(tight.clipped == 0.0);

  CHECK(uniform_deviation_bound(n, 2, 2, 0.001, eps).log_value < b.log_value);
}

TEST_CASE("log-space and direct evaluation agree where both are representable") {
  const BoundValue b = mcdiarmid_uniform_bound(4, 1.0, 0.5);
  CHECK(ts::rel_err(b.raw, 2.0 * std::exp(-2.0 * 0.25 / (12.0 * 1.0))) <= 1e-12);
  const BoundValue c = covering_number_bound(1.0, 3.0);
  CHECK(ts::rel_err(c.raw, M_E * 4.0 * std::pow(2.0 * M_E, 3.0)) <= 1e-12);
}

TEST_CASE("observed deviations stay below both probability bounds") {
  std::mt19937_64 eng(991);
  const auto w = LinkFunction::logistic(2.0);
  const Configuration c = ts::random_config(LatentSpace::euclidean(2), 5, eng, 1.0);
  const EdgeProbMatrix truth = edge_probabilities(c, w);
  const double center = expected_loglik_norm(c, truth, w);

  double denom = 0;
  double diam = 0;
  for (int p = 0; p < 5; ++p)
    for (int q = p + 1; q < 5; ++q) {
      const double d = dist(c.space, c.points[p], c.points[q]);
      diam = std::max(diam, d);
      const double logit = link_logit(w, d, 5);
      denom += std::exp2(-2.0 * (p + q + 2)) * logit * logit;
    }
  const double eps = 1.2 * std::sqrt(denom);

  const int draws = 2000;
  int exceed = 0;
  for (int r = 0; r < draws; ++r) {
    const double v = loglik_norm(c, generate_graph(c, w, substream(515151, r)), w).value;
    if (std::abs(v - center) > eps) ++exceed;
  }
  const double freq = double(exceed) / draws;
  const double sigma = std::sqrt(std::max(freq * (1 - freq), 1.0 / draws) / draws);
  CHECK(freq <= mcdiarmid_pair_bound(c, w, eps).clipped + 3 * sigma);
  const double v_bound = logit_bound(w, 5, diam);
  CHECK(freq <= mcdiarmid_uniform_bound(5, v_bound, eps).clipped + 3 * sigma);
}
