#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cls/geometry.hpp"
#include "cls/likelihood.hpp"
#include "cls/link_model.hpp"

namespace cls {

enum class InitStrategy { RandomBall, GraphMds };

struct EmbedOptions {
  int restarts = 8;
  int max_iters = 2000;
  double step0 = 0.1;
  double grad_tol = 1e-6;
  // Maximum pairwise distance the search allows; the ball constraint radius
  // is t_max / 2. Zero or negative selects 4 ln(n).
  double t_max = 0;
  // First restart from a graph-distance MDS layout, the rest from uniform
  // draws in the constraint ball.
  bool mds_first = true;
  // Stop a restart early when the objective has improved by less than
  // stall_tol over stall_iters accepted steps (0 disables).
  int stall_iters = 0;
  double stall_tol = 0;
  bool parallel_restarts = false;
};

struct EmbeddingResult {
  Configuration estimate;
  double objective = 0;  // loglik at the estimate (clamped evaluation)
  int restarts_used = 0;
  int iterations = 0;    // iterations of the winning restart
  bool converged = false;
  std::vector<double> objective_trace;  // winning restart, non-decreasing
  // True when some point of the estimate sits within 1e-6 of the constraint
  // ball boundary, i.e. the constraint is active at the reported maximizer.
  bool boundary_hit = false;
  int mds_components = 1;  // connected components seen by the MDS initializer
};

// Initial layout for the likelihood search.
Configuration init_embedding(const Graph& g, const LatentSpace& space, const LinkFunction& w,
                             InitStrategy strategy, std::uint64_t seed, double t_max = 0);

// Maximum likelihood embedding: multi-start projected Riemannian gradient
// ascent on loglik with backtracking line search, constrained to the ball of
// radius t_max/2 around the base point. Logistic links only (the hard
// threshold has no usable gradient).
EmbeddingResult mle_embed(const Graph& g, const LatentSpace& space, const LinkFunction& w,
                          std::uint64_t seed, const EmbedOptions& opts = {});

}  // namespace cls
