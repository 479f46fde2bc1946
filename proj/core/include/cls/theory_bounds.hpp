#pragma once

#include "cls/geometry.hpp"
#include "cls/likelihood.hpp"
#include "cls/link_model.hpp"

namespace cls {

// A bound kept in log space so that astronomically small or large values
// survive evaluation. `raw` is exp(log_value) (may overflow to inf);
// `clipped` caps probability-style bounds at 1.
struct BoundValue {
  double log_value = 0;
  double raw = 0;
  double clipped = 0;
};

BoundValue make_bound(double log_value);

// Deviation bound for the unweighted log-likelihood of an n-node graph when
// every pair's logit is bounded by v: 2 exp(-2 eps^2 / (n (n-1) v^2)).
BoundValue mcdiarmid_uniform_bound(int n, double v, double eps);

// Deviation bound for the pair-weighted log-likelihood at configuration c:
// 2 exp(-eps^2 / sum_{p<q} 4^-(p+q) logit(w, dist_pq, n)^2).
// A zero denominator means the value is deterministic: bound 0 for eps > 0.
BoundValue mcdiarmid_pair_bound(const Configuration& c, const LinkFunction& w, double eps);

// Pseudo-dimension bound for the class of pair log-likelihood summand
// functions over n points: 2 log2(B) + 2 n dim log2(2 / ln 2), with B the
// number of connected components of the isometry group.
double pseudo_dim_bound(int n, int dim, double components = 2);

// Covering number bound e (pdim + 1) (2 e / eps)^pdim.
BoundValue covering_number_bound(double eps, double pdim);

// Growth function bound B (e m / d)^d for m >= d samples.
double growth_function_bound(double components, double d, double m);

// Uniform deviation bound 4 N1(eps/16) exp(-eps^2 / (8 n (n-1) v^2)), with
// N1 the covering bound at pseudo-dimension pseudo_dim_bound(n, dim, B).
BoundValue uniform_deviation_bound(int n, int dim, double components, double v, double eps);

}  // namespace cls
