#pragma once

#include "cls/geometry.hpp"

namespace cls {

// Kernel density estimate with a Gaussian kernel in geodesic distance:
//   f_hat(z) = (1/n) sum_i K_h(dist(z, x_i)).
// Euclidean kernels use the closed-form normalizer; half-plane kernels use a
// numerically integrated per-bandwidth normalizer against the hyperbolic
// area element. bandwidth <= 0 selects the default rule
//   h = c * n^(-1/(4+dim)),  c = median pairwise distance / 2.
NodeDensity kde(const Configuration& points, double bandwidth = 0);

double default_bandwidth(const Configuration& points);

// Evaluate any density at a point of its space.
double density_eval(const NodeDensity& f, const Vec& z);

}  // namespace cls
