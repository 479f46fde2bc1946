#pragma once

#include <functional>

#include "cls/geometry.hpp"

namespace cls {

struct AlignOptions {
  int nm_max_evals = 600;     // Nelder-Mead budget per start
  double nm_tol = 1e-12;      // simplex objective spread at convergence
  int random_starts = 2;      // extra perturbed starts per component
  double translation_scale = 1.0;
};

// Sum over indices of dist(x_i, iso(y_i)); the objective the isometry search
// minimizes.
double alignment_objective(const Configuration& x, const Configuration& y,
                           const Isometry& iso);

struct AlignmentResult {
  Isometry iso;
  double dist_class = 0;  // alignment_objective at iso
};

// Distance between isometry classes: minimize over both connected components
// of the isometry group, closed-form initialization plus Nelder-Mead
// refinement. Approximate optimization, so a pseudo-metric in practice.
AlignmentResult align_configs(const Configuration& x, const Configuration& y,
                              const AlignOptions& opts = {});

// Quadrature grid for density comparisons, covering the ball of the given
// radius around `center` (defaults to the canonical base point).
struct GridSpec {
  double radius = 10;
  int points_per_axis = 48;  // must be >= 32
  Vec center;                // empty means base point
};

struct GridQuadrature {
  std::vector<Vec> points;
  std::vector<double> weights;
};
GridQuadrature make_grid(const LatentSpace& space, const GridSpec& spec);

struct DensityAlignment {
  Isometry iso;
  double distance = 0;  // L2 distance between f and g∘iso at the optimum
};

// Distance between density classes: inf over isometries of ||f - g∘phi||_2,
// quadrature on the grid, same two-component search as align_configs.
DensityAlignment density_class_distance(const NodeDensity& f, const NodeDensity& g,
                                        const GridSpec& grid, const AlignOptions& opts = {});

// Nelder-Mead simplex minimizer used by the isometry searches; exposed for
// reuse and testing. Returns the best parameter vector found.
struct NelderMeadResult {
  Vec x;
  double value = 0;
  int evals = 0;
};
NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0,
                             double initial_step, int max_evals, double tol);

}  // namespace cls
