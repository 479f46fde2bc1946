#include "cls/density_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cls {

double default_bandwidth(const Configuration& points) {
  validate_configuration(points);
  const int n = points.n();
  if (n < 2) throw usage_error("bandwidth rule needs at least two points");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      dists.push_back(dist(points.space, points.points[i], points.points[j]));
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  const double median = dists[dists.size() / 2];
  const double c = median / 2.0;
  if (!(c > 0)) throw domain_error("bandwidth rule degenerate: median pairwise distance is 0");
  return c * std::pow(static_cast<double>(n), -1.0 / (4.0 + points.space.dim));
}

NodeDensity kde(const Configuration& points, double bandwidth) {
  validate_configuration(points);
  if (bandwidth < 0) throw usage_error("kde bandwidth must be positive (0 selects the default rule)");
  const double h = bandwidth > 0 ? bandwidth : default_bandwidth(points);
  KdeEstimate est{points, h, 0};
  if (points.space.kind == SpaceKind::Euclidean) {
    est.kernel_norm = std::pow(2.0 * M_PI * h * h, -0.5 * points.space.dim);
  } else {
    est.kernel_norm = 1.0 / hyper_gaussian_mass(h);
  }
  return NodeDensity{points.space, std::move(est)};
}

double density_eval(const NodeDensity& f, const Vec& z) {
  validate_point(f.space, z);
  if (const auto* g = std::get_if<GaussianEuclidean>(&f.kind)) {
    const Vec delta = z - g->mean;
    const Vec y = g->chol.triangularView<Eigen::Lower>().solve(delta);
    return std::exp(g->log_norm - 0.5 * y.squaredNorm());
  }
  if (const auto* hg = std::get_if<HyperGaussian>(&f.kind)) {
    const double d = dist(f.space, hg->center, z);
    return std::exp(-0.5 * (d / hg->sigma) * (d / hg->sigma)) / hg->norm_const;
  }
  const auto& est = std::get<KdeEstimate>(f.kind);
  const double inv_2h2 = 1.0 / (2.0 * est.bandwidth * est.bandwidth);
  double acc = 0;
  for (const Vec& c : est.centers.points) {
    const double d = dist(f.space, c, z);
    acc += std::exp(-d * d * inv_2h2);
  }
  return est.kernel_norm * acc / est.centers.n();
}

}  // namespace cls
