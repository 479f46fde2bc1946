#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

#include "cls/errors.hpp"

namespace cls {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class SpaceKind { Euclidean, HalfPlane };

// A latent metric space: flat d-dimensional space, or the hyperbolic plane in
// upper half-plane coordinates (x, y), y > 0, with line element (dx^2+dy^2)/y^2.
struct LatentSpace {
  SpaceKind kind = SpaceKind::Euclidean;
  int dim = 2;

  static LatentSpace euclidean(int d) {
    if (d < 1) throw usage_error("euclidean dimension must be >= 1");
    return {SpaceKind::Euclidean, d};
  }
  static LatentSpace half_plane() { return {SpaceKind::HalfPlane, 2}; }

  bool operator==(const LatentSpace& o) const { return kind == o.kind && dim == o.dim; }
  bool operator!=(const LatentSpace& o) const { return !(*this == o); }

  // Connected components of the isometry group (orientation preserving or not).
  static constexpr int isometry_components = 2;
};

void validate_point(const LatentSpace& space, const Vec& p);

// An ordered list of points in one space. Order is meaningful: likelihood
// weights and alignment both act index-wise.
struct Configuration {
  LatentSpace space;
  std::vector<Vec> points;

  int n() const { return static_cast<int>(points.size()); }
};

void validate_configuration(const Configuration& c);

// x -> Q x + t with Q orthogonal (either orientation).
struct EuclideanIsometry {
  Mat rotation;
  Vec translation;
};

// z -> (a z + b) / (c z + d), ad - bc = 1, optionally pre-composed with the
// reflection z -> -conj(z).
struct HalfPlaneIsometry {
  double a = 1, b = 0, c = 0, d = 1;
  bool reflect = false;
};

struct Isometry {
  LatentSpace space;
  std::variant<EuclideanIsometry, HalfPlaneIsometry> rep;

  static Isometry identity(const LatentSpace& space);
  static Isometry euclidean(const Mat& rotation, const Vec& translation);
  static Isometry mobius(double a, double b, double c, double d, bool reflect = false);
  // Iwasawa-style build: rotate about i by theta, dilate by exp(log_scale),
  // then shift the real coordinate; optional pre-reflection.
  static Isometry half_plane_from_params(double shift, double log_scale, double theta,
                                         bool reflect = false);

  const EuclideanIsometry& as_euclidean() const { return std::get<EuclideanIsometry>(rep); }
  const HalfPlaneIsometry& as_half_plane() const { return std::get<HalfPlaneIsometry>(rep); }
};

void validate_isometry(const Isometry& iso);
bool orientation_reversing(const Isometry& iso);

double dist(const LatentSpace& space, const Vec& p, const Vec& q);

// Riemannian gradient of dist(p, q) with respect to each argument, expressed
// in coordinates (for HalfPlane this is y^2 times the coordinate partials).
// Throws singularity_error when dist(p, q) < 1e-12.
struct DistGrad {
  Vec at_p;
  Vec at_q;
};
DistGrad dist_grad(const LatentSpace& space, const Vec& p, const Vec& q);

Vec apply_isometry(const Isometry& iso, const Vec& p);
Configuration apply_isometry(const Isometry& iso, const Configuration& c);
Isometry compose(const Isometry& f, const Isometry& g);  // acts as f after g
Isometry inverse(const Isometry& iso);

// Geodesic toolkit. Tangent vectors live in ambient coordinates at the base
// point; exp_map follows the geodesic with that initial velocity for unit time.
Vec exp_map(const LatentSpace& space, const Vec& p, const Vec& v);
Vec log_map(const LatentSpace& space, const Vec& p, const Vec& q);
double tangent_norm(const LatentSpace& space, const Vec& p, const Vec& v);
// Pull p back onto the closed ball of radius `radius` around `base`.
Vec ball_project(const LatentSpace& space, const Vec& base, const Vec& p, double radius);
// Canonical base point: origin, or i = (0, 1).
Vec base_point(const LatentSpace& space);
// Point at geodesic distance r from `center` in direction theta (HalfPlane).
Vec half_plane_from_polar(const Vec& center, double r, double theta);

// Node location densities over a latent space.
struct GaussianEuclidean {
  Vec mean;
  Mat cov;
  Mat chol;         // lower Cholesky factor of cov
  double log_norm;  // log of the density normalizing constant
};

// Density proportional to exp(-dist(z, center)^2 / (2 sigma^2)) against the
// hyperbolic area element.
struct HyperGaussian {
  Vec center;
  double sigma = 1;
  double norm_const = 0;  // integral of the unnormalized kernel
};

struct KdeEstimate {
  Configuration centers;
  double bandwidth = 0;
  double kernel_norm = 0;  // per-center kernel normalizer
};

struct NodeDensity {
  LatentSpace space;
  std::variant<GaussianEuclidean, HyperGaussian, KdeEstimate> kind;

  static NodeDensity gaussian(const Vec& mean, const Mat& cov);
  static NodeDensity standard_gaussian(int dim);
  static NodeDensity hyper_gaussian(const Vec& center, double sigma);

  bool is_kde() const { return std::holds_alternative<KdeEstimate>(kind); }
};

// Hyperbolic-Gaussian kernel mass: integral over the half-plane of
// exp(-dist(z, c)^2 / (2 sigma^2)) against y^-2 dx dy, by radial quadrature.
double hyper_gaussian_mass(double sigma);

// Draw n i.i.d. points. Deterministic given the seed.
Configuration sample_density(const NodeDensity& f, int n, std::uint64_t seed);

// Uniform draw from the ball of radius `radius` around the base point (with
// respect to the space's volume element).
Configuration sample_ball_uniform(const LatentSpace& space, int n, double radius,
                                  std::uint64_t seed);

Isometry random_isometry(const LatentSpace& space, std::uint64_t seed,
                         double translation_scale = 1.0);

}  // namespace cls
