#include "cls/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "cls/random.hpp"

namespace cls {

namespace {

constexpr double kCoincidentTol = 1e-12;

double sq(double v) { return v * v; }

// Upper half-plane distance, written through asinh so that nearby points do
// not lose precision in acosh(1 + tiny).
double half_plane_dist(const Vec& p, const Vec& q) {
  const double n2 = sq(p[0] - q[0]) + sq(p[1] - q[1]);
  return 2.0 * std::asinh(0.5 * std::sqrt(n2 / (p[1] * q[1])));
}

void apply_mobius(const HalfPlaneIsometry& m, double x, double y, double& ox, double& oy) {
  if (m.reflect) x = -x;
  const double den = sq(m.c * x + m.d) + sq(m.c * y);
  ox = ((m.a * x + m.b) * (m.c * x + m.d) + m.a * m.c * y * y) / den;
  oy = y / den;
}

HalfPlaneIsometry normalized(double a, double b, double c, double d, bool reflect) {
  const double det = a * d - b * c;
  if (!(det > 0)) throw usage_error("mobius coefficients must have positive determinant");
  const double s = 1.0 / std::sqrt(det);
  return {a * s, b * s, c * s, d * s, reflect};
}

// Conjugate of M by the reflection z -> -conj(z): R M = star(M) R.
HalfPlaneIsometry star(const HalfPlaneIsometry& m) {
  return {m.a, -m.b, -m.c, m.d, m.reflect};
}

}  // namespace

void validate_point(const LatentSpace& space, const Vec& p) {
  if (p.size() != space.dim) throw usage_error("point dimension does not match space");
  if (!p.allFinite()) throw domain_error("point has non-finite coordinates");
  if (space.kind == SpaceKind::HalfPlane && !(p[1] > 0))
    throw domain_error("half-plane point must have positive second coordinate");
}

void validate_configuration(const Configuration& c) {
  if (c.n() < 1) throw usage_error("configuration must contain at least one point");
  for (const Vec& p : c.points) validate_point(c.space, p);
}

double dist(const LatentSpace& space, const Vec& p, const Vec& q) {
  validate_point(space, p);
  validate_point(space, q);
  if (space.kind == SpaceKind::Euclidean) return (p - q).norm();
  return half_plane_dist(p, q);
}

DistGrad dist_grad(const LatentSpace& space, const Vec& p, const Vec& q) {
  validate_point(space, p);
  validate_point(space, q);
  DistGrad g;
  if (space.kind == SpaceKind::Euclidean) {
    const double r = (p - q).norm();
    if (r < kCoincidentTol) throw singularity_error("distance gradient at coincident points");
    g.at_p = (p - q) / r;
    g.at_q = (q - p) / r;
    return g;
  }
  const double d = half_plane_dist(p, q);
  if (d < kCoincidentTol) throw singularity_error("distance gradient at coincident points");
  const double n2 = sq(p[0] - q[0]) + sq(p[1] - q[1]);
  const double s = std::sinh(d);  // sqrt(u^2 - 1) for u = cosh(d)
  // Coordinate partials of u = 1 + n2 / (2 py qy), then chain through
  // acosh and convert to the Riemannian gradient with the factor y^2.
  const double py = p[1], qy = q[1];
  Vec gp(2), gq(2);
  gp[0] = (p[0] - q[0]) / (py * qy);
  gp[1] = (p[1] - q[1]) / (py * qy) - n2 / (2 * py * py * qy);
  gq[0] = (q[0] - p[0]) / (py * qy);
  gq[1] = (q[1] - p[1]) / (py * qy) - n2 / (2 * py * qy * qy);
  g.at_p = (py * py / s) * gp;
  g.at_q = (qy * qy / s) * gq;
  return g;
}

Isometry Isometry::identity(const LatentSpace& space) {
  if (space.kind == SpaceKind::Euclidean)
    return euclidean(Mat::Identity(space.dim, space.dim), Vec::Zero(space.dim));
  return mobius(1, 0, 0, 1, false);
}

Isometry Isometry::euclidean(const Mat& rotation, const Vec& translation) {
  Isometry iso{LatentSpace::euclidean(static_cast<int>(translation.size())),
               EuclideanIsometry{rotation, translation}};
  validate_isometry(iso);
  return iso;
}

Isometry Isometry::mobius(double a, double b, double c, double d, bool reflect) {
  return Isometry{LatentSpace::half_plane(), normalized(a, b, c, d, reflect)};
}

Isometry Isometry::half_plane_from_params(double shift, double log_scale, double theta,
                                          bool reflect) {
  const double e = std::exp(0.5 * log_scale);
  const double ch = std::cos(0.5 * theta), sh = std::sin(0.5 * theta);
  // N(shift) * A(log_scale) * K(theta)
  const double a = e * ch + shift * (-sh / e);
  const double b = e * sh + shift * (ch / e);
  const double c = -sh / e;
  const double d = ch / e;
  return mobius(a, b, c, d, reflect);
}

void validate_isometry(const Isometry& iso) {
  if (iso.space.kind == SpaceKind::Euclidean) {
    const auto& e = std::get<EuclideanIsometry>(iso.rep);
    const int d = iso.space.dim;
    if (e.rotation.rows() != d || e.rotation.cols() != d || e.translation.size() != d)
      throw usage_error("isometry dimensions do not match space");
    const double err =
        (e.rotation.transpose() * e.rotation - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
    if (err > 1e-10) throw usage_error("matrix is not orthogonal");
    return;
  }
  const auto& m = std::get<HalfPlaneIsometry>(iso.rep);
  if (std::abs(m.a * m.d - m.b * m.c - 1.0) > 1e-10)
    throw usage_error("mobius determinant is not 1");
}

bool orientation_reversing(const Isometry& iso) {
  if (iso.space.kind == SpaceKind::Euclidean)
    return std::get<EuclideanIsometry>(iso.rep).rotation.determinant() < 0;
  return std::get<HalfPlaneIsometry>(iso.rep).reflect;
}

Vec apply_isometry(const Isometry& iso, const Vec& p) {
  validate_isometry(iso);
  validate_point(iso.space, p);
  if (iso.space.kind == SpaceKind::Euclidean) {
    const auto& e = std::get<EuclideanIsometry>(iso.rep);
    return e.rotation * p + e.translation;
  }
  const auto& m = std::get<HalfPlaneIsometry>(iso.rep);
  Vec out(2);
  apply_mobius(m, p[0], p[1], out[0], out[1]);
  return out;
}

Configuration apply_isometry(const Isometry& iso, const Configuration& c) {
  if (iso.space != c.space) throw usage_error("isometry space does not match configuration");
  Configuration out{c.space, {}};
  out.points.reserve(c.points.size());
  for (const Vec& p : c.points) out.points.push_back(apply_isometry(iso, p));
  return out;
}

Isometry compose(const Isometry& f, const Isometry& g) {
  if (f.space != g.space) throw usage_error("cannot compose isometries of different spaces");
  if (f.space.kind == SpaceKind::Euclidean) {
    const auto& a = std::get<EuclideanIsometry>(f.rep);
    const auto& b = std::get<EuclideanIsometry>(g.rep);
    return Isometry::euclidean(a.rotation * b.rotation,
                               a.rotation * b.translation + a.translation);
  }
  const auto& a = std::get<HalfPlaneIsometry>(f.rep);
  HalfPlaneIsometry b = std::get<HalfPlaneIsometry>(g.rep);
  bool reflect = b.reflect;
  if (a.reflect) {
    b = star(b);
    reflect = !reflect;
  }
  return Isometry::mobius(a.a * b.a + a.b * b.c, a.a * b.b + a.b * b.d,
                          a.c * b.a + a.d * b.c, a.c * b.b + a.d * b.d, reflect);
}

Isometry inverse(const Isometry& iso) {
  if (iso.space.kind == SpaceKind::Euclidean) {
    const auto& e = std::get<EuclideanIsometry>(iso.rep);
    return Isometry::euclidean(e.rotation.transpose(), -(e.rotation.transpose() * e.translation));
  }
  const auto& m = std::get<HalfPlaneIsometry>(iso.rep);
  HalfPlaneIsometry inv{m.d, -m.b, -m.c, m.a, false};
  if (m.reflect) inv = star(inv);
  return Isometry::mobius(inv.a, inv.b, inv.c, inv.d, m.reflect);
}

Vec base_point(const LatentSpace& space) {
  Vec p = Vec::Zero(space.dim);
  if (space.kind == SpaceKind::HalfPlane) p[1] = 1;
  return p;
}

double tangent_norm(const LatentSpace& space, const Vec& p, const Vec& v) {
  if (space.kind == SpaceKind::Euclidean) return v.norm();
  return v.norm() / p[1];
}

Vec exp_map(const LatentSpace& space, const Vec& p, const Vec& v) {
  validate_point(space, p);
  if (space.kind == SpaceKind::Euclidean) return p + v;
  const double speed = v.norm() / p[1];
  if (speed < 1e-300) return p;
  const double a = v[0], b = v[1];
  Vec out(2);
  if (std::abs(a) <= 1e-13 * v.norm()) {
    // Vertical geodesic.
    out[0] = p[0];
    out[1] = p[1] * std::exp(b > 0 ? speed : -speed);
    return out;
  }
  // Geodesics are semicircles centered on the real axis. The tangent picks
  // the circle; arc length s moves tan(theta/2) by a factor exp(-sign(a) s).
  const double cx = p[0] + p[1] * b / a;
  const double rho = p[1] * v.norm() / std::abs(a);
  const double tan_half = p[1] / (rho + (p[0] - cx));
  const double arg = std::clamp(-std::copysign(speed, a), -700.0, 700.0);
  const double theta = 2.0 * std::atan(tan_half * std::exp(arg));
  out[0] = cx + rho * std::cos(theta);
  out[1] = rho * std::sin(theta);
  return out;
}

Vec log_map(const LatentSpace& space, const Vec& p, const Vec& q) {
  validate_point(space, p);
  validate_point(space, q);
  if (space.kind == SpaceKind::Euclidean) return q - p;
  const double d = half_plane_dist(p, q);
  Vec v = Vec::Zero(2);
  if (d < 1e-300) return v;
  if (std::abs(p[0] - q[0]) <= 1e-13 * (std::abs(p[1]) + std::abs(q[1]))) {
    v[1] = p[1] * (q[1] > p[1] ? d : -d);
    return v;
  }
  const double cx =
      (q[0] * q[0] + q[1] * q[1] - p[0] * p[0] - p[1] * p[1]) / (2.0 * (q[0] - p[0]));
  const double rho = std::sqrt(sq(p[0] - cx) + sq(p[1]));
  const double theta_p = std::atan2(p[1], p[0] - cx);
  const double theta_q = std::atan2(q[1], q[0] - cx);
  const double sign = theta_q > theta_p ? 1.0 : -1.0;
  v[0] = -p[1];
  v[1] = p[0] - cx;
  v *= sign * d * p[1] / rho;
  return v;
}

Vec ball_project(const LatentSpace& space, const Vec& base, const Vec& p, double radius) {
  const double d = dist(space, base, p);
  if (d <= radius) return p;
  if (space.kind == SpaceKind::Euclidean) return base + (p - base) * (radius / d);
  return exp_map(space, base, log_map(space, base, p) * (radius / d));
}

Vec half_plane_from_polar(const Vec& center, double r, double theta) {
  // Around i: Poincare disk point tanh(r/2) e^{i theta}, Cayley-mapped back
  // to the half-plane, then moved by z -> center_y z + center_x.
  const double m = std::tanh(0.5 * r);
  const double wx = m * std::cos(theta), wy = m * std::sin(theta);
  // z = i (1 + w) / (1 - w)
  const double den = sq(1.0 - wx) + sq(wy);
  const double zx = 2.0 * wy / den;
  const double zy = (1.0 - wx * wx - wy * wy) / den;
  Vec out(2);
  out[0] = center[1] * zx + center[0];
  out[1] = center[1] * zy;
  return out;
}

NodeDensity NodeDensity::gaussian(const Vec& mean, const Mat& cov) {
  const int d = static_cast<int>(mean.size());
  if (cov.rows() != d || cov.cols() != d) throw usage_error("covariance shape mismatch");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + cov.cwiseAbs().maxCoeff()))
    throw usage_error("covariance must be symmetric");
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success)
    throw usage_error("covariance must be positive definite");
  GaussianEuclidean g{mean, cov, llt.matrixL(), 0};
  double log_det_half = 0;
  for (int i = 0; i < d; ++i) log_det_half += std::log(g.chol(i, i));
  g.log_norm = -0.5 * d * std::log(2.0 * M_PI) - log_det_half;
  return NodeDensity{LatentSpace::euclidean(d), std::move(g)};
}

NodeDensity NodeDensity::standard_gaussian(int dim) {
  return gaussian(Vec::Zero(dim), Mat::Identity(dim, dim));
}

double hyper_gaussian_mass(double sigma) {
  // integral over r > 0 of 2 pi sinh(r) exp(-r^2 / (2 sigma^2)), Simpson rule.
  const double upper = sigma * sigma + 12.0 * sigma + 1.0;
  const int cells = 1 << 14;
  const double h = upper / cells;
  auto f = [&](double r) { return std::sinh(r) * std::exp(-0.5 * sq(r / sigma)); };
  double acc = f(0.0) + f(upper);
  for (int i = 1; i < cells; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return 2.0 * M_PI * acc * h / 3.0;
}

NodeDensity NodeDensity::hyper_gaussian(const Vec& center, double sigma) {
  validate_point(LatentSpace::half_plane(), center);
  if (!(sigma > 0)) throw usage_error("sigma must be positive");
  return NodeDensity{LatentSpace::half_plane(), HyperGaussian{center, sigma,
                                                              hyper_gaussian_mass(sigma)}};
}

namespace {

struct HyperProposal {
  double su = 1, sv = 1, ceiling = 1;
};

// Rejection sampling envelope for the hyperbolic Gaussian centered at i:
// Euclidean Gaussian proposal in (x, log y) whose scales cover the bulk of
// the target, ceiling fitted on a grid and inflated by a safety factor 3.
// The kernel's horizontal tails grow like exp(r), so no Gaussian dominates
// them globally; the envelope is fitted where all but ~exp(-8) of the mass
// lives, which is the accuracy the sampler delivers.
HyperProposal hyper_proposal(double sigma) {
  static std::mutex mu;
  static std::map<double, HyperProposal> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(sigma);
  if (it != cache.end()) return it->second;

  HyperProposal prop;
  const double bulk = sigma * sigma + 4.0 * sigma;
  prop.su = std::max(3.0 * sigma, std::sinh(std::min(bulk, 20.0)));
  prop.sv = std::max(3.0 * sigma, bulk);
  const double log_gnorm = -std::log(2.0 * M_PI * prop.su * prop.sv);
  const Vec i_point = (Vec(2) << 0.0, 1.0).finished();
  const LatentSpace hp = LatentSpace::half_plane();
  double max_ratio = 0;
  const int grid = 201;
  const double u_ext = 1.5 * std::sinh(std::min(bulk, 20.0));
  const double v_ext = 1.5 * bulk;
  for (int iu = 0; iu < grid; ++iu) {
    const double u = -u_ext + 2.0 * u_ext * iu / (grid - 1);
    for (int iv = 0; iv < grid; ++iv) {
      const double v = -v_ext + 2.0 * v_ext * iv / (grid - 1);
      Vec z(2);
      z[0] = u;
      z[1] = std::exp(v);
      const double d = dist(hp, i_point, z);
      const double log_t = -0.5 * sq(d / sigma) - v;
      const double log_g = log_gnorm - 0.5 * sq(u / prop.su) - 0.5 * sq(v / prop.sv);
      max_ratio = std::max(max_ratio, std::exp(log_t - log_g));
    }
  }
  prop.ceiling = 3.0 * max_ratio;
  cache[sigma] = prop;
  return prop;
}

Vec sample_hyper_gaussian(const HyperGaussian& hg, const HyperProposal& prop,
                          std::mt19937_64& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vec i_point = (Vec(2) << 0.0, 1.0).finished();
  const LatentSpace hp = LatentSpace::half_plane();
  const double log_gnorm = -std::log(2.0 * M_PI * prop.su * prop.sv);
  for (long attempt = 0; attempt < 1000000; ++attempt) {
    const double u = prop.su * normal(engine);
    const double v = prop.sv * normal(engine);
    Vec z(2);
    z[0] = u;
    z[1] = std::exp(std::clamp(v, -700.0, 700.0));
    const double d = dist(hp, i_point, z);
    const double log_t = -0.5 * sq(d / hg.sigma) - v;
    const double log_g = log_gnorm - 0.5 * sq(u / prop.su) - 0.5 * sq(v / prop.sv);
    const double ratio = std::exp(log_t - log_g) / prop.ceiling;
    if (unif(engine) < ratio) {
      // Move the draw from center i to the requested center.
      Vec out(2);
      out[0] = hg.center[1] * z[0] + hg.center[0];
      out[1] = hg.center[1] * z[1];
      return out;
    }
  }
  throw sampling_error("rejection sampler exceeded 1e6 proposals for one point");
}

// Inverse-CDF table for the radial part sinh(r) exp(-r^2 / (2 h^2)) of a
// hyperbolic Gaussian kernel; used to draw from half-plane mixtures.
std::vector<double> radial_cdf_table(double h, double& upper) {
  upper = h * h + 10.0 * h;
  const int cells = 4096;
  std::vector<double> cdf(cells + 1, 0.0);
  double acc = 0;
  for (int i = 1; i <= cells; ++i) {
    const double r0 = upper * (i - 1) / cells, r1 = upper * i / cells;
    const double rm = 0.5 * (r0 + r1);
    acc += std::sinh(rm) * std::exp(-0.5 * sq(rm / h)) * (r1 - r0);
    cdf[i] = acc;
  }
  for (double& v : cdf) v /= acc;
  return cdf;
}

double radial_cdf_draw(const std::vector<double>& cdf, double upper, double u) {
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  const std::size_t hi = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cdf.begin(), 1),
                                               cdf.size() - 1);
  const double c0 = cdf[hi - 1], c1 = cdf[hi];
  const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
  return upper * (static_cast<double>(hi - 1) + frac) / (cdf.size() - 1);
}

}  // namespace

Configuration sample_density(const NodeDensity& f, int n, std::uint64_t seed) {
  if (n < 1) throw usage_error("sample size must be >= 1");
  Configuration out{f.space, {}};
  out.points.reserve(n);
  auto engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  if (const auto* g = std::get_if<GaussianEuclidean>(&f.kind)) {
    const int d = f.space.dim;
    Vec z(d);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) z[k] = normal(engine);
      out.points.push_back(g->mean + g->chol * z);
    }
    return out;
  }
  if (const auto* hg = std::get_if<HyperGaussian>(&f.kind)) {
    const HyperProposal prop = hyper_proposal(hg->sigma);
    for (int i = 0; i < n; ++i) out.points.push_back(sample_hyper_gaussian(*hg, prop, engine));
    return out;
  }
  const auto& kde = std::get<KdeEstimate>(f.kind);
  std::uniform_int_distribution<int> pick(0, kde.centers.n() - 1);
  if (f.space.kind == SpaceKind::Euclidean) {
    const int d = f.space.dim;
    for (int i = 0; i < n; ++i) {
      Vec p = kde.centers.points[pick(engine)];
      for (int k = 0; k < d; ++k) p[k] += kde.bandwidth * normal(engine);
      out.points.push_back(std::move(p));
    }
    return out;
  }
  double upper = 0;
  const std::vector<double> cdf = radial_cdf_table(kde.bandwidth, upper);
  for (int i = 0; i < n; ++i) {
    const Vec& center = kde.centers.points[pick(engine)];
    const double r = radial_cdf_draw(cdf, upper, unif(engine));
    const double theta = 2.0 * M_PI * unif(engine);
    out.points.push_back(half_plane_from_polar(center, r, theta));
  }
  return out;
}

Configuration sample_ball_uniform(const LatentSpace& space, int n, double radius,
                                  std::uint64_t seed) {
  if (n < 1) throw usage_error("sample size must be >= 1");
  if (!(radius >= 0)) throw usage_error("radius must be non-negative");
  Configuration out{space, {}};
  out.points.reserve(n);
  auto engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vec base = base_point(space);
  if (space.kind == SpaceKind::Euclidean) {
    const int d = space.dim;
    for (int i = 0; i < n; ++i) {
      Vec dir(d);
      for (int k = 0; k < d; ++k) dir[k] = normal(engine);
      const double norm = dir.norm();
      const double r = radius * std::pow(unif(engine), 1.0 / d);
      out.points.push_back(norm > 0 ? Vec(dir * (r / norm)) : base);
    }
    return out;
  }
  const double area = std::cosh(radius) - 1.0;
  for (int i = 0; i < n; ++i) {
    const double r = std::acosh(1.0 + unif(engine) * area);
    const double theta = 2.0 * M_PI * unif(engine);
    out.points.push_back(half_plane_from_polar(base, r, theta));
  }
  return out;
}

Isometry random_isometry(const LatentSpace& space, std::uint64_t seed,
                         double translation_scale) {
  auto engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (space.kind == SpaceKind::Euclidean) {
    const int d = space.dim;
    Mat g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = normal(engine);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i)
      if (r(i, i) < 0) q.col(i) *= -1;
    if (unif(engine) < 0.5) q.col(d - 1) *= -1;  // other component
    Vec t(d);
    for (int i = 0; i < d; ++i) t[i] = translation_scale * normal(engine);
    return Isometry::euclidean(q, t);
  }
  const double shift = translation_scale * normal(engine);
  const double log_scale = 0.7 * normal(engine);
  const double theta = 2.0 * M_PI * unif(engine);
  const bool reflect = unif(engine) < 0.5;
  return Isometry::half_plane_from_params(shift, log_scale, theta, reflect);
}

}  // namespace cls
