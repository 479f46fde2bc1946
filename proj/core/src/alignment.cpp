#include "cls/alignment.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cls/density_estimation.hpp"
#include "cls/random.hpp"

namespace cls {

NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0,
                             double initial_step, int max_evals, double tol) {
  const int k = static_cast<int>(x0.size());
  struct Vertex {
    Vec x;
    double value;
  };
  std::vector<Vertex> simplex;
  simplex.reserve(k + 1);
  int evals = 0;
  auto eval = [&](const Vec& x) {
    ++evals;
    return f(x);
  };
  simplex.push_back({x0, eval(x0)});
  for (int i = 0; i < k; ++i) {
    Vec x = x0;
    x[i] += initial_step;
    simplex.push_back({x, eval(x)});
  }
  auto order = [&] {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.value < b.value; });
  };
  order();
  while (evals < max_evals) {
    if (simplex.back().value - simplex.front().value <
        tol * (1.0 + std::abs(simplex.front().value)))
      break;
    Vec centroid = Vec::Zero(k);
    for (int i = 0; i < k; ++i) centroid += simplex[i].x;
    centroid /= k;
    const Vertex& worst = simplex.back();
    const Vec reflected = centroid + (centroid - worst.x);
    const double fr = eval(reflected);
    if (fr < simplex.front().value) {
      const Vec expanded = centroid + 2.0 * (centroid - worst.x);
      const double fe = eval(expanded);
      simplex.back() = fe < fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
    } else if (fr < simplex[k - 1].value) {
      simplex.back() = {reflected, fr};
    } else {
      const bool outside = fr < worst.value;
      const Vec contracted =
          centroid + 0.5 * ((outside ? reflected : worst.x) - centroid);
      const double fc = eval(contracted);
      if (fc < std::min(fr, worst.value)) {
        simplex.back() = {contracted, fc};
      } else {
        for (int i = 1; i <= k; ++i) {
          simplex[i].x = simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x);
          simplex[i].value = eval(simplex[i].x);
        }
      }
    }
    order();
  }
  return {simplex.front().x, simplex.front().value, evals};
}

namespace {

// Parameter layouts for the isometry search. Euclidean: d(d-1)/2 rotation
// angles (skew-symmetric generator) then d translation entries, applied on
// top of a base orthogonal matrix carrying the component. HalfPlane: shift,
// log dilation, rotation angle; the reflection bit carries the component.
struct EuclideanParams {
  Mat base;  // det +1 or -1
  int dim;

  int size() const { return dim * (dim - 1) / 2 + dim; }

  Isometry build(const Vec& params) const {
    Mat skew = Mat::Zero(dim, dim);
    int k = 0;
    for (int i = 0; i < dim; ++i) {
      for (int j = i + 1; j < dim; ++j, ++k) {
        skew(i, j) = params[k];
        skew(j, i) = -params[k];
      }
    }
    const Mat rot = dim > 1 ? Mat(base * skew.exp()) : base;
    return Isometry::euclidean(rot, params.tail(dim));
  }
};

Isometry build_half_plane(const Vec& params, bool reflect) {
  return Isometry::half_plane_from_params(params[0], params[1], params[2], reflect);
}

// Inverse of half_plane_from_params for an orientation-preserving mobius map:
// recover (shift, log_scale, theta) of the N(shift) A(log_scale) K(theta)
// factorization from the normalized coefficients.
Vec half_plane_params(const Isometry& iso) {
  const auto& m = std::get<HalfPlaneIsometry>(iso.rep);
  const double e = 1.0 / std::hypot(m.c, m.d);  // exp(log_scale / 2)
  const double half = std::atan2(-m.c * e, m.d * e);
  const double ch = std::cos(half), sh = std::sin(half);
  const double shift = std::abs(ch) >= std::abs(sh) ? (m.b - e * sh) * e / ch
                                                    : (e * ch - m.a) * e / sh;
  Vec p(3);
  p << shift, 2.0 * std::log(e), 2.0 * half;
  return p;
}

// z -> py z + px, the (shift, scale) map taking the base point i to p.
Isometry half_plane_to_point(const Vec& p) {
  return Isometry::mobius(p[1], p[0], 0.0, 1.0);
}

struct SearchProblem {
  std::function<double(const Isometry&)> objective;
  LatentSpace space;
  double translation_scale = 1;
};

struct SearchOutcome {
  Isometry iso;
  double value;
};

// Minimize over one component of the isometry group from a list of starting
// isometry parameters, Nelder-Mead with a polish round.
SearchOutcome search_component(const SearchProblem& problem,
                               const std::vector<Vec>& starts,
                               const std::function<Isometry(const Vec&)>& build,
                               const AlignOptions& opts) {
  double best_value = std::numeric_limits<double>::infinity();
  Vec best_params;
  auto f = [&](const Vec& p) -> double {
    // Extreme parameters (huge dilations, overflowing translations) can make
    // the isometry numerically degenerate; score them as terrible instead of
    // letting the construction error abort the whole search.
    try {
      const double v = problem.objective(build(p));
      return std::isfinite(v) ? v : 1e100;
    } catch (const std::exception&) {
      return 1e100;
    }
  };
  for (const Vec& start : starts) {
    NelderMeadResult r =
        nelder_mead(f, start, 0.25 * std::max(1.0, problem.translation_scale),
                    opts.nm_max_evals, opts.nm_tol);
    NelderMeadResult polish = nelder_mead(f, r.x, 0.02, opts.nm_max_evals / 2, opts.nm_tol);
    if (polish.value < best_value) {
      best_value = polish.value;
      best_params = polish.x;
    }
  }
  return {build(best_params), best_value};
}

Vec log_coords(const Vec& p) {
  Vec v(2);
  v[0] = p[0];
  v[1] = std::log(p[1]);
  return v;
}

// Index pairs used to seed the search with isometries that map one node of y
// onto its partner in x exactly and line up the direction toward a second
// node. Such starts are built from distances and angles only, so they are
// stable under isometric re-coordinatizations of either argument.
std::vector<std::pair<int, int>> anchor_pairs(const Configuration& x,
                                              const Configuration& y) {
  const int n = x.n();
  std::vector<std::pair<int, int>> out;
  if (n < 2) return out;
  double best_joint = -1, best_x = -1, best_y = -1;
  std::pair<int, int> joint{0, 1}, widest_x{0, 1}, widest_y{0, 1};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dx = dist(x.space, x.points[i], x.points[j]);
      const double dy = dist(y.space, y.points[i], y.points[j]);
      if (std::min(dx, dy) > best_joint) best_joint = std::min(dx, dy), joint = {i, j};
      if (dx > best_x) best_x = dx, widest_x = {i, j};
      if (dy > best_y) best_y = dy, widest_y = {i, j};
    }
  }
  if (best_joint <= 1e-9) return out;
  out.push_back(joint);
  for (const auto& cand : {widest_x, widest_y}) {
    const double dx = dist(x.space, x.points[cand.first], x.points[cand.second]);
    const double dy = dist(y.space, y.points[cand.first], y.points[cand.second]);
    if (std::min(dx, dy) > 1e-9 && std::find(out.begin(), out.end(), cand) == out.end())
      out.push_back(cand);
  }
  return out;
}

}  // namespace

double alignment_objective(const Configuration& x, const Configuration& y,
                           const Isometry& iso) {
  validate_configuration(x);
  validate_configuration(y);
  if (x.space != y.space) throw usage_error("configurations live in different spaces");
  if (x.n() != y.n()) throw usage_error("configurations differ in size");
  if (iso.space != x.space) throw usage_error("isometry space mismatch");
  double acc = 0;
  for (int i = 0; i < x.n(); ++i)
    acc += dist(x.space, x.points[i], apply_isometry(iso, y.points[i]));
  return acc;
}

namespace {

SearchOutcome align_euclidean_component(const Configuration& x, const Configuration& y,
                                        int target_det,
                                        const std::vector<std::pair<int, int>>& anchors,
                                        const AlignOptions& opts) {
  const int d = x.space.dim;
  const int n = x.n();
  Vec mean_x = Vec::Zero(d), mean_y = Vec::Zero(d);
  for (int i = 0; i < n; ++i) {
    mean_x += x.points[i];
    mean_y += y.points[i];
  }
  mean_x /= n;
  mean_y /= n;
  // Squared-error Procrustes solution restricted to the component, as the
  // starting point for refining the sum-of-distances objective.
  Mat a = Mat::Zero(d, d);
  for (int i = 0; i < n; ++i)
    a += (y.points[i] - mean_y) * (x.points[i] - mean_x).transpose();
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat q = svd.matrixV() * svd.matrixU().transpose();
  if ((q.determinant() < 0 ? -1 : 1) != target_det) {
    Mat v = svd.matrixV();
    v.col(d - 1) *= -1;
    q = v * svd.matrixU().transpose();
  }
  EuclideanParams layout{q, d};

  double scale = 1.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, (x.points[i] - mean_x).norm());

  SearchProblem problem{
      [&](const Isometry& iso) { return alignment_objective(x, y, iso); },
      x.space, scale};

  std::vector<Vec> starts;
  Vec p0 = Vec::Zero(layout.size());
  p0.tail(d) = mean_x - q * mean_y;
  starts.push_back(p0);

  // Anchor starts: map y[i] onto x[i] exactly and rotate the i->j direction
  // into place (planar case only; higher dimensions rely on the Procrustes
  // start).
  if (d == 2) {
    for (const auto& [i, j] : anchors) {
      const Vec u = y.points[j] - y.points[i];
      const Vec v = x.points[j] - x.points[i];
      if (u.norm() < 1e-12 || v.norm() < 1e-12) continue;
      const double au = std::atan2(u[1], u[0]), av = std::atan2(v[1], v[0]);
      Mat m(2, 2);
      if (target_det == 1) {
        m << std::cos(av - au), -std::sin(av - au), std::sin(av - au), std::cos(av - au);
      } else {
        const double phi = 0.5 * (au + av);
        m << std::cos(2 * phi), std::sin(2 * phi), std::sin(2 * phi), -std::cos(2 * phi);
      }
      const Mat rel = layout.base.transpose() * m;  // rotation: base * rel = m
      Vec p(layout.size());
      p[0] = std::atan2(rel(0, 1), rel(0, 0));
      p.tail(2) = x.points[i] - m * y.points[i];
      starts.push_back(p);
    }
  }

  auto engine = make_engine(0x415alu + target_det + 7);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < opts.random_starts; ++s) {
    Vec p = p0;
    for (int i = 0; i < d * (d - 1) / 2; ++i) p[i] += 0.5 * normal(engine);
    for (int i = 0; i < d; ++i) p[layout.size() - d + i] += 0.2 * scale * normal(engine);
    starts.push_back(p);
  }
  return search_component(problem, starts,
                          [&](const Vec& p) { return layout.build(p); }, opts);
}

SearchOutcome align_half_plane_component(const Configuration& x, const Configuration& y,
                                         bool reflect,
                                         const std::vector<std::pair<int, int>>& anchors,
                                         const AlignOptions& opts) {
  const int n = x.n();
  // Match barycenters in (x, log y): dilation aligns the log-heights, then a
  // horizontal shift aligns the first coordinates.
  Vec bx = Vec::Zero(2), by = Vec::Zero(2);
  for (int i = 0; i < n; ++i) {
    bx += log_coords(x.points[i]);
    Vec yi = y.points[i];
    if (reflect) yi[0] = -yi[0];
    by += log_coords(yi);
  }
  bx /= n;
  by /= n;
  const double s0 = bx[1] - by[1];
  const double b0 = bx[0] - std::exp(s0) * by[0];

  double scale = 1.0;
  for (int i = 0; i < n; ++i)
    scale = std::max(scale, (log_coords(x.points[i]) - bx).norm());

  SearchProblem problem{
      [&](const Isometry& iso) { return alignment_objective(x, y, iso); },
      x.space, scale};

  std::vector<Vec> starts;
  for (double theta : {0.0, M_PI_2, -M_PI_2, M_PI}) {
    Vec p(3);
    p << b0, s0, theta;
    starts.push_back(p);
  }

  // Anchor starts: send y[i] (reflected first when searching that component)
  // to x[i] and rotate the tangent direction toward node j into place. The
  // tangent plane at the base point carries the flat metric, so the angles
  // read off the log map are the hyperbolic ones.
  const LatentSpace hp = LatentSpace::half_plane();
  const Vec base = base_point(hp);
  for (const auto& [i, j] : anchors) {
    Vec yi = y.points[i], yj = y.points[j];
    if (reflect) yi[0] = -yi[0], yj[0] = -yj[0];
    const Isometry from_y = inverse(half_plane_to_point(yi));
    const Isometry from_x = inverse(half_plane_to_point(x.points[i]));
    const Vec u = log_map(hp, base, apply_isometry(from_y, yj));
    const Vec v = log_map(hp, base, apply_isometry(from_x, x.points[j]));
    if (u.norm() < 1e-12 || v.norm() < 1e-12) continue;
    const double theta = std::atan2(v[1], v[0]) - std::atan2(u[1], u[0]);
    const Isometry spin = Isometry::half_plane_from_params(0.0, 0.0, theta, false);
    starts.push_back(half_plane_params(
        compose(half_plane_to_point(x.points[i]), compose(spin, from_y))));
  }

  auto engine = make_engine(0x415alu + (reflect ? 13 : 11));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < opts.random_starts; ++s) {
    Vec p(3);
    p << b0 + 0.3 * scale * normal(engine), s0 + 0.3 * normal(engine),
        2.0 * M_PI * normal(engine);
    starts.push_back(p);
  }
  return search_component(problem, starts,
                          [&](const Vec& p) { return build_half_plane(p, reflect); }, opts);
}

SearchOutcome search_direction(const Configuration& x, const Configuration& y,
                               const AlignOptions& opts) {
  const std::vector<std::pair<int, int>> anchors = anchor_pairs(x, y);
  SearchOutcome best{Isometry::identity(x.space), std::numeric_limits<double>::infinity()};
  if (x.space.kind == SpaceKind::Euclidean) {
    for (int target_det : {1, -1}) {
      SearchOutcome out = align_euclidean_component(x, y, target_det, anchors, opts);
      if (out.value < best.value) best = out;
    }
  } else {
    for (bool reflect : {false, true}) {
      SearchOutcome out = align_half_plane_component(x, y, reflect, anchors, opts);
      if (out.value < best.value) best = out;
    }
  }
  return best;
}

}  // namespace

AlignmentResult align_configs(const Configuration& x, const Configuration& y,
                              const AlignOptions& opts) {
  validate_configuration(x);
  validate_configuration(y);
  if (x.space != y.space) throw usage_error("configurations live in different spaces");
  if (x.n() != y.n()) throw usage_error("configurations differ in size");

  // Solve both directions and keep the better optimum: the objective of an
  // isometry on (x, y) equals that of its inverse on (y, x), so this makes
  // the reported class distance symmetric in its arguments by construction.
  const SearchOutcome fwd = search_direction(x, y, opts);
  const SearchOutcome bwd = search_direction(y, x, opts);
  const Isometry bwd_inv = inverse(bwd.iso);
  const double bwd_value = alignment_objective(x, y, bwd_inv);
  const Isometry& iso = bwd_value < fwd.value ? bwd_inv : fwd.iso;
  return {iso, alignment_objective(x, y, iso)};
}

GridQuadrature make_grid(const LatentSpace& space, const GridSpec& spec) {
  if (spec.points_per_axis < 32) throw usage_error("grid needs at least 32 points per axis");
  if (!(spec.radius > 0)) throw usage_error("grid radius must be positive");
  Vec center = spec.center.size() ? spec.center : base_point(space);
  validate_point(space, center);
  const int m = spec.points_per_axis;
  GridQuadrature grid;
  if (space.kind == SpaceKind::Euclidean) {
    const int d = space.dim;
    const double step = 2.0 * spec.radius / m;
    const double cell = std::pow(step, d);
    std::vector<int> idx(d, 0);
    const long total = static_cast<long>(std::pow(static_cast<double>(m), d));
    grid.points.reserve(total);
    grid.weights.reserve(total);
    for (long flat = 0; flat < total; ++flat) {
      long rem = flat;
      Vec p(d);
      for (int k = 0; k < d; ++k) {
        const int i = static_cast<int>(rem % m);
        rem /= m;
        p[k] = center[k] - spec.radius + (i + 0.5) * step;
      }
      grid.points.push_back(std::move(p));
      grid.weights.push_back(cell);
    }
    return grid;
  }
  // Cover the hyperbolic ball: x spans the ball's horizontal extent, heights
  // are log-spaced so the cusp near y = 0 is resolved; cell mass is the
  // hyperbolic area element y^-2 dx dy = e^-v dx dv at y = e^v.
  const double x_ext = center[1] * std::sinh(spec.radius);
  const double dx = 2.0 * x_ext / m;
  const double dv = 2.0 * spec.radius / m;
  grid.points.reserve(static_cast<std::size_t>(m) * m);
  grid.weights.reserve(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i) {
    const double px = center[0] - x_ext + (i + 0.5) * dx;
    for (int j = 0; j < m; ++j) {
      const double v = std::log(center[1]) - spec.radius + (j + 0.5) * dv;
      Vec p(2);
      p << px, std::exp(v);
      grid.weights.push_back(dx * dv / p[1]);
      grid.points.push_back(std::move(p));
    }
  }
  return grid;
}

namespace {

double density_cost(const NodeDensity& f) {
  if (const auto* est = std::get_if<KdeEstimate>(&f.kind)) return est->centers.n();
  return 1;
}

}  // namespace

DensityAlignment density_class_distance(const NodeDensity& f, const NodeDensity& g,
                                        const GridSpec& spec, const AlignOptions& opts) {
  if (f.space != g.space) throw usage_error("densities live in different spaces");
  const LatentSpace space = f.space;
  GridQuadrature grid = make_grid(space, spec);
  const std::size_t npts = grid.points.size();

  // ||f - g∘phi|| equals ||f∘psi - g|| for psi the inverse, so evaluate the
  // expensive density once on the fixed grid and move the cheap one.
  const bool swap = density_cost(g) > density_cost(f);
  const NodeDensity& fixed = swap ? g : f;
  const NodeDensity& moving = swap ? f : g;

  std::vector<double> fixed_vals(npts);
  for (std::size_t i = 0; i < npts; ++i)
    fixed_vals[i] = density_eval(fixed, grid.points[i]);

  auto sq_objective = [&](const Isometry& iso) {
    double acc = 0, comp = 0;
    for (std::size_t i = 0; i < npts; ++i) {
      const Vec z = apply_isometry(iso, grid.points[i]);
      const double diff = fixed_vals[i] - density_eval(moving, z);
      const double y = grid.weights[i] * diff * diff - comp;
      const double t = acc + y;
      comp = (t - acc) - y;
      acc = t;
    }
    return acc;
  };

  // Grid moments of both densities drive the initial translation guess.
  auto moments = [&](const NodeDensity& d) {
    Vec mean = Vec::Zero(2);
    double mass = 0;
    for (std::size_t i = 0; i < npts; ++i) {
      const double w = grid.weights[i] * density_eval(d, grid.points[i]);
      mean += w * (space.kind == SpaceKind::Euclidean ? grid.points[i]
                                                      : log_coords(grid.points[i]));
      mass += w;
    }
    return Vec(mean / std::max(mass, 1e-12));
  };
  const Vec mean_fixed = moments(fixed);
  const Vec mean_moving = moments(moving);

  SearchOutcome best{Isometry::identity(space), std::numeric_limits<double>::infinity()};
  SearchProblem problem{sq_objective, space, std::max(1.0, mean_fixed.norm())};

  if (space.kind == SpaceKind::Euclidean) {
    const int d = space.dim;
    for (int target_det : {1, -1}) {
      Mat base = Mat::Identity(d, d);
      if (target_det < 0) base(d - 1, d - 1) = -1;
      EuclideanParams layout{base, d};
      std::vector<Vec> starts;
      Vec p0 = Vec::Zero(layout.size());
      // moving(phi(z)) matches fixed when phi shifts fixed's frame onto
      // moving's: initial translation moves the fixed mean to the moving mean.
      p0.tail(d) = mean_moving - base * mean_fixed;
      starts.push_back(p0);
      Vec pz = Vec::Zero(layout.size());
      starts.push_back(pz);
      SearchOutcome out = search_component(
          problem, starts, [&](const Vec& p) { return layout.build(p); }, opts);
      if (out.value < best.value) best = out;
    }
  } else {
    for (bool reflect : {false, true}) {
      std::vector<Vec> starts;
      Vec mf = mean_fixed;
      if (reflect) mf[0] = -mf[0];
      const double s0 = mean_moving[1] - mf[1];
      const double b0 = mean_moving[0] - std::exp(s0) * mf[0];
      for (double theta : {0.0, M_PI}) {
        Vec p(3);
        p << b0, s0, theta;
        starts.push_back(p);
      }
      Vec pz = Vec::Zero(3);
      starts.push_back(pz);
      SearchOutcome out = search_component(
          problem, starts, [&](const Vec& p) { return build_half_plane(p, reflect); }, opts);
      if (out.value < best.value) best = out;
    }
  }

  DensityAlignment result;
  result.distance = std::sqrt(std::max(0.0, best.value));
  // With the roles swapped the search produced psi minimizing ||g - f∘psi||;
  // the reported map is its inverse.
  result.iso = swap ? inverse(best.iso) : best.iso;
  return result;
}

}  // namespace cls
