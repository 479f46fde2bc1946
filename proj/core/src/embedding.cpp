#include "cls/embedding.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <queue>

#include "cls/errors.hpp"
#include "cls/random.hpp"

namespace cls {

namespace {

double default_t_max(int n) { return 4.0 * std::log(std::max(n, 2)); }

std::vector<std::vector<int>> adjacency(const Graph& g) {
  std::vector<std::vector<int>> adj(g.n());
  for (const auto& [p, q] : g.edges()) {
    adj[p].push_back(q);
    adj[q].push_back(p);
  }
  return adj;
}

// Connected component label per node, labels dense from zero.
std::vector<int> component_labels(const Graph& g, int* count) {
  const int n = g.n();
  const auto adj = adjacency(g);
  std::vector<int> label(n, -1);
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::queue<int> frontier;
    frontier.push(s);
    label[s] = next;
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v : adj[u])
        if (label[v] < 0) {
          label[v] = next;
          frontier.push(v);
        }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

// Hop distances from every node of one component to every other, scaled to
// the link's distance unit, then classical MDS per component.
Configuration mds_layout(const Graph& g, const LatentSpace& space, double radius,
                         std::uint64_t seed) {
  const int n = g.n();
  const int dim = space.dim;
  const double scale = std::log(std::max(n, 2));
  const auto adj = adjacency(g);
  int n_comp = 0;
  const std::vector<int> label = component_labels(g, &n_comp);

  std::vector<std::vector<int>> members(n_comp);
  for (int i = 0; i < n; ++i) members[label[i]].push_back(i);

  Mat coords = Mat::Zero(n, dim);
  std::vector<double> extent(n_comp, 0.0);
  for (int c = 0; c < n_comp; ++c) {
    const auto& nodes = members[c];
    const int m = static_cast<int>(nodes.size());
    if (m == 1) continue;
    std::vector<int> pos(n, -1);
    for (int i = 0; i < m; ++i) pos[nodes[i]] = i;
    Mat d2 = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      std::vector<int> hops(n, -1);
      std::queue<int> frontier;
      hops[nodes[i]] = 0;
      frontier.push(nodes[i]);
      while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : adj[u])
          if (hops[v] < 0) {
            hops[v] = hops[u] + 1;
            frontier.push(v);
          }
      }
      for (int j = 0; j < m; ++j) {
        const double dij = scale * hops[nodes[j]];
        d2(i, j) = dij * dij;
      }
    }
    // Double centering, then the top eigenpairs give the layout.
    Mat b = -0.5 * d2;
    const Vec row_mean = b.rowwise().mean();
    const double total_mean = row_mean.mean();
    b.colwise() -= row_mean;
    b.rowwise() -= row_mean.transpose();
    b.array() += total_mean;
    Eigen::SelfAdjointEigenSolver<Mat> eig(b);
    for (int k = 0; k < std::min(dim, m); ++k) {
      const int src = m - 1 - k;  // eigenvalues ascend
      const double lam = eig.eigenvalues()[src];
      if (lam <= 0) continue;
      const double s = std::sqrt(lam);
      for (int i = 0; i < m; ++i) coords(nodes[i], k) = s * eig.eigenvectors()(i, src);
    }
    for (int i = 0; i < m; ++i) extent[c] = std::max(extent[c], std::abs(coords(nodes[i], 0)));
  }

  // Components laid side by side along the first axis with a one-unit gap.
  double offset = 0;
  for (int c = 0; c < n_comp; ++c) {
    if (c > 0) {
      offset += extent[c - 1] + scale + extent[c];
      for (int i : members[c]) coords(i, 0) += offset;
    }
  }

  auto engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vec base = base_point(space);
  Configuration out{space, {}};
  out.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec p(dim);
    for (int k = 0; k < dim; ++k) p[k] = coords(i, k) + 1e-6 * normal(engine);
    if (space.kind == SpaceKind::HalfPlane) {
      // Layout coordinates live in (x, log y); exponentiate the height.
      p[1] = std::exp(std::clamp(p[1], -300.0, 300.0));
    }
    out.points.push_back(ball_project(space, base, p, radius));
  }
  return out;
}

struct RestartOutcome {
  Configuration estimate;
  double objective = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

struct AscentContext {
  const Graph* g;
  LatentSpace space;
  LinkFunction w;
  double radius;
  EmbedOptions opts;
  std::uint64_t seed;
  double t_max;
};

RestartOutcome run_restart(const AscentContext& ctx, int r) {
  const InitStrategy strategy = (r == 0 && ctx.opts.mds_first) ? InitStrategy::GraphMds
                                                               : InitStrategy::RandomBall;
  Configuration c =
      init_embedding(*ctx.g, ctx.space, ctx.w, strategy, substream(ctx.seed, r), ctx.t_max);
  const Vec base = base_point(ctx.space);

  RestartOutcome out;
  out.objective = loglik(c, *ctx.g, ctx.w, LogGuard::Clamped).value;
  out.trace.push_back(out.objective);
  double step = ctx.opts.step0;
  for (; out.iterations < ctx.opts.max_iters; ++out.iterations) {
    std::vector<Vec> grad;
    try {
      grad = loglik_grad(c, *ctx.g, ctx.w);
    } catch (const singularity_error&) {
      break;  // coincident points; keep what this restart has
    }
    double gnorm2 = 0;
    for (int i = 0; i < c.n(); ++i) {
      const double gi = tangent_norm(ctx.space, c.points[i], grad[i]);
      gnorm2 += gi * gi;
    }
    if (std::sqrt(gnorm2) < ctx.opts.grad_tol) {
      out.converged = true;
      break;
    }
    // Backtracking line search along the projected geodesic step, warm
    // started from the last accepted step size.
    step = std::min(2.0 * step, 64.0 * ctx.opts.step0);
    bool accepted = false;
    while (step > 1e-14 * ctx.opts.step0) {
      Configuration cand = c;
      bool feasible = true;
      try {
        for (int i = 0; i < c.n(); ++i) {
          const Vec move = step * grad[i];
          cand.points[i] = ball_project(ctx.space, base,
                                        exp_map(ctx.space, c.points[i], move), ctx.radius);
        }
      } catch (const std::exception&) {
        feasible = false;
      }
      if (feasible) {
        const double cand_obj = loglik(cand, *ctx.g, ctx.w, LogGuard::Clamped).value;
        if (cand_obj > out.objective) {
          c = std::move(cand);
          out.objective = cand_obj;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no ascent at any step size
    out.trace.push_back(out.objective);
    if (ctx.opts.stall_iters > 0 &&
        out.trace.size() > static_cast<std::size_t>(ctx.opts.stall_iters)) {
      const std::size_t m = out.trace.size();
      if (out.trace[m - 1] - out.trace[m - 1 - ctx.opts.stall_iters] < ctx.opts.stall_tol)
        break;
    }
  }
  out.estimate = std::move(c);
  return out;
}

}  // namespace

Configuration init_embedding(const Graph& g, const LatentSpace& space, const LinkFunction& w,
                             InitStrategy strategy, std::uint64_t seed, double t_max) {
  (void)w;
  if (g.n() < 1) throw usage_error("graph must have at least one node");
  if (g.n() == 1) return Configuration{space, {base_point(space)}};
  const double tm = t_max > 0 ? t_max : default_t_max(g.n());
  const double radius = tm / 2.0;
  if (strategy == InitStrategy::RandomBall)
    return sample_ball_uniform(space, g.n(), radius, seed);
  return mds_layout(g, space, radius, seed);
}

EmbeddingResult mle_embed(const Graph& g, const LatentSpace& space, const LinkFunction& w,
                          std::uint64_t seed, const EmbedOptions& opts) {
  if (w.kind == LinkFunction::Kind::HardThreshold)
    throw usage_error("threshold link has no usable gradient; use a logistic link");
  if (g.n() < 1) throw usage_error("graph must have at least one node");
  if (opts.restarts < 1) throw usage_error("need at least one restart");
  if (!(opts.step0 > 0)) throw usage_error("step0 must be positive");

  AscentContext ctx;
  ctx.g = &g;
  ctx.space = space;
  ctx.w = w;
  ctx.t_max = opts.t_max > 0 ? opts.t_max : default_t_max(g.n());
  ctx.radius = ctx.t_max / 2.0;
  ctx.opts = opts;
  ctx.seed = seed;

  std::vector<RestartOutcome> outcomes(opts.restarts);
  if (opts.parallel_restarts && opts.restarts > 1) {
    std::vector<std::future<RestartOutcome>> futures;
    futures.reserve(opts.restarts);
    for (int r = 0; r < opts.restarts; ++r)
      futures.push_back(std::async(std::launch::async, run_restart, std::cref(ctx), r));
    for (int r = 0; r < opts.restarts; ++r) outcomes[r] = futures[r].get();
  } else {
    for (int r = 0; r < opts.restarts; ++r) outcomes[r] = run_restart(ctx, r);
  }

  int best = 0;
  for (int r = 1; r < opts.restarts; ++r)
    if (outcomes[r].objective > outcomes[best].objective + 1e-9) best = r;

  EmbeddingResult result;
  result.estimate = std::move(outcomes[best].estimate);
  result.objective = outcomes[best].objective;
  result.restarts_used = opts.restarts;
  result.iterations = outcomes[best].iterations;
  result.converged = outcomes[best].converged;
  result.objective_trace = std::move(outcomes[best].trace);
  component_labels(g, &result.mds_components);
  const Vec base = base_point(space);
  for (const Vec& p : result.estimate.points)
    if (dist(space, base, p) > ctx.radius - 1e-6) {
      result.boundary_hit = true;
      break;
    }
  return result;
}

}  // namespace cls
