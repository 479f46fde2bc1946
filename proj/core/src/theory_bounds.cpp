#include "cls/theory_bounds.hpp"

#include <cmath>
#include <limits>

namespace cls {

namespace {
constexpr double kLn2 = 0.6931471805599453094;
}

BoundValue make_bound(double log_value) {
  BoundValue b;
  b.log_value = log_value;
  b.raw = std::exp(log_value);
  b.clipped = std::min(b.raw, 1.0);
  return b;
}

BoundValue mcdiarmid_uniform_bound(int n, double v, double eps) {
  if (n < 2) throw usage_error("need at least two nodes");
  if (!(v > 0)) throw usage_error("logit bound must be positive");
  if (!(eps > 0)) throw usage_error("eps must be positive");
  const double nn = static_cast<double>(n);
  return make_bound(std::log(2.0) - 2.0 * eps * eps / (nn * (nn - 1.0) * v * v));
}

BoundValue mcdiarmid_pair_bound(const Configuration& c, const LinkFunction& w, double eps) {
  validate_configuration(c);
  if (c.n() < 2) throw usage_error("need at least two nodes");
  if (!(eps > 0)) throw usage_error("eps must be positive");
  const int n = c.n();
  // sum over pairs of 4^-(p+q) logit^2, 1-based indices; log-space for large
  // n where the weights underflow.
  double denom;
  if (n <= 50) {
    double acc = 0, comp = 0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double l = link_logit(w, dist(c.space, c.points[p], c.points[q]), n);
        const double y = std::exp2(-2.0 * (p + q + 2)) * l * l - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
      }
    }
    denom = acc;
  } else {
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> exps;
    exps.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double l =
            std::abs(link_logit(w, dist(c.space, c.points[p], c.points[q]), n));
        if (l == 0) continue;
        const double e = -2.0 * (p + q + 2) * kLn2 + 2.0 * std::log(l);
        exps.push_back(e);
        m = std::max(m, e);
      }
    }
    if (exps.empty()) {
      denom = 0;
    } else {
      double acc = 0;
      for (double e : exps) acc += std::exp(e - m);
      denom = std::exp(m + std::log(acc));
    }
  }
  if (denom == 0) {
    // Every pair's summand is deterministic, so any positive deviation has
    // probability zero.
    BoundValue b;
    b.log_value = -std::numeric_limits<double>::infinity();
    b.raw = 0;
    b.clipped = 0;
    return b;
  }
  return make_bound(std::log(2.0) - eps * eps / denom);
}

double pseudo_dim_bound(int n, int dim, double components) {
  if (n < 1 || dim < 1) throw usage_error("n and dim must be >= 1");
  if (!(components >= 1)) throw usage_error("component count must be >= 1");
  return 2.0 * std::log2(components) + 2.0 * n * dim * std::log2(2.0 / kLn2);
}

BoundValue covering_number_bound(double eps, double pdim) {
  if (!(eps > 0)) throw usage_error("eps must be positive");
  if (!(pdim >= 0)) throw usage_error("pseudo-dimension must be non-negative");
  return make_bound(1.0 + std::log(pdim + 1.0) + pdim * (1.0 + std::log(2.0 / eps)));
}

double growth_function_bound(double components, double d, double m) {
  if (!(components >= 1) || !(d > 0) || !(m >= d))
    throw usage_error("growth bound needs components >= 1 and m >= d > 0");
  return components * std::pow(std::exp(1.0) * m / d, d);
}

BoundValue uniform_deviation_bound(int n, int dim, double components, double v, double eps) {
  if (n < 2) throw usage_error("need at least two nodes");
  if (!(v > 0) || !(eps > 0)) throw usage_error("v and eps must be positive");
  const double pdim = pseudo_dim_bound(n, dim, components);
  const BoundValue covering = covering_number_bound(eps / 16.0, pdim);
  const double nn = static_cast<double>(n);
  const double exponent = -eps * eps / (8.0 * nn * (nn - 1.0) * v * v);
  return make_bound(std::log(4.0) + covering.log_value + exponent);
}

}  // namespace cls
