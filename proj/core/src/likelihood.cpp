#include "cls/likelihood.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace cls {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453094;
const double kLogClampLo = std::log(1e-300);
const double kLogClampHi = std::log1p(-1e-16);

double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

struct PairLogs {
  double log_w;
  double log_1mw;
};

// log w and log(1-w) evaluated without forming w, so the logistic link never
// underflows; the hard threshold yields -inf unless clamped.
PairLogs pair_logs(const LinkFunction& w, double t, int n, LogGuard guard) {
  if (w.kind == LinkFunction::Kind::Logistic) {
    const double a = w.lambda * (t - std::log(static_cast<double>(n)));
    const double sp = softplus(a);
    return {-sp, a - sp};
  }
  const bool near = t <= std::log(static_cast<double>(n));
  if (guard == LogGuard::Clamped)
    return near ? PairLogs{kLogClampHi, kLogClampLo} : PairLogs{kLogClampLo, kLogClampHi};
  return near ? PairLogs{0.0, -kInf} : PairLogs{-kInf, 0.0};
}

// Accumulates sum of weight * term over pairs, weight = 2^-(p+q) (or its
// square) with 1-based indices. Direct compensated summation for small n;
// log-space accumulation for larger n where the weights underflow.
class WeightedPairSum {
public:
  WeightedPairSum(int n, double weight_scale)
      : log_mode_(n > 50), scale_(weight_scale) {}

  // i, j are 0-based; term may be +-inf.
  void add(int i, int j, double term) {
    if (term == 0) return;
    const double log_weight = -scale_ * (i + j + 2) * kLn2;
    if (std::isinf(term)) {
      (term > 0 ? saw_pos_inf_ : saw_neg_inf_) = true;
      return;
    }
    if (!log_mode_) {
      kahan(std::exp(log_weight) * term);
      return;
    }
    auto& side = term > 0 ? pos_ : neg_;
    side.push_back(log_weight + std::log(std::abs(term)));
  }

  double total() const {
    if (saw_pos_inf_ && !saw_neg_inf_) return kInf;
    if (saw_neg_inf_ && !saw_pos_inf_) return -kInf;
    if (saw_pos_inf_ && saw_neg_inf_) return std::numeric_limits<double>::quiet_NaN();
    if (!log_mode_) return sum_;
    return log_sum(pos_) - log_sum(neg_);
  }

private:
  void kahan(double v) {
    const double y = v - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }

  static double log_sum(const std::vector<double>& exps) {
    if (exps.empty()) return 0.0;
    double m = exps.front();
    for (double e : exps) m = std::max(m, e);
    double acc = 0, comp = 0;
    for (double e : exps) {
      const double y = std::exp(e - m) - comp;
      const double t = acc + y;
      comp = (t - acc) - y;
      acc = t;
    }
    return std::exp(m + std::log(acc));  // acc >= 1, the max term contributes 1
  }

  bool log_mode_;
  double scale_;
  double sum_ = 0, comp_ = 0;
  bool saw_pos_inf_ = false, saw_neg_inf_ = false;
  std::vector<double> pos_, neg_;
};

void check_inputs(const Configuration& c, int n_other, const char* what) {
  validate_configuration(c);
  if (c.n() != n_other) throw usage_error(std::string("size mismatch between points and ") + what);
}

}  // namespace

EdgeProbMatrix::EdgeProbMatrix(int n) : n_(n) {
  if (n < 1) throw usage_error("probability matrix needs at least one node");
  probs_.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 0.0);
}

std::size_t EdgeProbMatrix::index(int p, int q) const {
  if (p > q) std::swap(p, q);
  if (p < 0 || q >= n_ || p == q) throw usage_error("pair indices out of range");
  return static_cast<std::size_t>(p) * (2 * n_ - p - 1) / 2 + (q - p - 1);
}

double EdgeProbMatrix::at(int p, int q) const {
  if (p == q) return 0.0;
  return probs_[index(p, q)];
}

void EdgeProbMatrix::set(int p, int q, double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw usage_error("probability outside [0, 1]");
  probs_[index(p, q)] = value;
}

EdgeProbMatrix edge_probabilities(const Configuration& c, const LinkFunction& w) {
  validate_configuration(c);
  const int n = c.n();
  EdgeProbMatrix pi(n);
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q)
      pi.set(p, q, link_eval(w, dist(c.space, c.points[p], c.points[q]), n));
  return pi;
}

LogLik loglik(const Configuration& c, const Graph& g, const LinkFunction& w, LogGuard guard) {
  check_inputs(c, g.n(), "graph");
  const int n = c.n();
  LogLik out;
  double sum = 0, comp = 0;
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const double t = dist(c.space, c.points[p], c.points[q]);
      const PairLogs pl = pair_logs(w, t, n, guard);
      const double term = g.edge(p, q) ? pl.log_w : pl.log_1mw;
      if (std::isinf(term)) {
        out.log_zero = true;
        out.value = -kInf;
        return out;
      }
      const double y = term - comp;
      const double s = sum + y;
      comp = (s - sum) - y;
      sum = s;
    }
  }
  out.value = sum;
  return out;
}

LogLik loglik_norm(const Configuration& c, const Graph& g, const LinkFunction& w,
                   LogGuard guard) {
  check_inputs(c, g.n(), "graph");
  const int n = c.n();
  LogLik out;
  WeightedPairSum acc(n, 1.0);
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const double t = dist(c.space, c.points[p], c.points[q]);
      const PairLogs pl = pair_logs(w, t, n, guard);
      const double term = g.edge(p, q) ? pl.log_w : pl.log_1mw;
      if (std::isinf(term)) out.log_zero = true;
      acc.add(p, q, term);
    }
  }
  out.value = acc.total();
  return out;
}

namespace {

std::vector<Vec> loglik_grad_impl(const Configuration& c, const Graph& g, const LinkFunction& w,
                                  bool weighted) {
  if (w.kind != LinkFunction::Kind::Logistic)
    throw usage_error("likelihood gradient requires the logistic link");
  check_inputs(c, g.n(), "graph");
  const int n = c.n();
  std::vector<Vec> grad(n, Vec::Zero(c.space.dim));
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const double t = dist(c.space, c.points[p], c.points[q]);
      const double wpq = link_eval(w, t, n);
      // d/dt of the pair term G log w + (1-G) log(1-w).
      double coef = w.lambda * (wpq - (g.edge(p, q) ? 1.0 : 0.0));
      if (weighted) coef *= std::exp2(-static_cast<double>(p + q + 2));
      if (coef == 0) continue;
      const DistGrad dg = dist_grad(c.space, c.points[p], c.points[q]);
      grad[p] += coef * dg.at_p;
      grad[q] += coef * dg.at_q;
    }
  }
  return grad;
}

}  // namespace

std::vector<Vec> loglik_grad(const Configuration& c, const Graph& g, const LinkFunction& w) {
  return loglik_grad_impl(c, g, w, false);
}

std::vector<Vec> loglik_norm_grad(const Configuration& c, const Graph& g,
                                  const LinkFunction& w) {
  return loglik_grad_impl(c, g, w, true);
}

double expected_loglik_norm(const Configuration& c, const EdgeProbMatrix& truth,
                            const LinkFunction& w, LogGuard guard) {
  check_inputs(c, truth.n(), "probability matrix");
  const int n = c.n();
  WeightedPairSum acc(n, 1.0);
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const double t = dist(c.space, c.points[p], c.points[q]);
      const PairLogs pl = pair_logs(w, t, n, guard);
      const double star = truth.at(p, q);
      if (star > 0) acc.add(p, q, star * pl.log_w);
      if (star < 1) acc.add(p, q, (1.0 - star) * pl.log_1mw);
    }
  }
  return acc.total();
}

namespace {

double bernoulli_entropy(double p) {
  double h = 0;
  if (p > 0) h -= p * std::log(p);
  if (p < 1) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

double bernoulli_kl(double p, double q) {
  double d = 0;
  if (p > 0) d += q > 0 ? p * std::log(p / q) : kInf;
  if (p < 1) d += q < 1 ? (1.0 - p) * (std::log1p(-p) - std::log1p(-q)) : kInf;
  return d;
}

}  // namespace

EntropyKl entropy_kl_decompose(const EdgeProbMatrix& pi_star, const EdgeProbMatrix& pi) {
  if (pi_star.n() != pi.n()) throw usage_error("probability matrices differ in size");
  const int n = pi_star.n();
  WeightedPairSum entropy(n, 1.0), kl(n, 1.0);
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      entropy.add(p, q, bernoulli_entropy(pi_star.at(p, q)));
      kl.add(p, q, bernoulli_kl(pi_star.at(p, q), pi.at(p, q)));
    }
  }
  return {entropy.total(), kl.total()};
}

}  // namespace cls
