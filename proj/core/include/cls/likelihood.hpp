#pragma once

#include <vector>

#include "cls/geometry.hpp"
#include "cls/link_model.hpp"

namespace cls {

// Symmetric matrix of edge probabilities with a zero diagonal.
class EdgeProbMatrix {
public:
  EdgeProbMatrix() = default;
  explicit EdgeProbMatrix(int n);

  int n() const { return n_; }
  double at(int p, int q) const;
  void set(int p, int q, double value);

private:
  int n_ = 0;
  std::vector<double> probs_;  // upper triangle
  std::size_t index(int p, int q) const;
};

EdgeProbMatrix edge_probabilities(const Configuration& c, const LinkFunction& w);

// Log-space path: probabilities are clamped to [1e-300, 1 - 1e-16] before
// taking logs only when the caller asks for it (optimizers do; reporting
// code usually should not).
enum class LogGuard { Unguarded, Clamped };

struct LogLik {
  double value = 0;
  // True when an observed indicator contradicted a degenerate probability,
  // making the unguarded value -inf.
  bool log_zero = false;
};

// Sum over unordered pairs of G_pq log w + (1 - G_pq) log(1 - w).
LogLik loglik(const Configuration& c, const Graph& g, const LinkFunction& w,
              LogGuard guard = LogGuard::Unguarded);

// Same summands weighted by 2^-(p+q) with 1-based indices p < q. The weights
// make the sum a.s. convergent as n grows, at the price of depending on node
// order; callers must keep input order fixed.
LogLik loglik_norm(const Configuration& c, const Graph& g, const LinkFunction& w,
                   LogGuard guard = LogGuard::Unguarded);

// Riemannian gradients with respect to each location. Logistic link only.
std::vector<Vec> loglik_grad(const Configuration& c, const Graph& g, const LinkFunction& w);
std::vector<Vec> loglik_norm_grad(const Configuration& c, const Graph& g,
                                  const LinkFunction& w);

// Expectation of loglik_norm under edge probabilities `truth`, evaluated at
// the model probabilities induced by (c, w).
double expected_loglik_norm(const Configuration& c, const EdgeProbMatrix& truth,
                            const LinkFunction& w, LogGuard guard = LogGuard::Unguarded);

// Weighted Bernoulli entropy of pi_star and KL divergence of pi from pi_star,
// with the same 2^-(p+q) pair weights. Satisfies
//   -expected_loglik_norm = entropy + kl   (pi from the same c, w).
struct EntropyKl {
  double entropy = 0;
  double kl = 0;
};
EntropyKl entropy_kl_decompose(const EdgeProbMatrix& pi_star, const EdgeProbMatrix& pi);

}  // namespace cls
