#include "cls/link_model.hpp"

#include <cmath>

#include "cls/random.hpp"

namespace cls {

LinkFunction LinkFunction::logistic(double lambda) {
  if (!(lambda > 0)) throw usage_error("logistic steepness must be positive");
  return {Kind::Logistic, lambda};
}

namespace {
void check_link_args(double t, int n) {
  if (!(t >= 0)) throw domain_error("distance must be non-negative");
  if (n < 1) throw usage_error("graph size must be >= 1");
}
}  // namespace

double link_eval(const LinkFunction& w, double t, int n) {
  check_link_args(t, n);
  const double log_n = std::log(static_cast<double>(n));
  if (w.kind == LinkFunction::Kind::HardThreshold) return t <= log_n ? 1.0 : 0.0;
  const double a = w.lambda * (t - log_n);
  if (a > 0) {
    const double e = std::exp(-a);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(a));
}

double link_logit(const LinkFunction& w, double t, int n) {
  check_link_args(t, n);
  if (w.kind == LinkFunction::Kind::HardThreshold)
    throw unbounded_logit_error("hard threshold link has no finite logit");
  return w.lambda * (std::log(static_cast<double>(n)) - t);
}

double logit_bound(const LinkFunction& w, int n, double t_max) {
  if (n < 1) throw usage_error("graph size must be >= 1");
  if (!(t_max >= 0)) throw usage_error("t_max must be non-negative");
  if (w.kind == LinkFunction::Kind::HardThreshold)
    throw unbounded_logit_error("hard threshold link has no finite logit");
  const double log_n = std::log(static_cast<double>(n));
  return w.lambda * std::max(log_n, std::abs(log_n - t_max));
}

LogitBoundDiagnostic logit_bound_growth(const LinkFunction& w, double t_max, int n_max) {
  if (n_max < 2) throw usage_error("n_max must be >= 2");
  LogitBoundDiagnostic diag;
  diag.values.reserve(n_max - 1);
  for (int n = 2; n <= n_max; ++n) {
    const double v = logit_bound(w, n, t_max);
    diag.values.push_back(v * v * std::pow(static_cast<double>(n), 3));
  }
  // Vanishing means the tail keeps shrinking and has become small relative
  // to the start of the sequence.
  bool tail_decreasing = true;
  for (std::size_t i = diag.values.size() / 2; i + 1 < diag.values.size(); ++i)
    if (diag.values[i + 1] >= diag.values[i]) tail_decreasing = false;
  diag.vanishing =
      tail_decreasing && diag.values.back() < 1e-2 * diag.values.front();
  return diag;
}

Graph::Graph(int n) : n_(n) {
  if (n < 1) throw usage_error("graph must have at least one node");
  bits_.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 0);
}

std::size_t Graph::index(int p, int q) const {
  if (p > q) std::swap(p, q);
  if (p < 0 || q >= n_ || p == q) throw usage_error("edge endpoints out of range");
  return static_cast<std::size_t>(p) * (2 * n_ - p - 1) / 2 + (q - p - 1);
}

bool Graph::edge(int p, int q) const { return bits_[index(p, q)] != 0; }

void Graph::set_edge(int p, int q, bool present) { bits_[index(p, q)] = present ? 1 : 0; }

int Graph::edge_count() const {
  int count = 0;
  for (std::uint8_t b : bits_) count += b;
  return count;
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edge_count());
  for (int p = 0; p < n_; ++p)
    for (int q = p + 1; q < n_; ++q)
      if (edge(p, q)) out.emplace_back(p, q);
  return out;
}

Graph generate_graph(const Configuration& c, const LinkFunction& w, std::uint64_t seed) {
  validate_configuration(c);
  const int n = c.n();
  Graph g(n);
  std::uint64_t pair_index = 0;
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q, ++pair_index) {
      const double prob = link_eval(w, dist(c.space, c.points[p], c.points[q]), n);
      std::uint64_t state = substream(seed, pair_index);
      g.set_edge(p, q, uniform01(splitmix64(state)) < prob);
    }
  }
  return g;
}

GraphSample generate_graph_iid(const NodeDensity& f, int n, const LinkFunction& w,
                               std::uint64_t seed) {
  GraphSample s{sample_density(f, n, substream(seed, 0)), Graph(n)};
  s.graph = generate_graph(s.config, w, substream(seed, 1));
  return s;
}

}  // namespace cls
