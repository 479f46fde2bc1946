#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cls/geometry.hpp"

namespace cls {

// Edge probability as a function of latent distance, at the ln(n) scale that
// keeps a growing graph's geometry readable from its edges.
struct LinkFunction {
  enum class Kind { HardThreshold, Logistic };
  Kind kind = Kind::Logistic;
  double lambda = 1;  // logistic steepness; unused for the threshold link

  static LinkFunction hard_threshold() { return {Kind::HardThreshold, 0}; }
  static LinkFunction logistic(double lambda);
};

// w_n(t): probability of an edge between nodes at distance t in an n-node graph.
double link_eval(const LinkFunction& w, double t, int n);

// log(w / (1 - w)) evaluated stably; throws unbounded_logit_error for the
// hard threshold link.
double link_logit(const LinkFunction& w, double t, int n);

// sup over t in [0, t_max] of |link_logit(w, t, n)|.
double logit_bound(const LinkFunction& w, int n, double t_max);

// Diagnostic for the uniform concentration regime: reports v_n^2 n^3 for
// n = 2..n_max at a fixed t_max and whether the sequence tends to zero.
struct LogitBoundDiagnostic {
  std::vector<double> values;
  bool vanishing = false;
};
LogitBoundDiagnostic logit_bound_growth(const LinkFunction& w, double t_max, int n_max);

// Simple undirected graph on nodes 0..n-1, stored as the upper triangle.
class Graph {
public:
  Graph() = default;
  explicit Graph(int n);

  int n() const { return n_; }
  bool edge(int p, int q) const;
  void set_edge(int p, int q, bool present);
  int edge_count() const;
  std::vector<std::pair<int, int>> edges() const;  // sorted (p < q)

  bool operator==(const Graph& o) const { return n_ == o.n_ && bits_ == o.bits_; }

private:
  int n_ = 0;
  std::vector<std::uint8_t> bits_;
  std::size_t index(int p, int q) const;
};

// Conditionally independent edges given locations; pair (p, q) uses its own
// substream of `seed`, so the draw is independent of evaluation order.
Graph generate_graph(const Configuration& c, const LinkFunction& w, std::uint64_t seed);

struct GraphSample {
  Configuration config;
  Graph graph;
};

// Sample n locations i.i.d. from f, then edges. Two substreams of `seed`.
GraphSample generate_graph_iid(const NodeDensity& f, int n, const LinkFunction& w,
                               std::uint64_t seed);

}  // namespace cls
