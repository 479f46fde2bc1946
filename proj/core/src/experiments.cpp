#include "cls/experiments.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "cls/errors.hpp"
#include "cls/random.hpp"
#include "cls/serialization.hpp"
#include "cls/theory_bounds.hpp"

namespace cls {

using nlohmann::json;

EmbedOptions ExperimentSpec::default_experiment_optimizer() {
  EmbedOptions o;
  o.restarts = 2;
  o.max_iters = 400;
  o.grad_tol = 1e-5;
  o.stall_iters = 25;
  o.stall_tol = 1e-6;
  return o;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw usage_error("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw usage_error("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - lo;
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

namespace {

struct Task {
  int n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
};

// One substream per (n, replicate) cell, indexed by a flat counter, so results
// do not depend on scheduling.
std::vector<Task> make_tasks(const ExperimentSpec& spec) {
  if (spec.n_grid.empty()) throw usage_error("empty n grid");
  if (spec.replicates < 1) throw usage_error("need at least one replicate");
  std::vector<Task> tasks;
  tasks.reserve(spec.n_grid.size() * spec.replicates);
  std::uint64_t counter = 0;
  int prev = 0;
  for (int n : spec.n_grid) {
    if (n < 1) throw usage_error("grid sizes must be at least 1");
    if (n <= prev) throw usage_error("n grid must be strictly increasing");
    prev = n;
    for (int r = 0; r < spec.replicates; ++r, ++counter)
      tasks.push_back({n, r, substream(spec.seed, counter)});
  }
  return tasks;
}

template <typename Fn>
void parallel_for(int threads, std::size_t count, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  const int k = std::min<int>(threads, static_cast<int>(count));
  pool.reserve(k);
  for (int t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

int thread_count(const ExperimentSpec& spec) {
  if (spec.threads > 0) return spec.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

using ReplicateFn = std::function<void(const Task&, ReplicateRecord&)>;

void run_replicates(const ExperimentSpec& spec, const std::vector<Task>& tasks,
                    ExperimentResult& result, const ReplicateFn& fn) {
  result.records.resize(tasks.size());
  parallel_for(thread_count(spec), tasks.size(), [&](std::size_t i) {
    ReplicateRecord& rec = result.records[i];
    rec.n = tasks[i].n;
    rec.replicate = tasks[i].replicate;
    rec.seed = tasks[i].seed;
    try {
      fn(tasks[i], rec);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.message = e.what();
    }
  });
}

// Failure accounting and per-(n, metric) summary rows.
void finalize(const ExperimentSpec& spec, ExperimentResult& result) {
  int failed = 0;
  for (const auto& rec : result.records)
    if (rec.failed) ++failed;
  if (failed > spec.max_failure_fraction * result.records.size()) {
    result.failed = true;
    std::ostringstream reason;
    reason << failed << " of " << result.records.size() << " replicates failed";
    result.failure_reason = reason.str();
  }
  for (int n : spec.n_grid) {
    std::set<std::string> metrics;
    for (const auto& rec : result.records)
      if (rec.n == n && !rec.failed)
        for (const auto& [name, value] : rec.values) metrics.insert(name);
    for (const auto& name : metrics) {
      std::vector<double> vals;
      for (const auto& rec : result.records) {
        if (rec.n != n || rec.failed) continue;
        const auto it = rec.values.find(name);
        if (it != rec.values.end()) vals.push_back(it->second);
      }
      if (vals.empty()) continue;
      SummaryRow row;
      row.n = n;
      row.metric = name;
      row.count = static_cast<int>(vals.size());
      double sum = 0;
      for (double v : vals) sum += v;
      row.mean = sum / vals.size();
      row.median = quantile(vals, 0.5);
      row.q25 = quantile(vals, 0.25);
      row.q75 = quantile(vals, 0.75);
      result.summary.push_back(std::move(row));
    }
  }
}

void check_model_spec(const ExperimentSpec& spec) {
  if (spec.density.space != spec.space)
    throw usage_error("density space does not match the experiment space");
  if (spec.link.kind == LinkFunction::Kind::HardThreshold)
    throw usage_error("experiments need a logistic link");
}

double mean_pairwise_block_dist(const Configuration& c, bool same_block) {
  const int n = c.n();
  const int half = n / 2;
  double sum = 0;
  int count = 0;
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const bool same = (p < half) == (q < half);
      if (same != same_block) continue;
      sum += dist(c.space, c.points[p], c.points[q]);
      ++count;
    }
  }
  return count ? sum / count : 0.0;
}

Graph sbm_graph(int n, double p_in, double p_out, std::uint64_t seed) {
  Graph g(n);
  const int half = n / 2;
  std::uint64_t pair_index = 0;
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q, ++pair_index) {
      const double prob = ((p < half) == (q < half)) ? p_in : p_out;
      std::uint64_t state = substream(seed, pair_index);
      g.set_edge(p, q, uniform01(splitmix64(state)) < prob);
    }
  }
  return g;
}

// Denominator of the pair-weighted deviation bound at configuration c:
// sum over 1-based pairs p < q of 4^-(p+q) logit(dist_pq)^2.
double pair_logit_denom(const Configuration& c, const LinkFunction& w) {
  double sum = 0;
  for (int p = 0; p < c.n(); ++p) {
    for (int q = p + 1; q < c.n(); ++q) {
      const double l = link_logit(w, dist(c.space, c.points[p], c.points[q]), c.n());
      sum += std::exp2(-2.0 * (p + q + 2)) * l * l;
    }
  }
  return sum;
}

std::map<int, int> graph_type_counts(const NodeDensity& f, int m, const LinkFunction& w,
                                     int draws, std::uint64_t seed) {
  std::map<int, int> counts;
  for (int i = 0; i < draws; ++i) {
    const GraphSample s = generate_graph_iid(f, m, w, substream(seed, i));
    ++counts[graph_type_class(s.graph)];
  }
  return counts;
}

double counts_tv(const std::map<int, int>& a, const std::map<int, int>& b, int draws_a,
                 int draws_b) {
  std::set<int> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  double tv = 0;
  for (int k : keys) {
    const auto ia = a.find(k);
    const auto ib = b.find(k);
    const double pa = ia == a.end() ? 0.0 : static_cast<double>(ia->second) / draws_a;
    const double pb = ib == b.end() ? 0.0 : static_cast<double>(ib->second) / draws_b;
    tv += std::abs(pa - pb);
  }
  return 0.5 * tv;
}

}  // namespace

int graph_type_class(const Graph& g) {
  const int m = g.n();
  if (m < 1 || m > 6) throw usage_error("graph type classes are tabulated for 1..6 nodes");
  const int bits = m * (m - 1) / 2;

  // Pair (p, q), p < q, gets bit p*m - p*(p+3)/2 + q - 1 (row-major order).
  auto pair_bit = [m](int p, int q) { return p * m - p * (p + 3) / 2 + q - 1; };

  int mask = 0;
  for (const auto& [p, q] : g.edges()) mask |= 1 << pair_bit(p, q);

  struct Table {
    std::vector<std::vector<int>> perm_bits;  // per permutation: bit -> bit
    std::vector<int> canon;                   // mask -> canonical mask, -1 unset
  };
  static std::mutex mu;
  static std::map<int, Table> tables;
  std::lock_guard<std::mutex> lock(mu);
  Table& table = tables[m];
  if (table.perm_bits.empty()) {
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    do {
      std::vector<int> map(bits);
      for (int p = 0; p < m; ++p)
        for (int q = p + 1; q < m; ++q) {
          const int a = std::min(perm[p], perm[q]);
          const int b = std::max(perm[p], perm[q]);
          map[pair_bit(p, q)] = pair_bit(a, b);
        }
      table.perm_bits.push_back(std::move(map));
    } while (std::next_permutation(perm.begin(), perm.end()));
    table.canon.assign(1 << bits, -1);
  }
  if (table.canon[mask] >= 0) return table.canon[mask];

  // Walk the isomorphism orbit once and memoize every member.
  int canonical = mask;
  std::vector<int> orbit;
  orbit.reserve(table.perm_bits.size());
  for (const auto& map : table.perm_bits) {
    int image = 0;
    for (int b = 0; b < bits; ++b)
      if (mask & (1 << b)) image |= 1 << map[b];
    canonical = std::min(canonical, image);
    orbit.push_back(image);
  }
  for (int image : orbit) table.canon[image] = canonical;
  return canonical;
}

double graph_type_tv(const NodeDensity& f, const NodeDensity& g, int m,
                     const LinkFunction& w, int draws, std::uint64_t seed) {
  if (draws < 1) throw usage_error("need at least one draw");
  const auto ca = graph_type_counts(f, m, w, draws, substream(seed, 0));
  const auto cb = graph_type_counts(g, m, w, draws, substream(seed, 1));
  return counts_tv(ca, cb, draws, draws);
}

ExperimentResult run_embed_consistency(const ExperimentSpec& spec) {
  check_model_spec(spec);
  const auto tasks = make_tasks(spec);
  ExperimentResult result;
  result.kind = "embed-consistency";
  result.seed = spec.seed;
  AlignOptions align_opts;
  run_replicates(spec, tasks, result, [&](const Task& t, ReplicateRecord& rec) {
    const GraphSample s = generate_graph_iid(spec.density, t.n, spec.link, substream(t.seed, 0));
    const EmbeddingResult est =
        mle_embed(s.graph, spec.space, spec.link, substream(t.seed, 1), spec.optimizer);
    const AlignmentResult al = align_configs(s.config, est.estimate, align_opts);
    rec.values["align_error"] = al.dist_class / t.n;
    rec.values["objective"] = est.objective;
    rec.values["loglik_gap"] =
        est.objective - loglik(s.config, s.graph, spec.link, LogGuard::Clamped).value;
    rec.values["iterations"] = est.iterations;
    rec.values["converged"] = est.converged ? 1.0 : 0.0;
    rec.values["boundary"] = est.boundary_hit ? 1.0 : 0.0;
  });
  finalize(spec, result);
  return result;
}

ExperimentResult run_density_consistency(const ExperimentSpec& spec) {
  check_model_spec(spec);
  const auto tasks = make_tasks(spec);
  ExperimentResult result;
  result.kind = "density-consistency";
  result.seed = spec.seed;
  AlignOptions align_opts;
  run_replicates(spec, tasks, result, [&](const Task& t, ReplicateRecord& rec) {
    const GraphSample s = generate_graph_iid(spec.density, t.n, spec.link, substream(t.seed, 0));
    const EmbeddingResult est =
        mle_embed(s.graph, spec.space, spec.link, substream(t.seed, 1), spec.optimizer);
    const NodeDensity fhat = kde(est.estimate, spec.kde_bandwidth);
    const DensityAlignment da = density_class_distance(fhat, spec.density, spec.grid, align_opts);
    rec.values["density_l2"] = da.distance;
    rec.values["bandwidth"] = std::get<KdeEstimate>(fhat.kind).bandwidth;
    rec.values["objective"] = est.objective;
    // Control arm: the same estimator fed the true locations isolates how
    // much of the error is embedding noise rather than estimation noise.
    const NodeDensity oracle = kde(s.config, spec.kde_bandwidth);
    rec.values["density_l2_oracle"] =
        density_class_distance(oracle, spec.density, spec.grid, align_opts).distance;
  });
  finalize(spec, result);
  return result;
}

ExperimentResult run_graph_consistency(const ExperimentSpec& spec) {
  check_model_spec(spec);
  const auto tasks = make_tasks(spec);
  ExperimentResult result;
  result.kind = "graph-consistency";
  result.seed = spec.seed;
  // The law of the truth's m-node graph does not depend on n or the
  // replicate, so estimate its type histogram once.
  const auto truth_counts = graph_type_counts(spec.density, spec.graph_m, spec.link,
                                              spec.draws, substream(spec.seed, 0x6af));
  run_replicates(spec, tasks, result, [&](const Task& t, ReplicateRecord& rec) {
    const GraphSample s = generate_graph_iid(spec.density, t.n, spec.link, substream(t.seed, 0));
    const EmbeddingResult est =
        mle_embed(s.graph, spec.space, spec.link, substream(t.seed, 1), spec.optimizer);
    const NodeDensity fhat = kde(est.estimate, spec.kde_bandwidth);
    const auto est_counts =
        graph_type_counts(fhat, spec.graph_m, spec.link, spec.draws, substream(t.seed, 7));
    rec.values["graph_tv"] = counts_tv(est_counts, truth_counts, spec.draws, spec.draws);
    rec.values["objective"] = est.objective;
  });
  finalize(spec, result);
  return result;
}

ExperimentResult run_concentration(const ExperimentSpec& spec) {
  check_model_spec(spec);
  const auto tasks = make_tasks(spec);
  ExperimentResult result;
  result.kind = "concentration";
  result.seed = spec.seed;
  // The deviation bound conditions on the locations, so fix one configuration
  // per n and let only the edges vary across replicates.
  std::map<int, Configuration> configs;
  {
    std::uint64_t idx = 0;
    for (int n : spec.n_grid) {
      configs.emplace(n, sample_density(spec.density, n, substream(spec.seed, 0xc0ffee + idx)));
      ++idx;
    }
  }
  run_replicates(spec, tasks, result, [&](const Task& t, ReplicateRecord& rec) {
    const Configuration& c = configs.at(t.n);
    const Graph g = generate_graph(c, spec.link, substream(t.seed, 0));
    rec.values["lnorm"] = loglik_norm(c, g, spec.link).value;
  });
  // Tail frequencies of the pair-weighted statistic around its exact
  // conditional mean, against both deviation bounds; thresholds default to
  // multiples of the pair bound's own sub-Gaussian scale.
  for (int n : spec.n_grid) {
    if (n < 2) continue;  // the statistic is deterministic
    std::vector<ReplicateRecord*> recs;
    for (auto& rec : result.records)
      if (rec.n == n && !rec.failed) recs.push_back(&rec);
    if (recs.empty()) continue;
    const Configuration& c = configs.at(n);
    const double mean = expected_loglik_norm(c, edge_probabilities(c, spec.link), spec.link);
    const double denom = pair_logit_denom(c, spec.link);
    double diameter = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q)
        diameter = std::max(diameter, dist(c.space, c.points[p], c.points[q]));
    const double v = logit_bound(spec.link, n, diameter);
    std::vector<double> eps = spec.eps_list;
    if (eps.empty())
      for (double s : {0.83, 1.5, 2.5}) eps.push_back(s * std::sqrt(denom));
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const BoundValue pair_bound = mcdiarmid_pair_bound(c, spec.link, eps[k]);
      const BoundValue unif_bound = mcdiarmid_uniform_bound(n, v, eps[k]);
      for (auto* rec : recs) {
        const double dev = std::abs(rec->values.at("lnorm") - mean);
        rec->values["dev"] = dev;
        rec->values["eps" + std::to_string(k)] = eps[k];
        rec->values["exceed" + std::to_string(k)] = dev > eps[k] ? 1.0 : 0.0;
        rec->values["bound" + std::to_string(k)] = pair_bound.clipped;
        rec->values["ubound" + std::to_string(k)] = unif_bound.clipped;
      }
    }
  }
  finalize(spec, result);
  return result;
}

ExperimentResult run_misspecified(const ExperimentSpec& spec) {
  if (spec.link.kind == LinkFunction::Kind::HardThreshold)
    throw usage_error("experiments need a logistic link");
  const auto tasks = make_tasks(spec);
  ExperimentResult result;
  result.kind = "misspecified";
  result.seed = spec.seed;
  std::vector<std::optional<Configuration>> estimates(tasks.size());
  run_replicates(spec, tasks, result, [&](const Task& t, ReplicateRecord& rec) {
    const Graph g = sbm_graph(t.n, spec.sbm_p_in, spec.sbm_p_out, substream(t.seed, 0));
    const EmbeddingResult est =
        mle_embed(g, spec.space, spec.link, substream(t.seed, 1), spec.optimizer);
    rec.values["objective"] = est.objective;
    if (t.n >= 2)
      rec.values["block_ratio"] = mean_pairwise_block_dist(est.estimate, true) /
                                  mean_pairwise_block_dist(est.estimate, false);
    rec.values["converged"] = est.converged ? 1.0 : 0.0;
    const std::size_t idx = (&rec - result.records.data());
    estimates[idx] = est.estimate;
  });
  // Stability: class distance between successive replicate estimates at the
  // same n, per node.
  AlignOptions align_opts;
  for (std::size_t i = 1; i < tasks.size(); ++i) {
    if (tasks[i].n != tasks[i - 1].n) continue;
    if (!estimates[i] || !estimates[i - 1]) continue;
    const AlignmentResult al = align_configs(*estimates[i - 1], *estimates[i], align_opts);
    result.records[i].values["stability"] = al.dist_class / tasks[i].n;
  }
  finalize(spec, result);
  return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.kind == "embed-consistency") return run_embed_consistency(spec);
  if (spec.kind == "density-consistency") return run_density_consistency(spec);
  if (spec.kind == "graph-consistency") return run_graph_consistency(spec);
  if (spec.kind == "concentration") return run_concentration(spec);
  if (spec.kind == "misspecified") return run_misspecified(spec);
  throw usage_error(
      "unknown experiment kind '" + spec.kind +
      "'; expected embed-consistency, density-consistency, graph-consistency, "
      "concentration or misspecified");
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

json space_to_json(const LatentSpace& s) {
  return {{"kind", s.kind == SpaceKind::Euclidean ? "euclidean" : "half_plane"},
          {"dim", s.dim}};
}

LatentSpace space_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "euclidean") return LatentSpace::euclidean(j.at("dim").get<int>());
  if (kind == "half_plane") return LatentSpace::half_plane();
  throw usage_error("unknown space kind: " + kind);
}

json link_to_json(const LinkFunction& w) {
  if (w.kind == LinkFunction::Kind::HardThreshold) return {{"kind", "hard_threshold"}};
  return {{"kind", "logistic"}, {"lambda", w.lambda}};
}

LinkFunction link_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "hard_threshold") return LinkFunction::hard_threshold();
  if (kind == "logistic") return LinkFunction::logistic(j.at("lambda").get<double>());
  throw usage_error("unknown link kind: " + kind);
}

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vec vec_from_json(const json& j) {
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json optimizer_to_json(const EmbedOptions& o) {
  return {{"restarts", o.restarts},
          {"max_iters", o.max_iters},
          {"step0", o.step0},
          {"grad_tol", o.grad_tol},
          {"t_max", o.t_max},
          {"mds_first", o.mds_first},
          {"stall_iters", o.stall_iters},
          {"stall_tol", o.stall_tol},
          {"parallel_restarts", o.parallel_restarts}};
}

EmbedOptions optimizer_from_json(const json& j) {
  EmbedOptions o = ExperimentSpec::default_experiment_optimizer();
  if (j.contains("restarts")) o.restarts = j["restarts"].get<int>();
  if (j.contains("max_iters")) o.max_iters = j["max_iters"].get<int>();
  if (j.contains("step0")) o.step0 = j["step0"].get<double>();
  if (j.contains("grad_tol")) o.grad_tol = j["grad_tol"].get<double>();
  if (j.contains("t_max")) o.t_max = j["t_max"].get<double>();
  if (j.contains("mds_first")) o.mds_first = j["mds_first"].get<bool>();
  if (j.contains("stall_iters")) o.stall_iters = j["stall_iters"].get<int>();
  if (j.contains("stall_tol")) o.stall_tol = j["stall_tol"].get<double>();
  if (j.contains("parallel_restarts")) o.parallel_restarts = j["parallel_restarts"].get<bool>();
  return o;
}

}  // namespace

std::string experiment_spec_to_json(const ExperimentSpec& spec) {
  json j;
  j["kind"] = spec.kind;
  j["space"] = space_to_json(spec.space);
  j["link"] = link_to_json(spec.link);
  j["density"] = json::parse(density_to_json(spec.density));
  j["n_grid"] = spec.n_grid;
  j["replicates"] = spec.replicates;
  j["seed"] = spec.seed;
  j["optimizer"] = optimizer_to_json(spec.optimizer);
  j["kde_bandwidth"] = spec.kde_bandwidth;
  j["grid"] = {{"radius", spec.grid.radius},
               {"points_per_axis", spec.grid.points_per_axis},
               {"center", vec_to_json(spec.grid.center)}};
  j["graph_m"] = spec.graph_m;
  j["draws"] = spec.draws;
  j["eps_list"] = spec.eps_list;
  j["sbm_p_in"] = spec.sbm_p_in;
  j["sbm_p_out"] = spec.sbm_p_out;
  j["max_failure_fraction"] = spec.max_failure_fraction;
  j["threads"] = spec.threads;
  return j.dump(2) + "\n";
}

ExperimentSpec experiment_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw usage_error(std::string("bad JSON: ") + e.what());
  }
  try {
    ExperimentSpec spec;
    spec.kind = j.at("kind").get<std::string>();
    if (j.contains("space")) spec.space = space_from_json(j["space"]);
    if (j.contains("link")) spec.link = link_from_json(j["link"]);
    if (j.contains("density")) {
      spec.density = density_from_json(j["density"].dump());
    } else if (spec.space.kind == SpaceKind::Euclidean) {
      spec.density = NodeDensity::standard_gaussian(spec.space.dim);
    } else {
      spec.density = NodeDensity::hyper_gaussian(base_point(spec.space), 1.0);
    }
    if (j.contains("n_grid")) spec.n_grid = j["n_grid"].get<std::vector<int>>();
    if (j.contains("replicates")) spec.replicates = j["replicates"].get<int>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("optimizer")) spec.optimizer = optimizer_from_json(j["optimizer"]);
    if (j.contains("kde_bandwidth")) spec.kde_bandwidth = j["kde_bandwidth"].get<double>();
    if (j.contains("grid")) {
      const json& jg = j["grid"];
      if (jg.contains("radius")) spec.grid.radius = jg["radius"].get<double>();
      if (jg.contains("points_per_axis"))
        spec.grid.points_per_axis = jg["points_per_axis"].get<int>();
      if (jg.contains("center")) spec.grid.center = vec_from_json(jg["center"]);
    }
    if (j.contains("graph_m")) spec.graph_m = j["graph_m"].get<int>();
    if (j.contains("draws")) spec.draws = j["draws"].get<int>();
    if (j.contains("eps_list")) spec.eps_list = j["eps_list"].get<std::vector<double>>();
    if (j.contains("sbm_p_in")) spec.sbm_p_in = j["sbm_p_in"].get<double>();
    if (j.contains("sbm_p_out")) spec.sbm_p_out = j["sbm_p_out"].get<double>();
    if (j.contains("max_failure_fraction"))
      spec.max_failure_fraction = j["max_failure_fraction"].get<double>();
    if (j.contains("threads")) spec.threads = j["threads"].get<int>();
    return spec;
  } catch (const json::exception& e) {
    throw usage_error(std::string("bad experiment spec: ") + e.what());
  }
}

void write_experiment_result(const ExperimentSpec& spec, const ExperimentResult& result,
                             const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);

  std::set<std::string> metric_set;
  for (const auto& rec : result.records)
    for (const auto& [name, value] : rec.values) metric_set.insert(name);
  std::vector<std::string> metrics(metric_set.begin(), metric_set.end());

  std::ostringstream records;
  records << "n,replicate,seed,failed,message";
  for (const auto& name : metrics) records << ',' << name;
  records << '\n';
  for (const auto& rec : result.records) {
    records << rec.n << ',' << rec.replicate << ',' << rec.seed << ','
            << (rec.failed ? 1 : 0) << ',' << csv_quote(rec.message);
    for (const auto& name : metrics) {
      records << ',';
      const auto it = rec.values.find(name);
      if (it != rec.values.end()) records << format_double(it->second);
    }
    records << '\n';
  }
  write_text_file(out_dir + "/records.csv", records.str());

  std::ostringstream summary;
  summary << "n,metric,count,mean,median,q25,q75\n";
  for (const auto& row : result.summary) {
    summary << row.n << ',' << row.metric << ',' << row.count << ','
            << format_double(row.mean) << ',' << format_double(row.median) << ','
            << format_double(row.q25) << ',' << format_double(row.q75) << '\n';
  }
  write_text_file(out_dir + "/summary.csv", summary.str());

  json manifest;
  manifest["kind"] = result.kind;
  manifest["seed"] = result.seed;
  manifest["spec"] = json::parse(experiment_spec_to_json(spec));
  manifest["failed"] = result.failed;
  manifest["failure_reason"] = result.failure_reason;
  manifest["notes"] = result.notes;
  manifest["records"] = result.records.size();
  int failed_records = 0;
  for (const auto& rec : result.records)
    if (rec.failed) ++failed_records;
  manifest["failed_records"] = failed_records;
  write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

}  // namespace cls
