#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cls/alignment.hpp"
#include "cls/density_estimation.hpp"
#include "cls/embedding.hpp"
#include "cls/geometry.hpp"
#include "cls/likelihood.hpp"
#include "cls/link_model.hpp"

namespace cls {

struct ExperimentSpec {
  std::string kind;  // embed-consistency | density-consistency | graph-consistency
                     // | concentration | misspecified
  LatentSpace space = LatentSpace::euclidean(2);
  LinkFunction link = LinkFunction::logistic(2.0);
  NodeDensity density = NodeDensity::standard_gaussian(2);
  std::vector<int> n_grid = {20, 50, 100, 200};
  int replicates = 20;
  std::uint64_t seed = 1;
  EmbedOptions optimizer = default_experiment_optimizer();
  double kde_bandwidth = 0;  // 0 = default rule
  GridSpec grid;
  int graph_m = 4;     // node count for graph-law comparisons
  int draws = 10000;   // Monte-Carlo draws per distribution estimate
  std::vector<double> eps_list;  // concentration thresholds; empty = auto
  double sbm_p_in = 0.8;
  double sbm_p_out = 0.1;
  double max_failure_fraction = 0.2;
  int threads = 0;  // 0 = hardware concurrency

  static EmbedOptions default_experiment_optimizer();
};

struct ReplicateRecord {
  int n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string message;
  // Metric name -> value; the set of names is fixed per experiment kind.
  std::map<std::string, double> values;
};

struct SummaryRow {
  int n = 0;
  std::string metric;
  int count = 0;
  double mean = 0, median = 0, q25 = 0, q75 = 0;
};

struct ExperimentResult {
  std::string kind;
  std::uint64_t seed = 0;
  std::vector<ReplicateRecord> records;
  std::vector<SummaryRow> summary;
  bool failed = false;  // more than max_failure_fraction replicates failed
  std::string failure_reason;
  std::vector<std::string> notes;
};

ExperimentResult run_embed_consistency(const ExperimentSpec& spec);
ExperimentResult run_density_consistency(const ExperimentSpec& spec);
ExperimentResult run_graph_consistency(const ExperimentSpec& spec);
ExperimentResult run_concentration(const ExperimentSpec& spec);
ExperimentResult run_misspecified(const ExperimentSpec& spec);

// Dispatch on spec.kind.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// records.csv, summary.csv and manifest.json under out_dir. Deterministic
// byte-for-byte for a fixed result.
void write_experiment_result(const ExperimentSpec& spec, const ExperimentResult& result,
                             const std::string& out_dir);

ExperimentSpec experiment_spec_from_json(const std::string& text);
std::string experiment_spec_to_json(const ExperimentSpec& spec);

// Median and quartiles (linear interpolation); used for the summary tables.
double quantile(std::vector<double> values, double q);

// Total variation distance between empirical distributions of canonical
// m-node graph types (isomorphism classes), each estimated from `draws`
// samples of G(f, w_m). Requires m <= 6.
double graph_type_tv(const NodeDensity& f, const NodeDensity& g, int m,
                     const LinkFunction& w, int draws, std::uint64_t seed);

// Map an m-node graph to its isomorphism class id (canonical adjacency mask).
int graph_type_class(const Graph& g);

}  // namespace cls
