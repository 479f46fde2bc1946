// Command line front end: sample graphs from the latent model, embed observed
// graphs, align and compare configurations and densities, evaluate the
// deviation-bound calculators, and drive the replicated experiments.
//
// Exit codes: 0 success, 1 bad usage or input, 2 experiment failed its
// replicate-failure threshold, 3 runtime failure (sampling, optimization).

#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <iostream>

#include "cls/cls.hpp"

namespace {

using nlohmann::json;
using namespace cls;

LatentSpace make_space(const std::string& name, int dim) {
  if (name == "euclidean") return LatentSpace::euclidean(dim);
  if (name == "half-plane" || name == "half_plane") return LatentSpace::half_plane();
  throw usage_error("unknown space: " + name + " (euclidean or half-plane)");
}

LinkFunction make_link(const std::string& name, double lambda) {
  if (name == "logistic") return LinkFunction::logistic(lambda);
  if (name == "hard-threshold" || name == "hard_threshold")
    return LinkFunction::hard_threshold();
  throw usage_error("unknown link: " + name + " (logistic or hard-threshold)");
}

bool looks_like_json(const std::string& text) {
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    return ch == '{';
  }
  return false;
}

Configuration load_config(const std::string& path) {
  const std::string text = read_text_file(path);
  return looks_like_json(text) ? configuration_from_json(text)
                               : configuration_from_csv(text);
}

Graph load_graph(const std::string& path) {
  const std::string text = read_text_file(path);
  return looks_like_json(text) ? graph_from_json(text) : graph_from_edge_list(text);
}

Vec parse_point(const std::string& text) {
  std::vector<double> vals;
  std::string cur;
  for (char ch : text + ",") {
    if (ch == ',') {
      if (cur.empty()) throw usage_error("bad point literal: " + text);
      vals.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  Vec v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
  return v;
}

json iso_to_json(const Isometry& iso) {
  if (iso.space.kind == SpaceKind::Euclidean) {
    const auto& e = iso.as_euclidean();
    json rot = json::array();
    for (int i = 0; i < e.rotation.rows(); ++i) {
      json row = json::array();
      for (int k = 0; k < e.rotation.cols(); ++k) row.push_back(e.rotation(i, k));
      rot.push_back(std::move(row));
    }
    json tr = json::array();
    for (int i = 0; i < e.translation.size(); ++i) tr.push_back(e.translation[i]);
    return {{"kind", "euclidean"}, {"rotation", std::move(rot)},
            {"translation", std::move(tr)}};
  }
  const auto& h = iso.as_half_plane();
  return {{"kind", "half_plane"}, {"a", h.a}, {"b", h.b}, {"c", h.c}, {"d", h.d},
          {"reflect", h.reflect}};
}

json bound_to_json(const BoundValue& b) {
  return {{"log_value", b.log_value}, {"raw", b.raw}, {"clipped", b.clipped}};
}

struct GenerateArgs {
  int n = 50;
  std::string space = "euclidean";
  int dim = 2;
  std::string link = "logistic";
  double lambda = 2.0;
  std::uint64_t seed = 1;
  std::string density_file;
  double scale = 1.0;
  std::string out_config;
  std::string out_graph;
  bool as_json = false;
};

int cmd_generate(const GenerateArgs& a) {
  const LatentSpace space = make_space(a.space, a.dim);
  NodeDensity density = [&] {
    if (!a.density_file.empty()) return density_from_json(read_text_file(a.density_file));
    if (space.kind == SpaceKind::Euclidean)
      return NodeDensity::gaussian(Vec::Zero(space.dim),
                                   a.scale * a.scale *
                                       Mat::Identity(space.dim, space.dim));
    return NodeDensity::hyper_gaussian(base_point(space), a.scale);
  }();
  if (density.space != space)
    throw usage_error("density file does not match --space/--dim");
  const LinkFunction w = make_link(a.link, a.lambda);
  const GraphSample sample = generate_graph_iid(density, a.n, w, a.seed);
  if (!a.out_config.empty())
    write_text_file(a.out_config, a.as_json ? configuration_to_json(sample.config)
                                            : configuration_to_csv(sample.config));
  if (!a.out_graph.empty())
    write_text_file(a.out_graph, a.as_json ? graph_to_json(sample.graph)
                                           : graph_to_edge_list(sample.graph));
  json out;
  out["n"] = a.n;
  out["edges"] = sample.graph.edge_count();
  out["seed"] = a.seed;
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct EmbedArgs {
  std::string graph_file;
  std::string space = "euclidean";
  int dim = 2;
  double lambda = 2.0;
  std::uint64_t seed = 1;
  EmbedOptions opts;
  std::string out;
  std::string trace_file;
  bool as_json = false;
};

int cmd_embed(const EmbedArgs& a) {
  const Graph g = load_graph(a.graph_file);
  const LatentSpace space = make_space(a.space, a.dim);
  const EmbeddingResult r =
      mle_embed(g, space, LinkFunction::logistic(a.lambda), a.seed, a.opts);
  if (!a.out.empty())
    write_text_file(a.out, a.as_json ? configuration_to_json(r.estimate)
                                     : configuration_to_csv(r.estimate));
  if (!a.trace_file.empty()) {
    std::string trace = "iter,objective\n";
    for (std::size_t i = 0; i < r.objective_trace.size(); ++i)
      trace += std::to_string(i) + "," + format_double(r.objective_trace[i]) + "\n";
    write_text_file(a.trace_file, trace);
  }
  json out;
  out["objective"] = r.objective;
  out["converged"] = r.converged;
  out["iterations"] = r.iterations;
  out["restarts"] = r.restarts_used;
  out["boundary_hit"] = r.boundary_hit;
  out["graph_components"] = r.mds_components;
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct AlignArgs {
  std::string a_file, b_file;
  AlignOptions opts;
};

int cmd_align(const AlignArgs& a) {
  const Configuration x = load_config(a.a_file);
  const Configuration y = load_config(a.b_file);
  const AlignmentResult r = align_configs(x, y, a.opts);
  json out;
  out["distance"] = r.dist_class;
  out["per_node"] = r.dist_class / x.n();
  out["iso"] = iso_to_json(r.iso);
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct EstimateArgs {
  std::string config_file;
  double bandwidth = 0;
  std::string out;
  std::vector<std::string> eval_points;
};

int cmd_estimate_density(const EstimateArgs& a) {
  const Configuration c = load_config(a.config_file);
  const NodeDensity f = kde(c, a.bandwidth);
  if (!a.out.empty()) write_text_file(a.out, density_to_json(f));
  json out;
  out["bandwidth"] = std::get<KdeEstimate>(f.kind).bandwidth;
  out["centers"] = c.n();
  if (!a.eval_points.empty()) {
    json evals = json::array();
    for (const auto& text : a.eval_points) {
      const Vec z = parse_point(text);
      evals.push_back({{"point", text}, {"value", density_eval(f, z)}});
    }
    out["eval"] = std::move(evals);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct DensityDistanceArgs {
  std::string a_file, b_file;
  GridSpec grid;
  std::string center;
  AlignOptions opts;
};

int cmd_density_distance(const DensityDistanceArgs& a) {
  const NodeDensity f = density_from_json(read_text_file(a.a_file));
  const NodeDensity g = density_from_json(read_text_file(a.b_file));
  GridSpec grid = a.grid;
  if (!a.center.empty()) grid.center = parse_point(a.center);
  const DensityAlignment r = density_class_distance(f, g, grid, a.opts);
  json out;
  out["distance"] = r.distance;
  out["iso"] = iso_to_json(r.iso);
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct BoundsArgs {
  int n = 50;
  int dim = 2;
  double components = 2;
  double v = 1.0;
  double eps = 1.0;
  double m = 0;  // samples for the growth bound; 0 = n(n-1)/2
  std::string config_file;
  double lambda = 2.0;
};

int cmd_bounds(const BoundsArgs& a) {
  json out;
  out["n"] = a.n;
  out["eps"] = a.eps;
  const double pdim = pseudo_dim_bound(a.n, a.dim, a.components);
  out["pseudo_dim"] = pdim;
  out["covering"] = bound_to_json(covering_number_bound(a.eps, pdim));
  out["mcdiarmid_uniform"] = bound_to_json(mcdiarmid_uniform_bound(a.n, a.v, a.eps));
  out["uniform_deviation"] =
      bound_to_json(uniform_deviation_bound(a.n, a.dim, a.components, a.v, a.eps));
  const double m = a.m > 0 ? a.m : a.n * (a.n - 1) / 2.0;
  if (m >= pdim) out["growth"] = growth_function_bound(a.components, pdim, m);
  if (!a.config_file.empty()) {
    const Configuration c = load_config(a.config_file);
    out["mcdiarmid_pair"] =
        bound_to_json(mcdiarmid_pair_bound(c, LinkFunction::logistic(a.lambda), a.eps));
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct ExperimentArgs {
  std::string spec_file;
  std::string kind;
  std::string n_grid;
  std::uint64_t seed = 0;
  int replicates = 0;
  int threads = -1;
  std::string out_dir;
};

int cmd_experiment(const ExperimentArgs& a) {
  ExperimentSpec spec;
  if (!a.spec_file.empty()) {
    spec = experiment_spec_from_json(read_text_file(a.spec_file));
  } else if (!a.kind.empty()) {
    spec.kind = a.kind;
  } else {
    throw usage_error("need --spec or --kind");
  }
  if (!a.kind.empty()) spec.kind = a.kind;
  if (a.seed != 0) spec.seed = a.seed;
  if (a.replicates > 0) spec.replicates = a.replicates;
  if (a.threads >= 0) spec.threads = a.threads;
  if (!a.n_grid.empty()) {
    spec.n_grid.clear();
    const Vec ns = parse_point(a.n_grid);
    for (int i = 0; i < ns.size(); ++i) spec.n_grid.push_back(static_cast<int>(ns[i]));
  }
  const ExperimentResult result = run_experiment(spec);
  if (!a.out_dir.empty()) write_experiment_result(spec, result, a.out_dir);
  std::cout << "n,metric,count,mean,median,q25,q75\n";
  for (const auto& row : result.summary) {
    std::cout << row.n << ',' << row.metric << ',' << row.count << ','
              << format_double(row.mean) << ',' << format_double(row.median) << ','
              << format_double(row.q25) << ',' << format_double(row.q75) << "\n";
  }
  if (result.failed) {
    std::cerr << "experiment failed: " << result.failure_reason << "\n";
    return 2;
  }
  return 0;
}

void add_optimizer_flags(CLI::App* cmd, EmbedOptions& opts) {
  cmd->add_option("--restarts", opts.restarts, "optimizer restarts");
  cmd->add_option("--max-iters", opts.max_iters, "max ascent iterations per restart");
  cmd->add_option("--step0", opts.step0, "initial step size");
  cmd->add_option("--grad-tol", opts.grad_tol, "gradient norm stopping tolerance");
  cmd->add_option("--t-max", opts.t_max, "distance budget (0 = 4 ln n)");
  cmd->add_flag("--no-mds-first", [&opts](std::int64_t) { opts.mds_first = false; },
                "skip the graph-distance initialization");
  cmd->add_option("--stall-iters", opts.stall_iters, "stall window (0 = off)");
  cmd->add_option("--stall-tol", opts.stall_tol, "stall improvement threshold");
  cmd->add_flag("--parallel-restarts", opts.parallel_restarts, "run restarts in parallel");
}

void add_align_flags(CLI::App* cmd, AlignOptions& opts) {
  cmd->add_option("--nm-evals", opts.nm_max_evals, "simplex evaluations per start");
  cmd->add_option("--nm-tol", opts.nm_tol, "simplex convergence tolerance");
  cmd->add_option("--starts", opts.random_starts, "extra random starts per component");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent-space graph models: sampling, embedding, estimation"};
  app.set_version_flag("--version", std::string(cls::version));
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* cgen = app.add_subcommand("generate", "sample a configuration and graph");
  cgen->add_option("-n,--nodes", gen.n, "node count")->required();
  cgen->add_option("--space", gen.space, "euclidean | half-plane");
  cgen->add_option("--dim", gen.dim, "dimension (euclidean)");
  cgen->add_option("--link", gen.link, "logistic | hard-threshold");
  cgen->add_option("--lambda", gen.lambda, "logistic steepness");
  cgen->add_option("--seed", gen.seed, "random seed");
  cgen->add_option("--density", gen.density_file, "density JSON file");
  cgen->add_option("--scale", gen.scale, "default density scale");
  cgen->add_option("--out-config", gen.out_config, "write sampled locations here");
  cgen->add_option("--out-graph", gen.out_graph, "write sampled graph here");
  cgen->add_flag("--json", gen.as_json, "write JSON instead of csv/edge list");

  EmbedArgs emb;
  auto* cemb = app.add_subcommand("embed", "maximum likelihood embedding of a graph");
  cemb->add_option("--graph", emb.graph_file, "graph file (edge list or JSON)")->required();
  cemb->add_option("--space", emb.space, "euclidean | half-plane");
  cemb->add_option("--dim", emb.dim, "dimension (euclidean)");
  cemb->add_option("--lambda", emb.lambda, "logistic steepness");
  cemb->add_option("--seed", emb.seed, "random seed");
  cemb->add_option("--out", emb.out, "write the estimated configuration here");
  cemb->add_option("--trace", emb.trace_file, "write the objective trace here");
  cemb->add_flag("--json", emb.as_json, "write JSON instead of csv");
  add_optimizer_flags(cemb, emb.opts);

  AlignArgs ali;
  auto* cali = app.add_subcommand("align", "aligned distance between two configurations");
  cali->add_option("--a", ali.a_file, "first configuration")->required();
  cali->add_option("--b", ali.b_file, "second configuration")->required();
  add_align_flags(cali, ali.opts);

  EstimateArgs est;
  auto* cest = app.add_subcommand("estimate-density", "kernel density from a configuration");
  cest->add_option("--config", est.config_file, "configuration file")->required();
  cest->add_option("--bandwidth", est.bandwidth, "kernel bandwidth (0 = default rule)");
  cest->add_option("--out", est.out, "write the density JSON here");
  cest->add_option("--eval", est.eval_points, "evaluate at point \"x,y\" (repeatable)");

  DensityDistanceArgs dd;
  auto* cdd = app.add_subcommand("density-distance",
                                 "aligned L2 distance between two densities");
  cdd->add_option("--a", dd.a_file, "first density JSON")->required();
  cdd->add_option("--b", dd.b_file, "second density JSON")->required();
  cdd->add_option("--radius", dd.grid.radius, "quadrature radius");
  cdd->add_option("--points", dd.grid.points_per_axis, "grid points per axis");
  cdd->add_option("--center", dd.center, "grid center \"x,y\"");
  add_align_flags(cdd, dd.opts);

  BoundsArgs bnd;
  auto* cbnd = app.add_subcommand("bounds", "deviation and complexity bound calculators");
  cbnd->add_option("--n", bnd.n, "node count");
  cbnd->add_option("--dim", bnd.dim, "latent dimension");
  cbnd->add_option("--components", bnd.components, "isometry group components");
  cbnd->add_option("--v", bnd.v, "logit bound");
  cbnd->add_option("--eps", bnd.eps, "deviation threshold");
  cbnd->add_option("--m", bnd.m, "samples for the growth bound (0 = n(n-1)/2)");
  cbnd->add_option("--config", bnd.config_file, "configuration for the pair bound");
  cbnd->add_option("--lambda", bnd.lambda, "logistic steepness for the pair bound");

  ExperimentArgs exp;
  auto* cexp = app.add_subcommand("experiment", "run a replicated experiment");
  cexp->add_option("--spec", exp.spec_file, "experiment spec JSON");
  cexp->add_option("--kind", exp.kind,
                   "embed-consistency | density-consistency | graph-consistency | "
                   "concentration | misspecified");
  cexp->add_option("--n-grid", exp.n_grid, "comma-separated node counts");
  cexp->add_option("--seed", exp.seed, "random seed override");
  cexp->add_option("--replicates", exp.replicates, "replicates per n");
  cexp->add_option("--threads", exp.threads, "worker threads (0 = hardware)");
  cexp->add_option("--out", exp.out_dir, "write records.csv, summary.csv, manifest.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cgen->parsed()) return cmd_generate(gen);
    if (cemb->parsed()) return cmd_embed(emb);
    if (cali->parsed()) return cmd_align(ali);
    if (cest->parsed()) return cmd_estimate_density(est);
    if (cdd->parsed()) return cmd_density_distance(dd);
    if (cbnd->parsed()) return cmd_bounds(bnd);
    if (cexp->parsed()) return cmd_experiment(exp);
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
