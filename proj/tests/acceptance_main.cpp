// End-to-end acceptance gate. Each criterion prints exactly one PASS/FAIL
// line with the numbers it measured; the process exit code is the number of
// failed criteria. Tolerances are pinned next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cls/cls.hpp"

using namespace cls;

namespace {

struct Gate {
  int failed = 0;
  int passed = 0;

  void run(const std::string& name,
           const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
      auto r = body();
      ok = r.first;
      detail = r.second;
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1fs]\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str(),
                secs);
    std::fflush(stdout);
    (ok ? passed : failed) += 1;
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

Vec vecd(std::initializer_list<double> vals) {
  Vec v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

Vec random_point(const LatentSpace& space, std::mt19937_64& eng, double scale = 2.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec p(space.dim);
  for (int k = 0; k < space.dim; ++k) p[k] = scale * normal(eng);
  if (space.kind == SpaceKind::HalfPlane) p[1] = std::exp(0.8 * normal(eng));
  return p;
}

Configuration random_config(const LatentSpace& space, int n, std::mt19937_64& eng,
                            double scale = 2.0) {
  Configuration c{space, {}};
  for (int i = 0; i < n; ++i) c.points.push_back(random_point(space, eng, scale));
  return c;
}

// ---- criterion 1: metric suite ---------------------------------------------

std::pair<bool, std::string> metric_suite() {
  double worst_tri = 0, worst_iso = 0, worst_fd = 0;
  for (const auto& space : {LatentSpace::euclidean(3), LatentSpace::half_plane()}) {
    std::mt19937_64 eng(space.kind == SpaceKind::Euclidean ? 1 : 2);
    for (int i = 0; i < 10000; ++i) {
      const Vec p = random_point(space, eng);
      const Vec q = random_point(space, eng);
      const Vec r = random_point(space, eng);
      const double dpq = dist(space, p, q);
      if (dpq != dist(space, q, p)) return {false, "symmetry broken"};
      worst_tri = std::max(worst_tri, dist(space, p, r) - dpq - dist(space, q, r));
      const Isometry iso = random_isometry(space, 50000 + i);
      worst_iso = std::max(
          worst_iso,
          std::abs(dist(space, apply_isometry(iso, p), apply_isometry(iso, q)) - dpq));
    }
    int done = 0;
    while (done < 1000) {
      const Vec p = random_point(space, eng);
      const Vec q = random_point(space, eng);
      if (dist(space, p, q) < 1e-3) continue;
      ++done;
      const auto g = dist_grad(space, p, q);
      Vec fd(space.dim);
      const double h = 1e-6;
      for (int k = 0; k < space.dim; ++k) {
        Vec hi = p, lo = p;
        hi[k] += h;
        lo[k] -= h;
        fd[k] = (dist(space, hi, q) - dist(space, lo, q)) / (2 * h);
      }
      if (space.kind == SpaceKind::HalfPlane) fd *= p[1] * p[1];
      worst_fd = std::max(worst_fd, (g.at_p - fd).norm() / std::max(1e-12, fd.norm()));
    }
  }
  const bool ok = worst_tri <= 1e-9 && worst_iso <= 1e-9 && worst_fd <= 1e-5;
  return {ok, fmt("triangle slack %.2e (tol 1e-9), isometry drift %.2e (tol 1e-9), "
                  "grad fd err %.2e (tol 1e-5)",
                  worst_tri, worst_iso, worst_fd)};
}

// ---- criterion 2: cross-entropy decomposition ------------------------------

std::pair<bool, std::string> decomposition_identity() {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> pd(0.05, 0.95);
  std::uniform_int_distribution<int> nd(2, 12);
  const auto w = LinkFunction::logistic(2.0);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const int n = nd(eng);
    const Configuration c = random_config(LatentSpace::euclidean(2), n, eng);
    EdgeProbMatrix truth(n);
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) truth.set(p, q, pd(eng));
    const double e = expected_loglik_norm(c, truth, w);
    const EntropyKl parts = entropy_kl_decompose(truth, edge_probabilities(c, w));
    worst = std::max(worst, std::abs(-e - (parts.entropy + parts.kl)));
  }
  return {worst <= 1e-10, fmt("max identity gap %.2e (tol 1e-10, 1000 instances)", worst)};
}

// ---- criterion 3: truth maximality ------------------------------------------

std::pair<bool, std::string> truth_maximality() {
  std::mt19937_64 eng(4);
  std::normal_distribution<double> noise(0.0, 0.3);
  const auto w = LinkFunction::logistic(2.0);
  int violations = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 3 + inst % 6;
    const Configuration truth_config = random_config(LatentSpace::euclidean(2), n, eng);
    const EdgeProbMatrix truth = edge_probabilities(truth_config, w);
    const double at_truth = expected_loglik_norm(truth_config, truth, w);
    for (int k = 0; k < 1000; ++k) {
      Configuration perturbed = truth_config;
      for (Vec& p : perturbed.points)
        for (int d = 0; d < 2; ++d) p[d] += noise(eng);
      if (expected_loglik_norm(perturbed, truth, w) > at_truth + 1e-12) ++violations;
    }
  }
  return {violations == 0, fmt("%d violations in 100x1000 perturbations", violations)};
}

// ---- criterion 4: two-node oracle -------------------------------------------

std::pair<bool, std::string> two_node_oracle() {
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const double lambda = 0.8 + 0.06 * i;
    const double t_max = 1.6 + 0.02 * i;
    const bool edge = i % 2 == 0;
    const auto w = LinkFunction::logistic(lambda);
    Graph g(2);
    if (edge) g.set_edge(0, 1, true);

    double best_d = 0, best_v = -1e300;
    for (int k = 0; k <= 20000; ++k) {
      const double d = t_max * k / 20000.0;
      Configuration c{LatentSpace::euclidean(1), {vecd({0.0}), vecd({d})}};
      const double v = loglik(c, g, w, LogGuard::Clamped).value;
      if (v > best_v) best_v = v, best_d = d;
    }

    EmbedOptions opts;
    opts.restarts = 2;
    opts.t_max = t_max;
    const EmbeddingResult r = mle_embed(g, LatentSpace::euclidean(2), w, 100 + i, opts);
    const double got =
        dist(LatentSpace::euclidean(2), r.estimate.points[0], r.estimate.points[1]);
    worst = std::max(worst, std::abs(got - best_d));
  }
  return {worst <= 1e-3, fmt("max |distance - oracle| %.2e (tol 1e-3, 50 instances)", worst)};
}

// ---- criteria 5-8: simulation trends ----------------------------------------

ExperimentSpec base_spec(const std::string& kind, const LatentSpace& space) {
  ExperimentSpec s;
  s.kind = kind;
  s.space = space;
  s.link = LinkFunction::logistic(2.0);
  if (space.kind == SpaceKind::Euclidean)
    s.density = NodeDensity::gaussian(Vec::Zero(2), 4.0 * Mat::Identity(2, 2));
  else
    s.density = NodeDensity::hyper_gaussian(vecd({0.0, 1.0}), 1.3);
  s.n_grid = {20, 50, 100, 200};
  s.replicates = 20;
  s.seed = 20260814;
  s.threads = 1;
  return s;
}

std::map<int, double> metric_medians(const ExperimentResult& r, const std::string& metric) {
  std::map<int, double> out;
  for (const auto& row : r.summary)
    if (row.metric == metric) out[row.n] = row.median;
  return out;
}

std::pair<bool, std::string> embed_trend_euclidean() {
  const ExperimentSpec s = base_spec("embed-consistency", LatentSpace::euclidean(2));
  const ExperimentResult r = run_experiment(s);
  if (r.failed) return {false, "experiment failed: " + r.failure_reason};
  const auto med = metric_medians(r, "align_error");
  const double m20 = med.at(20), m200 = med.at(200);
  const bool ok = m200 < m20 && m200 <= 0.6 * m20;
  return {ok, fmt("median per-node error 0.6x gate: n20=%.4f n50=%.4f n100=%.4f n200=%.4f "
                  "ratio=%.3f",
                  m20, med.at(50), med.at(100), m200, m200 / m20)};
}

std::pair<bool, std::string> embed_trend_half_plane() {
  const ExperimentSpec s = base_spec("embed-consistency", LatentSpace::half_plane());
  const ExperimentResult r = run_experiment(s);
  if (r.failed) return {false, "experiment failed: " + r.failure_reason};
  const auto med = metric_medians(r, "align_error");
  std::vector<double> seq;
  for (int n : s.n_grid) seq.push_back(med.at(n));
  int inversions = 0;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i)
    if (seq[i + 1] > seq[i]) ++inversions;
  const bool ok = inversions <= 1 && seq.back() < seq.front();
  return {ok, fmt("medians n20=%.4f n50=%.4f n100=%.4f n200=%.4f inversions=%d (allow 1)",
                  seq[0], seq[1], seq[2], seq[3], inversions)};
}

std::pair<bool, std::string> density_trend() {
  const ExperimentSpec s = base_spec("density-consistency", LatentSpace::euclidean(2));
  const ExperimentResult r = run_experiment(s);
  if (r.failed) return {false, "experiment failed: " + r.failure_reason};
  const auto med = metric_medians(r, "density_l2");
  const auto oracle = metric_medians(r, "density_l2_oracle");
  const bool ok = med.at(200) < med.at(20);
  return {ok, fmt("median L2 class distance n20=%.4f n200=%.4f (oracle arm %.4f / %.4f)",
                  med.at(20), med.at(200), oracle.at(20), oracle.at(200))};
}

std::pair<bool, std::string> graph_law_trend() {
  ExperimentSpec s = base_spec("graph-consistency", LatentSpace::euclidean(2));
  s.n_grid = {20, 200};
  s.replicates = 5;
  s.graph_m = 4;
  s.draws = 10000;
  const ExperimentResult r = run_experiment(s);
  if (r.failed) return {false, "experiment failed: " + r.failure_reason};
  const auto med = metric_medians(r, "graph_tv");
  const bool ok = med.at(200) < med.at(20);
  return {ok, fmt("median graph-type TV n20=%.4f n200=%.4f (m=4, 10000 draws)", med.at(20),
                  med.at(200))};
}

// ---- criterion 9: concentration soundness -----------------------------------

std::pair<bool, std::string> concentration_soundness() {
  ExperimentSpec s = base_spec("concentration", LatentSpace::euclidean(2));
  s.n_grid = {12};
  s.replicates = 10000;
  const ExperimentResult r = run_experiment(s);
  if (r.failed) return {false, "experiment failed: " + r.failure_reason};
  std::ostringstream detail;
  bool ok = true;
  for (int k = 0; k < 3; ++k) {
    double freq = 0, bound = 0, ubound = 0;
    for (const auto& rec : r.records) {
      freq += rec.values.at("exceed" + std::to_string(k));
      bound = rec.values.at("bound" + std::to_string(k));
      ubound = rec.values.at("ubound" + std::to_string(k));
    }
    freq /= r.records.size();
    const double sigma =
        std::sqrt(std::max(freq * (1 - freq), 1.0 / s.replicates) / s.replicates);
    ok = ok && freq <= bound + 3 * sigma && freq <= ubound + 3 * sigma;
    detail << (k ? " | " : "") << "eps" << k << ": freq=" << freq << " pair=" << bound
           << " unif=" << ubound;
  }
  return {ok, detail.str() + " (10000 draws, freq <= bound + 3 sigma)"};
}

// ---- criterion 10: bound calculators ----------------------------------------

std::pair<bool, std::string> bound_calculators() {
  auto rel = [](double got, double want) {
    return std::abs(got - want) / std::max(1e-12, std::abs(want));
  };
  double worst = 0;
  worst = std::max(worst, rel(pseudo_dim_bound(10, 2, 2), 63.150654917795905));
  worst = std::max(worst, rel(pseudo_dim_bound(1, 1, 2), 5.0575327458897952));
  worst = std::max(worst, rel(mcdiarmid_uniform_bound(2, 0.1, 0.1).raw,
                              0.73575888234288464));
  worst = std::max(worst, rel(covering_number_bound(2.0 * M_E, 1.0).raw,
                              5.4365636569180905));
  worst = std::max(worst, rel(growth_function_bound(2, 2, 4), 59.112448791445202));

  Configuration c{LatentSpace::euclidean(1),
                  {vecd({0.0}), vecd({std::log(2.0) - 0.5})}};
  worst = std::max(worst, rel(mcdiarmid_pair_bound(c, LinkFunction::logistic(2.0), 0.1).raw,
                              1.0545848480860971));

  const double pdim = pseudo_dim_bound(50, 2, 2);
  const double cover = 1.0 + std::log(pdim + 1.0) + pdim * (1.0 + std::log(2.0 / (1.0 / 16)));
  const double byhand = std::log(4.0) + cover - 1.0 / (8.0 * 50 * 49 * 1e-4);
  worst = std::max(worst, rel(uniform_deviation_bound(50, 2, 2, 0.01, 1.0).log_value, byhand));
  return {worst <= 1e-9, fmt("max relative error %.2e across spot checks (tol 1e-9)", worst)};
}

// ---- criterion 11: alignment oracle -----------------------------------------

double brute_force_align(const Configuration& x, const Configuration& y) {
  const int n = x.n();
  double best = 1e300;
  for (int refl = 0; refl < 2; ++refl) {
    for (int a = 0; a < 1440; ++a) {
      const double theta = a * (2.0 * M_PI / 1440.0);
      Mat rot(2, 2);
      rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
      if (refl) rot.col(0) *= -1.0;
      std::vector<Vec> resid(n);
      Vec t = Vec::Zero(2);
      for (int i = 0; i < n; ++i) {
        resid[i] = x.points[i] - rot * y.points[i];
        t += resid[i];
      }
      t /= n;
      for (int it = 0; it < 200; ++it) {
        Vec num = Vec::Zero(2);
        double den = 0;
        for (int i = 0; i < n; ++i) {
          const double d = std::max((resid[i] - t).norm(), 1e-12);
          num += resid[i] / d;
          den += 1.0 / d;
        }
        const Vec next = num / den;
        const bool settled = (next - t).norm() < 1e-12;
        t = next;
        if (settled) break;
      }
      double obj = 0;
      for (int i = 0; i < n; ++i) obj += (resid[i] - t).norm();
      best = std::min(best, obj);
    }
  }
  return best;
}

std::pair<bool, std::string> alignment_oracle() {
  std::mt19937_64 eng(6);
  std::normal_distribution<double> noise(0.0, 0.15);
  double worst_ratio = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const Configuration x = random_config(LatentSpace::euclidean(2), 5, eng, 1.5);
    Configuration y =
        apply_isometry(random_isometry(LatentSpace::euclidean(2), 600 + inst), x);
    for (Vec& p : y.points)
      for (int d = 0; d < 2; ++d) p[d] += noise(eng);
    const double mine = align_configs(x, y).dist_class;
    const double oracle = brute_force_align(x, y);
    worst_ratio = std::max(worst_ratio, std::abs(mine - oracle) / oracle);
  }

  double worst_self = 0, worst_sym = 0, worst_tri = 0, worst_inv = 0;
  for (const auto& space : {LatentSpace::euclidean(2), LatentSpace::half_plane()}) {
    std::mt19937_64 teng(space.kind == SpaceKind::Euclidean ? 7 : 8);
    for (int i = 0; i < 500; ++i) {
      const Configuration x = random_config(space, 4, teng, 1.0);
      const Configuration y = random_config(space, 4, teng, 1.0);
      const Configuration z = random_config(space, 4, teng, 1.0);
      const double dxy = align_configs(x, y).dist_class;
      const double dyx = align_configs(y, x).dist_class;
      const double dyz = align_configs(y, z).dist_class;
      const double dxz = align_configs(x, z).dist_class;
      worst_sym = std::max(worst_sym, std::abs(dxy - dyx));
      worst_tri = std::max(worst_tri, dxz - dxy - dyz);
      if (i % 50 == 0) {
        worst_self = std::max(worst_self, align_configs(x, x).dist_class);
        const Isometry iso = random_isometry(space, 9000 + i);
        worst_inv = std::max(
            worst_inv, std::abs(align_configs(x, apply_isometry(iso, y)).dist_class - dxy));
      }
    }
  }
  const bool ok = worst_ratio <= 0.01 && worst_self <= 1e-9 && worst_sym <= 1e-6 &&
                  worst_tri <= 1e-6 && worst_inv <= 1e-6;
  return {ok, fmt("oracle gap %.3f%% (tol 1%%), self %.1e, asymmetry %.1e, triangle %.1e, "
                  "class drift %.1e",
                  100 * worst_ratio, worst_self, worst_sym, worst_tri, worst_inv)};
}

// ---- criterion 12: serialization --------------------------------------------

std::pair<bool, std::string> serialization_roundtrip() {
  std::mt19937_64 eng(9);
  int objects = 0;
  for (int i = 0; i < 600; ++i) {
    const LatentSpace space = (i % 4 == 3) ? LatentSpace::half_plane()
                                           : LatentSpace::euclidean(1 + i % 3);
    const Configuration c = random_config(space, 1 + i % 12, eng);
    const Configuration via_csv = configuration_from_csv(configuration_to_csv(c));
    const Configuration via_json = configuration_from_json(configuration_to_json(c));
    for (int k = 0; k < c.n(); ++k)
      if (via_csv.points[k] != c.points[k] || via_json.points[k] != c.points[k])
        return {false, fmt("configuration %d changed under round trip", i)};
    ++objects;
  }
  std::bernoulli_distribution coin(0.3);
  for (int i = 0; i < 400; ++i) {
    const int n = 1 + i % 25;
    Graph g(n);
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) g.set_edge(p, q, coin(eng));
    if (!(graph_from_edge_list(graph_to_edge_list(g)) == g) ||
        !(graph_from_json(graph_to_json(g)) == g))
      return {false, fmt("graph %d changed under round trip", i)};
    ++objects;
  }
  return {true, fmt("%d objects round-tripped bit-exactly", objects)};
}

}  // namespace

int main() {
  Gate gate;
  gate.run("metric-suite", metric_suite);
  gate.run("likelihood-decomposition", decomposition_identity);
  gate.run("truth-maximality", truth_maximality);
  gate.run("two-node-embedding-oracle", two_node_oracle);
  gate.run("bound-calculators", bound_calculators);
  gate.run("serialization-roundtrip", serialization_roundtrip);
  gate.run("alignment-oracle", alignment_oracle);
  gate.run("concentration-soundness", concentration_soundness);
  gate.run("graph-law-trend", graph_law_trend);
  gate.run("embed-consistency-euclidean", embed_trend_euclidean);
  gate.run("embed-consistency-half-plane", embed_trend_half_plane);
  gate.run("density-consistency", density_trend);
  std::printf("%d passed, %d failed\n", gate.passed, gate.failed);
  return gate.failed;
}
