#include "cls/serialization.hpp"

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cls/density_estimation.hpp"
#include "cls/errors.hpp"

namespace cls {

using nlohmann::json;

std::string format_double(double v) {
  // Shortest decimal that parses back to the same bits.
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

std::string space_name(const LatentSpace& s) {
  return s.kind == SpaceKind::Euclidean ? "euclidean" : "half_plane";
}

LatentSpace space_from(const std::string& name, int dim) {
  if (name == "euclidean") return LatentSpace::euclidean(dim);
  if (name == "half_plane") {
    if (dim != 2) throw usage_error("half_plane dim must be 2");
    return LatentSpace::half_plane();
  }
  throw usage_error("unknown space kind: " + name);
}

double parse_double(const std::string& tok) {
  // Not std::stod: it reports ERANGE underflow (subnormals like 5e-324) as
  // out_of_range, but such values round-trip fine and must stay readable.
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty())
    throw usage_error("bad number: " + tok);
  if (errno == ERANGE && std::abs(v) == HUGE_VAL)
    throw usage_error("number out of range: " + tok);
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string configuration_to_csv(const Configuration& c) {
  validate_configuration(c);
  std::ostringstream out;
  out << "# space=" << space_name(c.space) << " dim=" << c.space.dim << "\n";
  for (const Vec& p : c.points) {
    for (int k = 0; k < p.size(); ++k) {
      if (k) out << ',';
      out << format_double(p[k]);
    }
    out << '\n';
  }
  return out.str();
}

Configuration configuration_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw usage_error("empty configuration file");
  std::string kind;
  int dim = 0;
  if (std::sscanf(line.c_str(), "# space=%*s dim=%d", &dim) != 1)
    throw usage_error("bad configuration header: " + line);
  {
    const auto pos = line.find("space=");
    const auto end = line.find(' ', pos);
    kind = line.substr(pos + 6, end - pos - 6);
  }
  Configuration c{space_from(kind, dim), {}};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto toks = split(line, ',');
    if (static_cast<int>(toks.size()) != dim)
      throw usage_error("point has wrong dimension: " + line);
    Vec p(dim);
    for (int k = 0; k < dim; ++k) p[k] = parse_double(toks[k]);
    c.points.push_back(std::move(p));
  }
  validate_configuration(c);
  return c;
}

std::string configuration_to_json(const Configuration& c) {
  validate_configuration(c);
  json j;
  j["space"] = {{"kind", space_name(c.space)}, {"dim", c.space.dim}};
  json pts = json::array();
  for (const Vec& p : c.points) {
    json row = json::array();
    for (int k = 0; k < p.size(); ++k) row.push_back(p[k]);
    pts.push_back(std::move(row));
  }
  j["points"] = std::move(pts);
  return j.dump(2) + "\n";
}

Configuration configuration_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw usage_error(std::string("bad JSON: ") + e.what());
  }
  try {
    Configuration c{space_from(j.at("space").at("kind").get<std::string>(),
                               j.at("space").at("dim").get<int>()),
                    {}};
    for (const auto& row : j.at("points")) {
      Vec p(row.size());
      for (std::size_t k = 0; k < row.size(); ++k) p[k] = row[k].get<double>();
      c.points.push_back(std::move(p));
    }
    validate_configuration(c);
    return c;
  } catch (const json::exception& e) {
    throw usage_error(std::string("bad configuration JSON: ") + e.what());
  }
}

std::string graph_to_edge_list(const Graph& g) {
  std::ostringstream out;
  out << "# n=" << g.n() << "\n";
  for (const auto& [p, q] : g.edges()) out << p << ' ' << q << '\n';
  return out.str();
}

Graph graph_from_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw usage_error("empty graph file");
  int n = -1;
  if (std::sscanf(line.c_str(), "# n=%d", &n) != 1 || n < 0)
    throw usage_error("bad graph header: " + line);
  Graph g(n);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int p, q;
    if (std::sscanf(line.c_str(), "%d %d", &p, &q) != 2)
      throw usage_error("bad edge line: " + line);
    g.set_edge(p, q, true);
  }
  return g;
}

std::string graph_to_json(const Graph& g) {
  json j;
  j["n"] = g.n();
  json edges = json::array();
  for (const auto& [p, q] : g.edges()) edges.push_back(json::array({p, q}));
  j["edges"] = std::move(edges);
  return j.dump(2) + "\n";
}

Graph graph_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw usage_error(std::string("bad JSON: ") + e.what());
  }
  try {
    Graph g(j.at("n").get<int>());
    for (const auto& e : j.at("edges")) g.set_edge(e.at(0).get<int>(), e.at(1).get<int>(), true);
    return g;
  } catch (const json::exception& e) {
    throw usage_error(std::string("bad graph JSON: ") + e.what());
  }
}

namespace {

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

}  // namespace

std::string density_to_json(const NodeDensity& f) {
  json j;
  if (const auto* g = std::get_if<GaussianEuclidean>(&f.kind)) {
    j["kind"] = "gaussian";
    j["mean"] = vec_to_json(g->mean);
    json cov = json::array();
    for (int i = 0; i < g->cov.rows(); ++i) {
      json row = json::array();
      for (int k = 0; k < g->cov.cols(); ++k) row.push_back(g->cov(i, k));
      cov.push_back(std::move(row));
    }
    j["cov"] = std::move(cov);
  } else if (const auto* h = std::get_if<HyperGaussian>(&f.kind)) {
    j["kind"] = "hyper_gaussian";
    j["center"] = vec_to_json(h->center);
    j["sigma"] = h->sigma;
  } else {
    const auto& est = std::get<KdeEstimate>(f.kind);
    j["kind"] = "kde";
    j["bandwidth"] = est.bandwidth;
    j["centers"] = json::parse(configuration_to_json(est.centers));
  }
  return j.dump(2) + "\n";
}

NodeDensity density_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw usage_error(std::string("bad JSON: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") {
      const Vec mean = vec_from_json(j.at("mean"));
      const auto& jc = j.at("cov");
      Mat cov(jc.size(), jc.size());
      for (std::size_t i = 0; i < jc.size(); ++i)
        for (std::size_t k = 0; k < jc.size(); ++k) cov(i, k) = jc[i][k].get<double>();
      return NodeDensity::gaussian(mean, cov);
    }
    if (kind == "hyper_gaussian")
      return NodeDensity::hyper_gaussian(vec_from_json(j.at("center")),
                                         j.at("sigma").get<double>());
    if (kind == "kde")
      return kde(configuration_from_json(j.at("centers").dump()),
                 j.at("bandwidth").get<double>());
    throw usage_error("unknown density kind: " + kind);
  } catch (const json::exception& e) {
    throw usage_error(std::string("bad density JSON: ") + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw usage_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw usage_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace cls
