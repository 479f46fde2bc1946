#pragma once

#include <string>

#include "cls/geometry.hpp"
#include "cls/link_model.hpp"

namespace cls {

// Round trips are bit-exact: doubles are written with enough digits to
// reparse to the identical value.

// CSV: "# space=euclidean dim=2" header line, then one point per row.
std::string configuration_to_csv(const Configuration& c);
Configuration configuration_from_csv(const std::string& text);

// JSON: {"space": {"kind": ..., "dim": ...}, "points": [[...], ...]}.
std::string configuration_to_json(const Configuration& c);
Configuration configuration_from_json(const std::string& text);

// Edge list: "# n=<n>" header, then one "p q" line per edge, sorted, 0-indexed.
std::string graph_to_edge_list(const Graph& g);
Graph graph_from_edge_list(const std::string& text);

// JSON: {"n": n, "edges": [[p, q], ...]}.
std::string graph_to_json(const Graph& g);
Graph graph_from_json(const std::string& text);

// JSON: {"kind": "gaussian" | "hyper_gaussian" | "kde", ...}. A kde round
// trip rebuilds the kernel normalizer from the stored bandwidth.
std::string density_to_json(const NodeDensity& f);
NodeDensity density_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

std::string format_double(double v);  // shortest exact decimal form

}  // namespace cls
