#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "namer/vocab.hpp"

namespace namer {

struct GraphNode {
  ClassId cls = 0;
  std::string label;
  int row = -1;  // -1 for the virtual <sos>/<eos>
  int col = -1;
};

struct Edge {
  int src = 0;
  int dst = 0;
  double weight = 0.0;
  bool operator==(const Edge&) const = default;
};

/// Weighted digraph over decoded nodes. Index 0 is <sos>, the last index is
/// <eos>.
struct ExprGraph {
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;

  int sos() const noexcept { return 0; }
  int eos() const noexcept { return static_cast<int>(nodes.size()) - 1; }
  std::size_t node_count() const noexcept { return nodes.size(); }
};

/// Graph with only <sos> and <eos>.
ExprGraph make_empty_graph(const TokenVocab& vocab);

/// Adjacency in compressed-row form; out-edges of v are
/// targets[offsets[v] .. offsets[v+1]) with matching edge ids.
struct Adjacency {
  std::vector<int> offsets;
  std::vector<int> targets;
  std::vector<int> edge_ids;
};

Adjacency out_adjacency(const ExprGraph& g);

/// True when `to` is reachable from `from`, ignoring edges flagged in `removed`.
bool reachable(const ExprGraph& g, int from, int to, std::span<const char> removed = {});

/// Graphviz DOT; edges on `path` (consecutive node indices) are drawn bold.
std::string to_dot(const ExprGraph& g, std::span<const int> path = {});
void export_dot(const ExprGraph& g, const std::filesystem::path& file, std::span<const int> path = {});

/// {nodes:[{id,label,row,col}], edges:[{src,dst,w}]}
std::string to_json(const ExprGraph& g);
ExprGraph graph_from_json(const std::string& text, const TokenVocab& vocab);

}  // namespace namer
