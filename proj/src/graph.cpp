#include "namer/graph.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <utility>

#include <json.hpp>

#include "namer/error.hpp"

namespace namer {

ExprGraph make_empty_graph(const TokenVocab& vocab) {
  ExprGraph g;
  g.nodes.push_back({vocab.sos_id(), std::string(kSosSymbol), -1, -1});
  g.nodes.push_back({vocab.eos_id(), std::string(kEosSymbol), -1, -1});
  return g;
}

Adjacency out_adjacency(const ExprGraph& g) {
  const std::size_t n = g.nodes.size();
  Adjacency adj;
  adj.offsets.assign(n + 1, 0);
  for (const auto& e : g.edges) ++adj.offsets[static_cast<std::size_t>(e.src) + 1];
  for (std::size_t v = 0; v < n; ++v) adj.offsets[v + 1] += adj.offsets[v];
  adj.targets.resize(g.edges.size());
  adj.edge_ids.resize(g.edges.size());
  std::vector<int> fill(adj.offsets.begin(), adj.offsets.end() - 1);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    int slot = fill[static_cast<std::size_t>(g.edges[i].src)]++;
    adj.targets[static_cast<std::size_t>(slot)] = g.edges[i].dst;
    adj.edge_ids[static_cast<std::size_t>(slot)] = static_cast<int>(i);
  }
  return adj;
}

bool reachable(const ExprGraph& g, int from, int to, std::span<const char> removed) {
  if (from == to) return true;
  auto adj = out_adjacency(g);
  std::vector<char> seen(g.nodes.size(), 0);
  std::vector<int> stack{from};
  seen[static_cast<std::size_t>(from)] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int k = adj.offsets[static_cast<std::size_t>(v)]; k < adj.offsets[static_cast<std::size_t>(v) + 1]; ++k) {
      auto ku = static_cast<std::size_t>(k);
      if (!removed.empty() && removed[static_cast<std::size_t>(adj.edge_ids[ku])]) continue;
      int w = adj.targets[ku];
      if (w == to) return true;
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        stack.push_back(w);
      }
    }
  }
  return false;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\\' || c == '"') out += '\\';
    out += c;
  }
  return out;
}

std::string node_label(const GraphNode& n) {
  if (n.row < 0) return n.label;
  return n.label + "@(" + std::to_string(n.row) + "," + std::to_string(n.col) + ")";
}

}  // namespace

std::string to_dot(const ExprGraph& g, std::span<const int> path) {
  std::set<std::pair<int, int>> bold;
  for (std::size_t i = 1; i < path.size(); ++i) bold.emplace(path[i - 1], path[i]);

  std::string out = "digraph expr {\n  rankdir=LR;\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    out += "  n" + std::to_string(i) + " [label=\"" + dot_escape(node_label(g.nodes[i])) + "\"];\n";
  }
  char weight[32];
  for (const auto& e : g.edges) {
    std::snprintf(weight, sizeof weight, "%.3f", e.weight);
    out += "  n" + std::to_string(e.src) + " -> n" + std::to_string(e.dst) + " [label=\"" + weight + "\"";
    if (bold.count({e.src, e.dst}) != 0) out += ", style=bold";
    out += "];\n";
  }
  out += "}\n";
  return out;
}

void export_dot(const ExprGraph& g, const std::filesystem::path& file, std::span<const int> path) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + file.string());
  out << to_dot(g, path);
  if (!out) throw Error(Errc::IoFailure, "write failed for " + file.string());
}

std::string to_json(const ExprGraph& g) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    j["nodes"].push_back({{"id", i}, {"label", n.label}, {"row", n.row}, {"col", n.col}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"w", e.weight}});
  return j.dump(2);
}

ExprGraph graph_from_json(const std::string& text, const TokenVocab& vocab) {
  ExprGraph g;
  try {
    auto j = nlohmann::json::parse(text);
    for (const auto& n : j.at("nodes")) {
      GraphNode node;
      node.label = n.at("label").get<std::string>();
      node.cls = vocab.id_of(node.label);
      node.row = n.at("row").get<int>();
      node.col = n.at("col").get<int>();
      if (n.at("id").get<std::size_t>() != g.nodes.size()) {
        throw Error(Errc::ShapeMismatch, "node ids must be dense and ordered");
      }
      g.nodes.push_back(std::move(node));
    }
    const int n = static_cast<int>(g.nodes.size());
    for (const auto& e : j.at("edges")) {
      Edge edge{e.at("src").get<int>(), e.at("dst").get<int>(), e.at("w").get<double>()};
      if (edge.src < 0 || edge.src >= n || edge.dst < 0 || edge.dst >= n) {
        throw Error(Errc::ShapeMismatch, "edge endpoint out of range");
      }
      g.edges.push_back(edge);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::ShapeMismatch, std::string("graph json: ") + ex.what());
  }
  return g;
}

}  // namespace namer
