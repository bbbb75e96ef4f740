#include "namer/decode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "namer/error.hpp"
#include "namer/kernels.hpp"
#include "namer/latex.hpp"

namespace namer {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string size_text(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }

void check_stochastic(const ScoreMatrix& m, const char* name) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    double sum = 0.0;
    for (float v : m.row(r)) {
      if (!std::isfinite(v) || v < 0.0F) {
        throw Error(Errc::NonStochasticRow, std::string(name) + " row " + std::to_string(r) + " has an invalid entry");
      }
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-4) {
      throw Error(Errc::NonStochasticRow, std::string(name) + " row " + std::to_string(r) + " sums to " +
                                              std::to_string(sum));
    }
  }
}

// Breadth-first <sos> -> <eos> path that avoids removed edges. Marks its
// edges in `on_path` and returns false when <eos> is unreachable.
bool witness_path(const ExprGraph& g, const Adjacency& adj, const std::vector<char>& removed,
                  std::vector<char>& on_path) {
  const std::size_t n = g.nodes.size();
  std::vector<int> via(n, -1);
  std::vector<char> seen(n, 0);
  std::vector<int> queue{g.sos()};
  seen[static_cast<std::size_t>(g.sos())] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto v = static_cast<std::size_t>(queue[head]);
    for (int k = adj.offsets[v]; k < adj.offsets[v + 1]; ++k) {
      int e = adj.edge_ids[static_cast<std::size_t>(k)];
      if (removed[static_cast<std::size_t>(e)]) continue;
      auto w = static_cast<std::size_t>(adj.targets[static_cast<std::size_t>(k)]);
      if (seen[w]) continue;
      seen[w] = 1;
      via[w] = e;
      queue.push_back(static_cast<int>(w));
    }
  }
  if (!seen[static_cast<std::size_t>(g.eos())]) return false;
  std::fill(on_path.begin(), on_path.end(), 0);
  for (int v = g.eos(); v != g.sos();) {
    int e = via[static_cast<std::size_t>(v)];
    on_path[static_cast<std::size_t>(e)] = 1;
    v = g.edges[static_cast<std::size_t>(e)].src;
  }
  return true;
}

// Edge ids of some directed cycle among live edges, empty if acyclic.
std::vector<int> find_cycle(const ExprGraph& g, const Adjacency& adj, const std::vector<char>& removed) {
  const std::size_t n = g.nodes.size();
  enum : char { White, Grey, Black };
  std::vector<char> colour(n, White);
  std::vector<int> via(n, -1);
  std::vector<std::pair<int, int>> stack;  // (vertex, next adjacency slot)
  for (std::size_t root = 0; root < n; ++root) {
    if (colour[root] != White) continue;
    stack.emplace_back(static_cast<int>(root), adj.offsets[root]);
    colour[root] = Grey;
    while (!stack.empty()) {
      auto& [v, slot] = stack.back();
      auto vu = static_cast<std::size_t>(v);
      if (slot == adj.offsets[vu + 1]) {
        colour[vu] = Black;
        stack.pop_back();
        continue;
      }
      auto k = static_cast<std::size_t>(slot++);
      int e = adj.edge_ids[k];
      if (removed[static_cast<std::size_t>(e)]) continue;
      int w = adj.targets[k];
      auto wu = static_cast<std::size_t>(w);
      if (colour[wu] == Grey) {
        std::vector<int> cycle{e};
        for (int u = v; u != w;) {
          int back = via[static_cast<std::size_t>(u)];
          cycle.push_back(back);
          u = g.edges[static_cast<std::size_t>(back)].src;
        }
        return cycle;
      }
      if (colour[wu] == White) {
        colour[wu] = Grey;
        via[wu] = e;
        stack.emplace_back(w, adj.offsets[wu]);
      }
    }
  }
  return {};
}

}  // namespace

NodeList vat_extract(const Grid& probs, const TokenVocab& vocab, bool logits) {
  const auto expected = static_cast<std::size_t>(vocab.none_id()) + 1;
  if (probs.channels != expected || probs.data.size() != probs.channels * probs.cells()) {
    throw Error(Errc::ShapeMismatch, "grid has " + std::to_string(probs.channels) + " channels, vocab needs " +
                                         std::to_string(expected));
  }
  std::vector<ClassId> best;
  std::vector<float> score;
  if (logits) {
    Grid normalized = probs;
    kernels::softmax_cells(normalized);
    kernels::cell_argmax(normalized, best, score);
  } else {
    kernels::cell_argmax(probs, best, score);
  }
  NodeList nodes;
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (best[i] == vocab.none_id()) continue;
    nodes.push_back({best[i], static_cast<int>(i / probs.width), static_cast<int>(i % probs.width), score[i], -1, -1});
  }
  return nodes;
}

NodeList expand_imaginary(const NodeList& nodes, const TokenVocab& vocab) {
  NodeList out;
  out.reserve(nodes.size() * 2);
  for (const auto& n : nodes) {
    Node copy = n;
    copy.parent = -1;
    out.push_back(copy);
    if (const auto* rule = vocab.rule(n.cls)) {
      const int parent = static_cast<int>(out.size()) - 1;
      for (int g = 0; g < rule->group_count; ++g) {
        out.push_back({vocab.end_id(), n.row, n.col, n.score, parent, -1});
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].source = static_cast<int>(i);
  return out;
}

NodeList apply_corrections(const NodeList& nodes, const ScoreMatrix& self_probs, const TokenVocab& vocab) {
  const auto classes = static_cast<std::size_t>(vocab.none_id()) + 1;
  if (self_probs.rows != nodes.size() || self_probs.cols != classes) {
    throw Error(Errc::ShapeMismatch, "self head is " + size_text(self_probs.rows, self_probs.cols) + ", expected " +
                                         size_text(nodes.size(), classes));
  }
  std::vector<ClassId> label(nodes.size());
  std::vector<char> dropped(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto row = self_probs.row(i);
    label[i] = static_cast<ClassId>(std::max_element(row.begin(), row.end()) - row.begin());
    if (label[i] == vocab.none_id()) dropped[i] = 1;
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    int p = nodes[i].parent;
    if (p >= 0 && dropped[static_cast<std::size_t>(p)]) dropped[i] = 1;
  }
  NodeList out;
  std::vector<int> new_index(nodes.size(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (dropped[i]) continue;
    Node n = nodes[i];
    n.cls = label[i];
    if (n.parent >= 0) n.parent = new_index[static_cast<std::size_t>(n.parent)];
    new_index[i] = static_cast<int>(out.size());
    out.push_back(n);
  }
  return out;
}

ExprGraph build_graph(const NodeList& nodes, const ScoreMatrix& left, const ScoreMatrix& right, double alpha_l2r,
                      double alpha_r2l, const TokenVocab& vocab) {
  if (left.rows != left.cols || right.rows != right.cols || left.rows != right.rows || left.rows < 2) {
    throw Error(Errc::ShapeMismatch, "connectivity matrices are " + size_text(left.rows, left.cols) + " and " +
                                         size_text(right.rows, right.cols));
  }
  check_stochastic(left, "left");
  check_stochastic(right, "right");
  const std::size_t m = left.rows - 2;

  ExprGraph g;
  std::vector<std::size_t> index;  // matrix row of each graph node
  g.nodes.push_back({vocab.sos_id(), std::string(kSosSymbol), -1, -1});
  index.push_back(0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Node& n = nodes[k];
    auto src = static_cast<std::size_t>(n.source >= 0 ? n.source : static_cast<int>(k));
    if (src >= m) throw Error(Errc::ShapeMismatch, "node " + std::to_string(k) + " has no connectivity row");
    g.nodes.push_back({n.cls, vocab.symbol(n.cls), n.row, n.col});
    index.push_back(src + 1);
  }
  g.nodes.push_back({vocab.eos_id(), std::string(kEosSymbol), -1, -1});
  index.push_back(m + 1);

  const int count = static_cast<int>(g.nodes.size());
  g.edges.reserve(static_cast<std::size_t>(count) * static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    if (i == g.eos()) continue;
    for (int j = 1; j < count; ++j) {
      if (i == j) continue;
      auto ii = index[static_cast<std::size_t>(i)];
      auto jj = index[static_cast<std::size_t>(j)];
      double w = alpha_l2r * right(ii, jj) + alpha_r2l * left(jj, ii);
      g.edges.push_back({i, j, w});
    }
  }
  return g;
}

ExprGraph prune_and_acyclify(const ExprGraph& g, double epsilon) {
  const std::size_t e_count = g.edges.size();
  auto adj = out_adjacency(g);
  std::vector<char> removed(e_count, 0);
  std::vector<char> on_path(e_count, 0);
  if (!witness_path(g, adj, removed, on_path)) throw Error(Errc::NoPath, "<eos> unreachable from <sos>");

  auto lighter = [&g](int a, int b) {
    const auto& ea = g.edges[static_cast<std::size_t>(a)];
    const auto& eb = g.edges[static_cast<std::size_t>(b)];
    if (ea.weight != eb.weight) return ea.weight < eb.weight;
    if (ea.src != eb.src) return ea.src < eb.src;
    return ea.dst < eb.dst;
  };
  // Removes edge e unless it is the last link between <sos> and <eos>.
  auto try_remove = [&](int e) {
    auto eu = static_cast<std::size_t>(e);
    removed[eu] = 1;
    if (!on_path[eu]) return true;
    if (witness_path(g, adj, removed, on_path)) return true;
    removed[eu] = 0;
    return false;
  };

  std::vector<int> weak;
  for (std::size_t i = 0; i < e_count; ++i) {
    if (g.edges[i].weight < epsilon) weak.push_back(static_cast<int>(i));
  }
  std::sort(weak.begin(), weak.end(), lighter);
  for (int e : weak) try_remove(e);

  for (auto cycle = find_cycle(g, adj, removed); !cycle.empty(); cycle = find_cycle(g, adj, removed)) {
    std::sort(cycle.begin(), cycle.end(), lighter);
    bool broken = false;
    for (int e : cycle) {
      if (try_remove(e)) {
        broken = true;
        break;
      }
    }
    // A simple witness path cannot hold every edge of a cycle.
    if (!broken) throw Error(Errc::CycleDetected, "cycle could not be broken");
  }

  ExprGraph out;
  out.nodes = g.nodes;
  for (std::size_t i = 0; i < e_count; ++i) {
    if (!removed[i]) out.edges.push_back(g.edges[i]);
  }
  return out;
}

PathResult longest_path(const ExprGraph& g) {
  const std::size_t n = g.nodes.size();
  if (n < 2) throw Error(Errc::NoPath, "graph lacks <sos>/<eos>");
  auto adj = out_adjacency(g);

  std::vector<int> indegree(n, 0);
  for (const auto& e : g.edges) ++indegree[static_cast<std::size_t>(e.dst)];
  std::vector<int> order;
  order.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) order.push_back(static_cast<int>(v));
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    auto v = static_cast<std::size_t>(order[head]);
    for (int k = adj.offsets[v]; k < adj.offsets[v + 1]; ++k) {
      auto w = static_cast<std::size_t>(adj.targets[static_cast<std::size_t>(k)]);
      if (--indegree[w] == 0) order.push_back(static_cast<int>(w));
    }
  }
  if (order.size() != n) throw Error(Errc::CycleDetected, std::to_string(n - order.size()) + " nodes on cycles");

  constexpr double kUnreached = -std::numeric_limits<double>::infinity();
  std::vector<double> best(n, kUnreached);
  std::vector<int> pred(n, -1);
  best[static_cast<std::size_t>(g.sos())] = 0.0;
  for (int v : order) {
    auto vu = static_cast<std::size_t>(v);
    if (best[vu] == kUnreached) continue;
    for (int k = adj.offsets[vu]; k < adj.offsets[vu + 1]; ++k) {
      auto ku = static_cast<std::size_t>(k);
      auto w = static_cast<std::size_t>(adj.targets[ku]);
      double cand = best[vu] + g.edges[static_cast<std::size_t>(adj.edge_ids[ku])].weight;
      if (cand > best[w] || (cand == best[w] && v < pred[w])) {
        best[w] = cand;
        pred[w] = v;
      }
    }
  }
  const auto eos = static_cast<std::size_t>(g.eos());
  if (best[eos] == kUnreached) throw Error(Errc::NoPath, "<eos> unreachable from <sos>");

  PathResult result;
  result.weight = best[eos];
  for (int v = g.eos(); v != -1; v = pred[static_cast<std::size_t>(v)]) result.nodes.push_back(v);
  std::reverse(result.nodes.begin(), result.nodes.end());
  return result;
}

PathResult longest_path(const ExprGraph& g, const TokenVocab& vocab) {
  PathResult result = longest_path(g);
  std::vector<ClassId> tokens;
  for (std::size_t i = 1; i + 1 < result.nodes.size(); ++i) {
    tokens.push_back(g.nodes[static_cast<std::size_t>(result.nodes[i])].cls);
  }
  result.latex = emit_latex_repaired(tokens, vocab);
  return result;
}

DecodeResult decode_full(const Grid& probs, const ScoreMatrix& self_probs, const ScoreMatrix& left,
                         const ScoreMatrix& right, const TokenVocab& vocab, const DecodeConfig& config) {
  DecodeResult result;
  auto t0 = Clock::now();
  NodeList nodes = expand_imaginary(vat_extract(probs, vocab, config.logits), vocab);
  result.times.vat_ms = elapsed_ms(t0);
  if (nodes.empty()) throw Error(Errc::NoPath, "no symbols detected");

  const std::size_t n = nodes.size();
  if (self_probs.rows != n || left.rows != n + 2 || left.cols != n + 2 || right.rows != n + 2 ||
      right.cols != n + 2) {
    throw Error(Errc::NodeCountMismatch, std::to_string(n) + " nodes but self " +
                                             size_text(self_probs.rows, self_probs.cols) + ", left " +
                                             size_text(left.rows, left.cols) + ", right " +
                                             size_text(right.rows, right.cols));
  }
  auto t1 = Clock::now();
  NodeList corrected = apply_corrections(nodes, self_probs, vocab);
  if (corrected.empty()) throw Error(Errc::NoPath, "every node was deleted");
  ExprGraph graph = build_graph(corrected, left, right, config.alpha_l2r, config.alpha_r2l, vocab);
  result.times.pgd_ms = elapsed_ms(t1);

  auto t2 = Clock::now();
  result.graph = prune_and_acyclify(graph, config.epsilon);
  result.path = longest_path(result.graph, vocab);
  result.times.path_ms = elapsed_ms(t2);
  return result;
}

PathResult decode_pipeline(const Grid& probs, const ScoreMatrix& self_probs, const ScoreMatrix& left,
                           const ScoreMatrix& right, const TokenVocab& vocab, const DecodeConfig& config) {
  return decode_full(probs, self_probs, left, right, vocab, config).path;
}

}  // namespace namer
