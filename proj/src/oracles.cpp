#include "namer/oracles.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "namer/error.hpp"

namespace namer::oracle {

Assignment hungarian(const CostMatrix& cost) {
  if (cost.rows > kMaxRows || cost.cols > kMaxCols) {
    throw Error(Errc::TooLarge, "oracle limited to " + std::to_string(kMaxRows) + "x" + std::to_string(kMaxCols));
  }
  if (cost.rows > cost.cols) throw Error(Errc::Infeasible, "more rows than columns");
  Assignment best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<int> pick(cost.rows);
  std::vector<char> used(cost.cols, 0);
  std::function<void(std::size_t)> recurse = [&](std::size_t r) {
    if (r == cost.rows) {
      double total = 0.0;
      for (std::size_t i = 0; i < cost.rows; ++i) total += cost(i, static_cast<std::size_t>(pick[i]));
      if (total < best.cost) {
        best.cost = total;
        best.col_of_row = pick;
      }
      return;
    }
    for (std::size_t c = 0; c < cost.cols; ++c) {
      if (used[c]) continue;
      used[c] = 1;
      pick[r] = static_cast<int>(c);
      recurse(r + 1);
      used[c] = 0;
    }
  };
  recurse(0);
  if (cost.rows == 0) best.cost = 0.0;
  return best;
}

PathResult longest_path(const ExprGraph& g) {
  const std::size_t n = g.nodes.size();
  if (n > kMaxNodes) throw Error(Errc::TooLarge, "oracle limited to " + std::to_string(kMaxNodes) + " nodes");
  if (n < 2) throw Error(Errc::NoPath, "graph lacks <sos>/<eos>");
  PathResult best;
  bool found = false;
  std::vector<int> path{g.sos()};
  std::vector<char> on(n, 0);
  on[0] = 1;
  std::function<void(int, double)> walk = [&](int v, double w) {
    if (v == g.eos()) {
      if (!found || w > best.weight || (w == best.weight && path < best.nodes)) {
        best.nodes = path;
        best.weight = w;
        found = true;
      }
      return;
    }
    for (const auto& e : g.edges) {
      if (e.src != v || on[static_cast<std::size_t>(e.dst)]) continue;
      on[static_cast<std::size_t>(e.dst)] = 1;
      path.push_back(e.dst);
      walk(e.dst, w + e.weight);
      path.pop_back();
      on[static_cast<std::size_t>(e.dst)] = 0;
    }
  };
  walk(g.sos(), 0.0);
  if (!found) throw Error(Errc::NoPath, "<eos> unreachable");
  return best;
}

int edit_distance(const std::vector<ClassId>& a, const std::vector<ClassId>& b) {
  if (a.size() > kMaxLength || b.size() > kMaxLength) {
    throw Error(Errc::TooLarge, "oracle limited to length " + std::to_string(kMaxLength));
  }
  std::map<std::pair<std::size_t, std::size_t>, int> memo;
  std::function<int(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) -> int {
    if (i == 0) return static_cast<int>(j);
    if (j == 0) return static_cast<int>(i);
    auto it = memo.find({i, j});
    if (it != memo.end()) return it->second;
    int r = std::min({d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1)});
    memo[{i, j}] = r;
    return r;
  };
  return d(a.size(), b.size());
}

}  // namespace namer::oracle
