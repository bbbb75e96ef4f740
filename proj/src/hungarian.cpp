#include "namer/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "namer/error.hpp"

namespace namer {

double assignment_cost(const CostMatrix& cost, const std::vector<int>& col_of_row) {
  double total = 0.0;
  for (std::size_t r = 0; r < col_of_row.size(); ++r) total += cost(r, static_cast<std::size_t>(col_of_row[r]));
  return total;
}

Assignment hungarian(const CostMatrix& cost) {
  const std::size_t n = cost.rows;
  const std::size_t m = cost.cols;
  if (n > m) {
    throw Error(Errc::Infeasible, std::to_string(n) + " rows cannot be matched into " + std::to_string(m) + " columns");
  }
  for (double v : cost.data) {
    if (!std::isfinite(v)) throw Error(Errc::NonFinite, "cost matrix entry");
  }
  Assignment result;
  if (n == 0) return result;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a sentinel holding the row being inserted.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> row_of_col(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of_col[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    // Flip the augmenting path.
    do {
      std::size_t j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.col_of_row.assign(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (row_of_col[j] != 0) result.col_of_row[row_of_col[j] - 1] = static_cast<int>(j - 1);
  }
  result.cost = assignment_cost(cost, result.col_of_row);
  return result;
}

}  // namespace namer
