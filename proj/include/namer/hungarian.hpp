#pragma once

#include <cstddef>
#include <vector>

namespace namer {

/// Dense L x M cost matrix, row-major.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct Assignment {
  std::vector<int> col_of_row;  // one distinct column per row
  double cost = 0.0;            // sum of the chosen entries, accumulated in row order
};

/// Rectangular Kuhn-Munkres: minimum-cost assignment of every row to a
/// distinct column (rows <= cols). Shortest augmenting paths with dual
/// potentials, O(rows^2 * cols). Among equal reduced costs the lowest column
/// index wins, so results are deterministic. Throws Infeasible if rows > cols.
Assignment hungarian(const CostMatrix& cost);

/// Sum of cost(r, col_of_row[r]) in row order.
double assignment_cost(const CostMatrix& cost, const std::vector<int>& col_of_row);

}  // namespace namer
