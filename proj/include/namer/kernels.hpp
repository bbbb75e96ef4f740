#pragma once

// Data-parallel inner loops of the pipeline. The default namespace holds the
// OpenMP versions; `serial` keeps straightforward single-threaded references
// with identical semantics, used by the tests and the benchmark.

#include <span>
#include <vector>

#include "namer/hungarian.hpp"
#include "namer/tensor.hpp"
#include "namer/vocab.hpp"

namespace namer::kernels {

/// Per-cell argmax over channels; ties resolve to the lowest channel.
void cell_argmax(const Grid& grid, std::vector<ClassId>& best, std::vector<float>& score);

/// In-place softmax over channels at every cell.
void softmax_cells(Grid& grid);

/// Windowed matching cost: row l, cell c is |P[cls_l](c) - 1| when c lies in
/// the km x km window centred on pos_l, else the big-M value.
void window_cost(const Grid& probs, std::span<const Cell> pos, std::span<const ClassId> cls, int km,
                 double big_m, CostMatrix& out);

/// Sum over cells of -log P[target(c)](c), accumulated in double.
double nll_sum(const Grid& probs, std::span<const ClassId> target);

/// Number of OpenMP threads the kernels will use (1 without OpenMP).
int max_threads() noexcept;

namespace serial {
void cell_argmax(const Grid& grid, std::vector<ClassId>& best, std::vector<float>& score);
void softmax_cells(Grid& grid);
void window_cost(const Grid& probs, std::span<const Cell> pos, std::span<const ClassId> cls, int km,
                 double big_m, CostMatrix& out);
double nll_sum(const Grid& probs, std::span<const ClassId> target);
}  // namespace serial

}  // namespace namer::kernels
