#include "namer/kernels.hpp"

#include <cmath>
#include <cstdlib>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace namer::kernels {

namespace {

inline bool in_window(int r, int c, const Cell& centre, int half) {
  return std::abs(r - centre.row) <= half && std::abs(c - centre.col) <= half;
}

inline void argmax_at(const Grid& g, std::size_t cell, ClassId& best, float& score) {
  const std::size_t cells = g.cells();
  best = 0;
  score = g.data[cell];
  for (std::size_t ch = 1; ch < g.channels; ++ch) {
    float v = g.data[ch * cells + cell];
    if (v > score) {
      score = v;
      best = static_cast<ClassId>(ch);
    }
  }
}

inline void softmax_at(Grid& g, std::size_t cell) {
  const std::size_t cells = g.cells();
  float mx = g.data[cell];
  for (std::size_t ch = 1; ch < g.channels; ++ch) mx = std::max(mx, g.data[ch * cells + cell]);
  double sum = 0.0;
  for (std::size_t ch = 0; ch < g.channels; ++ch) {
    float e = std::exp(g.data[ch * cells + cell] - mx);
    g.data[ch * cells + cell] = e;
    sum += e;
  }
  for (std::size_t ch = 0; ch < g.channels; ++ch) {
    g.data[ch * cells + cell] = static_cast<float>(g.data[ch * cells + cell] / sum);
  }
}

inline void cost_row(const Grid& p, const Cell& centre, ClassId cls, int half, double big_m, double* out) {
  const int h = static_cast<int>(p.height);
  const int w = static_cast<int>(p.width);
  const float* plane = p.data.data() + static_cast<std::size_t>(cls) * p.cells();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::size_t cell = static_cast<std::size_t>(r) * p.width + static_cast<std::size_t>(c);
      // dist * mask + (1 - mask) * big_m with a 0/1 mask.
      out[cell] = in_window(r, c, centre, half) ? std::fabs(static_cast<double>(plane[cell]) - 1.0) : big_m;
    }
  }
}

}  // namespace

int max_threads() noexcept {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void cell_argmax(const Grid& grid, std::vector<ClassId>& best, std::vector<float>& score) {
  const auto cells = static_cast<std::ptrdiff_t>(grid.cells());
  best.resize(grid.cells());
  score.resize(grid.cells());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < cells; ++i) {
    argmax_at(grid, static_cast<std::size_t>(i), best[static_cast<std::size_t>(i)],
              score[static_cast<std::size_t>(i)]);
  }
}

void softmax_cells(Grid& grid) {
  const auto cells = static_cast<std::ptrdiff_t>(grid.cells());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < cells; ++i) softmax_at(grid, static_cast<std::size_t>(i));
}

void window_cost(const Grid& probs, std::span<const Cell> pos, std::span<const ClassId> cls, int km,
                 double big_m, CostMatrix& out) {
  out = CostMatrix(pos.size(), probs.cells());
  const auto rows = static_cast<std::ptrdiff_t>(pos.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t l = 0; l < rows; ++l) {
    auto lu = static_cast<std::size_t>(l);
    cost_row(probs, pos[lu], cls[lu], km / 2, big_m, out.data.data() + lu * out.cols);
  }
}

double nll_sum(const Grid& probs, std::span<const ClassId> target) {
  const auto cells = static_cast<std::ptrdiff_t>(probs.cells());
  const std::size_t stride = probs.cells();
  double sum = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : sum)
  for (std::ptrdiff_t i = 0; i < cells; ++i) {
    auto iu = static_cast<std::size_t>(i);
    sum += -std::log(static_cast<double>(probs.data[static_cast<std::size_t>(target[iu]) * stride + iu]));
  }
  return sum;
}

namespace serial {

void cell_argmax(const Grid& grid, std::vector<ClassId>& best, std::vector<float>& score) {
  best.resize(grid.cells());
  score.resize(grid.cells());
  for (std::size_t i = 0; i < grid.cells(); ++i) argmax_at(grid, i, best[i], score[i]);
}

void softmax_cells(Grid& grid) {
  for (std::size_t i = 0; i < grid.cells(); ++i) softmax_at(grid, i);
}

void window_cost(const Grid& probs, std::span<const Cell> pos, std::span<const ClassId> cls, int km,
                 double big_m, CostMatrix& out) {
  out = CostMatrix(pos.size(), probs.cells());
  for (std::size_t l = 0; l < pos.size(); ++l) {
    cost_row(probs, pos[l], cls[l], km / 2, big_m, out.data.data() + l * out.cols);
  }
}

double nll_sum(const Grid& probs, std::span<const ClassId> target) {
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.cells(); ++i) {
    sum += -std::log(static_cast<double>(probs.data[static_cast<std::size_t>(target[i]) * probs.cells() + i]));
  }
  return sum;
}

}  // namespace serial

}  // namespace namer::kernels
