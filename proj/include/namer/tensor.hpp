#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace namer {

/// A cell of the H x W feature map.
struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

/// Untyped dense f32 tensor as stored on disk: row-major, first dim outermost.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const noexcept {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
  bool operator==(const Tensor&) const = default;
};

/// Probability grid over (K+1) channels of an H x W feature map.
struct Grid {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;

  Grid() = default;
  Grid(std::size_t c, std::size_t h, std::size_t w, float fill = 0.0F)
      : channels(c), height(h), width(w), data(c * h * w, fill) {}

  std::size_t cells() const noexcept { return height * width; }
  float& at(std::size_t c, std::size_t r, std::size_t col) { return data[(c * height + r) * width + col]; }
  float at(std::size_t c, std::size_t r, std::size_t col) const { return data[(c * height + r) * width + col]; }
  std::span<const float> channel(std::size_t c) const { return {data.data() + c * cells(), cells()}; }
  bool operator==(const Grid&) const = default;
};

/// Teacher attention: one H x W slice per decoding step.
struct AttentionStack {
  std::size_t steps = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;

  AttentionStack() = default;
  AttentionStack(std::size_t l, std::size_t h, std::size_t w)
      : steps(l), height(h), width(w), data(l * h * w, 0.0F) {}

  std::span<const float> slice(std::size_t step) const {
    return {data.data() + step * height * width, height * width};
  }
  std::span<float> slice(std::size_t step) { return {data.data() + step * height * width, height * width}; }
  bool operator==(const AttentionStack&) const = default;
};

/// Dense row-major N x M matrix of scores or probabilities.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  ScoreMatrix() = default;
  ScoreMatrix(std::size_t r, std::size_t c, float fill = 0.0F) : rows(r), cols(c), data(r * c, fill) {}

  float& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  bool operator==(const ScoreMatrix&) const = default;
};

// Conversions check rank and move the payload.
Grid as_grid(Tensor t);
AttentionStack as_attention(Tensor t);
ScoreMatrix as_matrix(Tensor t);
Tensor to_tensor(const Grid& g);
Tensor to_tensor(const AttentionStack& a);
Tensor to_tensor(const ScoreMatrix& m);

}  // namespace namer
