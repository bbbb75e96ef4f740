#pragma once

// Exhaustive reference solvers for small instances. Deliberately naive and
// independent of the main implementations; used only for verification.

#include <vector>

#include "namer/decode.hpp"
#include "namer/graph.hpp"
#include "namer/hungarian.hpp"
#include "namer/vocab.hpp"

namespace namer::oracle {

inline constexpr std::size_t kMaxRows = 7;
inline constexpr std::size_t kMaxCols = 12;
inline constexpr std::size_t kMaxNodes = 10;
inline constexpr std::size_t kMaxLength = 12;

/// Minimum over every injective row -> column map. Throws TooLarge.
Assignment hungarian(const CostMatrix& cost);

/// Maximum-weight <sos> -> <eos> path over all simple paths. Ties keep the
/// lexicographically smallest node sequence. Throws TooLarge.
PathResult longest_path(const ExprGraph& g);

/// Levenshtein distance from the full recursive definition. Throws TooLarge.
int edit_distance(const std::vector<ClassId>& a, const std::vector<ClassId>& b);

}  // namespace namer::oracle
