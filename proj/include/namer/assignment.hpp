#pragma once

#include <vector>

#include "namer/hungarian.hpp"
#include "namer/latex.hpp"
#include "namer/tensor.hpp"
#include "namer/vocab.hpp"

namespace namer {

inline constexpr double kBigM = 1e6;
inline constexpr int kDefaultKm = 5;

/// Estimated cell of every VAT-predictable label token, in label order.
struct PositionEstimate {
  std::vector<Cell> cells;
  std::vector<ClassId> classes;
  std::vector<int> label_index;  // index into the canonical sequence
};

/// True for tokens the tokenizer grid can predict (visible and structural).
bool vat_predictable(ClassId id, const TokenVocab& vocab);

/// Argmax cell of each predictable token's teacher-attention slice; ties go to
/// the smallest row, then column. With at least as many slices as canonical
/// tokens, slice i belongs to token i and ending-token slices are skipped.
/// With fewer, the first slices are taken to be the predictable tokens only.
PositionEstimate estimate_positions(const AttentionStack& attn, const CanonicalTokenSeq& label,
                                    const TokenVocab& vocab);

/// L x (H*W) matching cost restricted to a km x km window around each
/// estimate; entries outside a window are kBigM.
CostMatrix build_cost(const Grid& probs, const PositionEstimate& est, const TokenVocab& vocab,
                      int km = kDefaultKm);

/// Training targets derived from one matching.
struct AssignmentTarget {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<ClassId> grid;       // H*W class ids, none token where unassigned
  std::vector<Cell> node_cells;    // every canonical token; ends take their owner's cell
  NodeTargets nodes;               // chain self/left/right targets

  ClassId at(std::size_t r, std::size_t c) const { return grid[r * width + c]; }
};

AssignmentTarget make_targets(const Assignment& assignment, const PositionEstimate& est,
                              const CanonicalTokenSeq& label, const TokenVocab& vocab, std::size_t height,
                              std::size_t width);

/// estimate_positions -> build_cost -> hungarian -> make_targets.
AssignmentTarget match_targets(const Grid& probs, const AttentionStack& attn, const CanonicalTokenSeq& label,
                               const TokenVocab& vocab, int km = kDefaultKm);

/// Mean over cells of -log P[target](cell).
double loss_vat(const Grid& probs, const std::vector<ClassId>& target_grid);

struct PgdLoss {
  double self = 0.0;
  double left = 0.0;
  double right = 0.0;
  double total = 0.0;
};

/// Mean cross-entropy of each head. self_probs is N x (K+1); left/right are
/// (N+2) x (N+2) with <sos> at 0 and <eos> at N+1, and only the N real node
/// rows 1..N are scored.
PgdLoss loss_pgd(const ScoreMatrix& self_probs, const ScoreMatrix& left, const ScoreMatrix& right,
                 const NodeTargets& targets);

inline constexpr double kDefaultLambda = 0.5;

/// L_all = L_vat + lambda * L_pgd.
inline double loss_all(double vat, const PgdLoss& pgd, double lambda = kDefaultLambda) {
  return vat + lambda * pgd.total;
}

/// One-hot grid of the target classes, K+1 channels.
Grid one_hot_grid(const std::vector<ClassId>& target_grid, std::size_t channels, std::size_t height,
                  std::size_t width);

}  // namespace namer
