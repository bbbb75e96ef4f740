#include "namer/assignment.hpp"

#include <cmath>
#include <string>

#include "namer/error.hpp"
#include "namer/kernels.hpp"

namespace namer {

bool vat_predictable(ClassId id, const TokenVocab& vocab) {
  Role r = vocab.role(id);
  return r == Role::Visible || r == Role::HSE || r == Role::IRS;
}

namespace {

Cell slice_argmax(std::span<const float> slice, std::size_t width) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < slice.size(); ++i) {
    if (slice[i] > slice[best]) best = i;
  }
  return {static_cast<int>(best / width), static_cast<int>(best % width)};
}

double row_nll(std::span<const float> row, std::size_t target, const char* head) {
  if (target >= row.size()) throw Error(Errc::ShapeMismatch, std::string(head) + " target out of range");
  double p = row[target];
  double v = -std::log(p);
  if (!std::isfinite(v)) throw Error(Errc::NonFinite, std::string(head) + " probability is zero");
  return v;
}

}  // namespace

PositionEstimate estimate_positions(const AttentionStack& attn, const CanonicalTokenSeq& label,
                                    const TokenVocab& vocab) {
  PositionEstimate est;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (vat_predictable(label.tokens[i], vocab)) {
      est.classes.push_back(label.tokens[i]);
      est.label_index.push_back(static_cast<int>(i));
    }
  }
  const std::size_t predictable = est.classes.size();
  const bool aligned_to_label = attn.steps >= label.size();
  if (!aligned_to_label && attn.steps < predictable) {
    throw Error(Errc::StepMismatch, std::to_string(attn.steps) + " attention steps for " +
                                        std::to_string(predictable) + " predictable tokens");
  }
  est.cells.reserve(predictable);
  for (std::size_t k = 0; k < predictable; ++k) {
    std::size_t step = aligned_to_label ? static_cast<std::size_t>(est.label_index[k]) : k;
    est.cells.push_back(slice_argmax(attn.slice(step), attn.width));
  }
  return est;
}

CostMatrix build_cost(const Grid& probs, const PositionEstimate& est, const TokenVocab& vocab, int km) {
  if (km <= 0 || km % 2 == 0) throw Error(Errc::EvenKernel, "km = " + std::to_string(km));
  const auto expected = static_cast<std::size_t>(vocab.none_id()) + 1;
  if (probs.channels != expected) {
    throw Error(Errc::ChannelMismatch, "grid has " + std::to_string(probs.channels) + " channels, vocab needs " +
                                           std::to_string(expected));
  }
  for (const auto& c : est.cells) {
    if (c.row < 0 || c.col < 0 || static_cast<std::size_t>(c.row) >= probs.height ||
        static_cast<std::size_t>(c.col) >= probs.width) {
      throw Error(Errc::ShapeMismatch, "position estimate outside the grid");
    }
  }
  CostMatrix cost;
  kernels::window_cost(probs, est.cells, est.classes, km, kBigM, cost);
  return cost;
}

AssignmentTarget make_targets(const Assignment& assignment, const PositionEstimate& est,
                              const CanonicalTokenSeq& label, const TokenVocab& vocab, std::size_t height,
                              std::size_t width) {
  if (assignment.col_of_row.size() != est.classes.size()) {
    throw Error(Errc::ShapeMismatch, "assignment does not cover every predictable token");
  }
  AssignmentTarget t;
  t.height = height;
  t.width = width;
  t.grid.assign(height * width, vocab.none_id());
  t.node_cells.assign(label.size(), Cell{-1, -1});
  for (std::size_t k = 0; k < est.classes.size(); ++k) {
    auto cell = static_cast<std::size_t>(assignment.col_of_row[k]);
    if (cell >= t.grid.size()) throw Error(Errc::ShapeMismatch, "assigned cell outside the grid");
    t.grid[cell] = est.classes[k];
    t.node_cells[static_cast<std::size_t>(est.label_index[k])] =
        Cell{static_cast<int>(cell / width), static_cast<int>(cell % width)};
  }
  if (!label.empty()) {
    auto nest = resolve_nesting(label.tokens, vocab);
    if (!nest) throw Error(Errc::IllNested, "label cannot be nested");
    for (std::size_t i = 0; i < label.size(); ++i) {
      int owner = nest->owner[i];
      if (owner >= 0) t.node_cells[i] = t.node_cells[static_cast<std::size_t>(owner)];
    }
  }
  t.nodes = gt_targets(label);
  return t;
}

AssignmentTarget match_targets(const Grid& probs, const AttentionStack& attn, const CanonicalTokenSeq& label,
                               const TokenVocab& vocab, int km) {
  auto est = estimate_positions(attn, label, vocab);
  auto cost = build_cost(probs, est, vocab, km);
  auto assignment = hungarian(cost);
  return make_targets(assignment, est, label, vocab, probs.height, probs.width);
}

double loss_vat(const Grid& probs, const std::vector<ClassId>& target_grid) {
  if (target_grid.size() != probs.cells()) {
    throw Error(Errc::ShapeMismatch, "target grid has " + std::to_string(target_grid.size()) + " cells, P has " +
                                         std::to_string(probs.cells()));
  }
  for (ClassId c : target_grid) {
    if (c < 0 || static_cast<std::size_t>(c) >= probs.channels) {
      throw Error(Errc::ShapeMismatch, "target class outside P's channels");
    }
  }
  if (target_grid.empty()) return 0.0;
  double sum = kernels::nll_sum(probs, target_grid);
  if (!std::isfinite(sum)) throw Error(Errc::NonFinite, "zero probability on a target class");
  return sum / static_cast<double>(target_grid.size());
}

PgdLoss loss_pgd(const ScoreMatrix& self_probs, const ScoreMatrix& left, const ScoreMatrix& right,
                 const NodeTargets& targets) {
  const std::size_t n = targets.self.size();
  if (self_probs.rows != n || targets.left.size() != n || targets.right.size() != n) {
    throw Error(Errc::ShapeMismatch, "self head rows must equal the node count");
  }
  if (left.rows != n + 2 || left.cols != n + 2 || right.rows != n + 2 || right.cols != n + 2) {
    throw Error(Errc::ShapeMismatch, "connectivity matrices must be (N+2)x(N+2)");
  }
  PgdLoss loss;
  if (n == 0) return loss;
  for (std::size_t i = 0; i < n; ++i) {
    loss.self += row_nll(self_probs.row(i), static_cast<std::size_t>(targets.self[i]), "self");
    loss.left += row_nll(left.row(i + 1), static_cast<std::size_t>(targets.left[i]), "left");
    loss.right += row_nll(right.row(i + 1), static_cast<std::size_t>(targets.right[i]), "right");
  }
  const auto dn = static_cast<double>(n);
  loss.self /= dn;
  loss.left /= dn;
  loss.right /= dn;
  loss.total = loss.self + loss.left + loss.right;
  return loss;
}

Grid one_hot_grid(const std::vector<ClassId>& target_grid, std::size_t channels, std::size_t height,
                  std::size_t width) {
  if (target_grid.size() != height * width) throw Error(Errc::ShapeMismatch, "target grid size");
  Grid g(channels, height, width, 0.0F);
  for (std::size_t i = 0; i < target_grid.size(); ++i) {
    g.data[static_cast<std::size_t>(target_grid[i]) * g.cells() + i] = 1.0F;
  }
  return g;
}

}  // namespace namer
