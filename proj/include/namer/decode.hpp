#pragma once

#include <string>
#include <vector>

#include "namer/graph.hpp"
#include "namer/tensor.hpp"
#include "namer/vocab.hpp"

namespace namer {

struct Node {
  ClassId cls = 0;
  int row = 0;
  int col = 0;
  float score = 0.0F;
  int parent = -1;  // list index of the structural node an ending token belongs to
  int source = -1;  // row of this node in the PGD tensors (0-based, before <sos> offset)
  bool operator==(const Node&) const = default;
};

using NodeList = std::vector<Node>;

/// Per-cell argmax with the none token filtered, in raster order. With
/// `logits` set the grid is softmax-normalized per cell first.
NodeList vat_extract(const Grid& probs, const TokenVocab& vocab, bool logits = false);

/// Inserts the attached ending tokens after every structural node, at the
/// parent's cell. Also numbers every node's `source` by its final position.
NodeList expand_imaginary(const NodeList& nodes, const TokenVocab& vocab);

/// Relabels every node with the argmax of its self-head row. Nodes whose
/// argmax is the none (delete) class are removed together with the ending
/// tokens attached to them.
NodeList apply_corrections(const NodeList& nodes, const ScoreMatrix& self_probs, const TokenVocab& vocab);

inline constexpr double kDefaultEpsilon = 0.5;
inline constexpr double kDefaultAlpha = 1.0;

/// Dense edge scores E(i->j) = a_l2r * right[i][j] + a_r2l * left[j][i] over
/// the nodes plus virtual <sos>/<eos>. Matrix index of a node is source + 1;
/// <sos> is 0 and <eos> is the last row. No self edges, nothing into <sos>,
/// nothing out of <eos>.
ExprGraph build_graph(const NodeList& nodes, const ScoreMatrix& left, const ScoreMatrix& right, double alpha_l2r,
                      double alpha_r2l, const TokenVocab& vocab);

/// Removes sub-epsilon edges in ascending weight order unless that would cut
/// <eos> off from <sos>, then breaks every remaining cycle by deleting its
/// lightest edge whose removal keeps <eos> reachable.
ExprGraph prune_and_acyclify(const ExprGraph& g, double epsilon = kDefaultEpsilon);

struct PathResult {
  std::vector<int> nodes;  // <sos> ... <eos>
  double weight = 0.0;
  std::string latex;
};

/// Maximum-weight <sos> -> <eos> path by dynamic programming over a
/// topological order, O(V + E). Equal totals prefer the smaller predecessor.
/// Fills `nodes` and `weight` only.
PathResult longest_path(const ExprGraph& g);

/// As above, plus LaTeX of the path's non-virtual nodes.
PathResult longest_path(const ExprGraph& g, const TokenVocab& vocab);

struct DecodeConfig {
  double epsilon = kDefaultEpsilon;
  double alpha_l2r = kDefaultAlpha;
  double alpha_r2l = kDefaultAlpha;
  bool logits = false;
};

struct StageTimes {
  double vat_ms = 0.0;   // extraction and expansion
  double pgd_ms = 0.0;   // corrections and graph construction
  double path_ms = 0.0;  // pruning and path selection
};

struct DecodeResult {
  PathResult path;
  ExprGraph graph;  // the pruned graph the path was selected on
  StageTimes times;
};

DecodeResult decode_full(const Grid& probs, const ScoreMatrix& self_probs, const ScoreMatrix& left,
                         const ScoreMatrix& right, const TokenVocab& vocab, const DecodeConfig& config = {});

PathResult decode_pipeline(const Grid& probs, const ScoreMatrix& self_probs, const ScoreMatrix& left,
                           const ScoreMatrix& right, const TokenVocab& vocab, const DecodeConfig& config = {});

}  // namespace namer
