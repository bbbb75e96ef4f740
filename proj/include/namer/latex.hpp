#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "namer/vocab.hpp"

namespace namer {

/// A LaTeX label linearized into node tokens: '{' absorbed, every group
/// closing '}' reified as the imaginary-end class.
struct CanonicalTokenSeq {
  std::vector<ClassId> tokens;
  std::string source;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

/// Splits a LaTeX string into raw tokens. Whitespace separates tokens; an
/// unspaced chunk is split into control sequences and, when a vocab is given,
/// greedy longest vocab matches (single characters otherwise).
std::vector<std::string> tokenize_latex(std::string_view latex,
                                        const TokenVocab* vocab = nullptr);

/// Vocab-independent parse to symbol strings (ending tokens spelled "}").
std::vector<std::string> parse_symbols(std::string_view latex,
                                       const TokenVocab* vocab = nullptr);

CanonicalTokenSeq parse_latex(std::string_view latex, const TokenVocab& vocab);

/// Nesting of a token sequence: for each structural token the number of groups
/// it opens, and for each ending token the index of the structural token it
/// closes (-1 elsewhere).
struct Nesting {
  std::vector<int> arity;
  std::vector<int> owner;
};

/// Resolves which structural token every ending token closes. \sqrt may take
/// one or two groups; the first consistent assignment (index-less preferred)
/// is returned. std::nullopt when the sequence cannot be nested.
std::optional<Nesting> resolve_nesting(const std::vector<ClassId>& tokens,
                                       const TokenVocab& vocab);

/// Inverse of parse_latex up to brace normalization. Throws IllNested.
std::string emit_latex(const CanonicalTokenSeq& seq, const TokenVocab& vocab);

/// Best-effort emission for decoded paths: stray ending tokens are dropped and
/// groups left open are closed at the end.
std::string emit_latex_repaired(const std::vector<ClassId>& tokens,
                                const TokenVocab& vocab);

/// Ground-truth chain targets with virtual <sos> at index 0 and <eos> at L+1:
/// node i (0-based) has left target i and right target i+2.
struct NodeTargets {
  std::vector<ClassId> self;
  std::vector<int> left;
  std::vector<int> right;
};

NodeTargets gt_targets(const CanonicalTokenSeq& seq);

}  // namespace namer
