#pragma once

#include <string>
#include <vector>

#include "namer/latex.hpp"
#include "namer/vocab.hpp"

namespace test {

inline std::vector<std::string> symbols(const namer::CanonicalTokenSeq& seq, const namer::TokenVocab& vocab) {
  std::vector<std::string> out;
  for (auto id : seq.tokens) out.push_back(vocab.symbol(id));
  return out;
}

inline std::vector<namer::ClassId> ids(const std::vector<std::string>& syms, const namer::TokenVocab& vocab) {
  std::vector<namer::ClassId> out;
  for (const auto& s : syms) out.push_back(vocab.id_of(s));
  return out;
}

inline namer::CanonicalTokenSeq seq_of(const std::vector<std::string>& syms, const namer::TokenVocab& vocab) {
  return {ids(syms, vocab), {}};
}

}  // namespace test
