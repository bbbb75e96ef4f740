#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace namer {

enum class Errc {
  // latex / vocab
  EmptyCorpus,
  UnbalancedBraces,
  UnknownControlSequence,
  DanglingGroup,
  VocabMiss,
  IllNested,
  BadVocab,
  // tensor io
  BadMagic,
  UnsupportedFormat,
  DimOverflow,
  TruncatedPayload,
  NonFiniteValue,
  IoFailure,
  // assignment
  StepMismatch,
  EvenKernel,
  ChannelMismatch,
  Infeasible,
  ShapeMismatch,
  NonFinite,
  // decode
  NonStochasticRow,
  NoPath,
  CycleDetected,
  NodeCountMismatch,
  // metrics
  LengthMismatch,
  EmptyInput,
  // synth
  GridTooSmall,
  TooLarge,
  // cli
  BadConfig,
};

std::string_view errc_name(Errc code) noexcept;

/// Domain error raised by every library operation. The code identifies the
/// failure class; what() carries a human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace namer
