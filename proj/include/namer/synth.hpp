#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "namer/latex.hpp"
#include "namer/tensor.hpp"
#include "namer/vocab.hpp"

namespace namer::synth {

/// Seeded stream with platform-independent draws (std distributions are
/// implementation-defined, so they are not used here).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }
  std::size_t index(std::size_t n);  // uniform in [0, n)
  double uniform();                  // uniform in [0, 1)
  double normal();                   // standard normal (Box-Muller)

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Vocabulary covering every symbol the generator can emit.
TokenVocab synth_vocab();

struct GeneratedExpression {
  std::string latex;  // canonical emission
  CanonicalTokenSeq seq;
};

/// Depth-limited grammar over symbols, + - =, \frac, \sqrt, ^ and _.
/// Depth 0 yields a single symbol. Deterministic per seed.
GeneratedExpression gen_expression(std::uint64_t seed, int max_depth, const TokenVocab& vocab);

struct NoiseSpec {
  double flip_prob = 0.0;      // per visible token: VAT predicts another visible class
  double spurious_prob = 0.0;  // per label token: one extra visible token on an empty cell
  double temperature = 0.1;    // softmax temperature of the PGD heads
  double conn_noise = 0.0;     // std-dev of Gaussian logit noise on the left/right heads
  double self_noise = 0.0;     // std-dev of Gaussian logit noise on the self head
  int max_flips = -1;          // caps, -1 for none
  int max_spurious = -1;
};

/// Self-head logit given to the class a flipped token was mistaken for.
inline constexpr double kConfusionLogit = 0.8;

struct SynthSample {
  std::string latex;
  CanonicalTokenSeq seq;
  std::vector<Cell> layout;  // per canonical token; ending tokens share their owner's cell
  Grid probs;
  AttentionStack attn;
  ScoreMatrix self_probs;
  ScoreMatrix left;
  ScoreMatrix right;
  NoiseSpec noise;
  int flips = 0;
  int spurious = 0;
};

/// Lays out the predictable tokens as nested boxes (scripts raised/lowered,
/// fractions stacked) and renders the grid, teacher attention and the three
/// PGD heads consistent with decode-time node order. Throws GridTooSmall.
SynthSample layout_and_render(const CanonicalTokenSeq& seq, const TokenVocab& vocab, std::size_t height,
                              std::size_t width, const NoiseSpec& noise, std::uint64_t seed);

inline constexpr std::size_t kDefaultHeight = 16;
inline constexpr std::size_t kDefaultWidth = 96;

/// gen_expression followed by layout_and_render with derived seeds.
SynthSample make_sample(std::uint64_t seed, int max_depth, const TokenVocab& vocab, const NoiseSpec& noise = {},
                        std::size_t height = kDefaultHeight, std::size_t width = kDefaultWidth);

}  // namespace namer::synth
