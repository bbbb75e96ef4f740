#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "namer/decode.hpp"
#include "namer/error.hpp"
#include "namer/metrics.hpp"
#include "namer/synth.hpp"

using namespace namer;
using namespace namer::synth;

namespace {

std::string golden(const char* name) {
  std::ifstream in(std::string(NAMER_TEST_DATA) + "/" + name);
  std::string line;
  std::getline(in, line);
  return line;
}

double exprate(std::uint64_t first, int count, const NoiseSpec& noise, const TokenVocab& v) {
  std::vector<std::string> preds, refs;
  for (int i = 0; i < count; ++i) {
    auto s = make_sample(first + static_cast<std::uint64_t>(i), 2, v, noise);
    refs.push_back(s.latex);
    try {
      preds.push_back(decode_pipeline(s.probs, s.self_probs, s.left, s.right, v).latex);
    } catch (const Error&) {
      preds.emplace_back();
    }
  }
  return evaluate(preds, refs, v).exprate;
}

}  // namespace

TEST_CASE("depth zero yields one symbol") {
  TokenVocab v = synth_vocab();
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(gen_expression(seed, 0, v).seq.size() == 1);
}

TEST_CASE("generation is deterministic and matches the golden string") {
  TokenVocab v = synth_vocab();
  CHECK(gen_expression(42, 2, v).latex == gen_expression(42, 2, v).latex);
  CHECK(gen_expression(43, 3, v).latex == golden("gen_seed43_depth3.txt"));
  auto a = make_sample(5, 2, v, {0.2, 0.1, 0.1, 0.2, 0.1});
  auto b = make_sample(5, 2, v, {0.2, 0.1, 0.1, 0.2, 0.1});
  CHECK(a.probs == b.probs);
  CHECK(a.left == b.left);
  CHECK(a.self_probs == b.self_probs);
}

TEST_CASE("generated expressions parse and round trip") {
  TokenVocab v = synth_vocab();
  std::set<std::string> distinct;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    auto g = gen_expression(seed, 3, v);
    distinct.insert(g.latex);
    auto parsed = parse_latex(g.latex, v);
    if (parsed.tokens != g.seq.tokens) FAIL_CHECK(g.latex);
  }
  CHECK(distinct.size() > 1000);
}

TEST_CASE("rendered tensors are well formed") {
  TokenVocab v = synth_vocab();
  auto s = make_sample(11, 3, v, {0.3, 0.3, 0.1, 0.2, 0.2});
  for (std::size_t c = 0; c < s.probs.cells(); ++c) {
    double sum = 0.0;
    for (std::size_t ch = 0; ch < s.probs.channels; ++ch) sum += s.probs.data[ch * s.probs.cells() + c];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
  }
  for (std::size_t k = 0; k < s.attn.steps; ++k) {
    double sum = 0.0;
    for (float a : s.attn.slice(k)) sum += a;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
  }
  CHECK(s.left.rows == s.self_probs.rows + 2);
  CHECK(s.attn.steps == s.seq.size());
}

TEST_CASE("too small a grid is reported") {
  TokenVocab v = synth_vocab();
  CHECK_THROWS_AS(make_sample(11, 3, v, {}, 2, 3), Error);
}

TEST_CASE("zero noise closes the loop") { CHECK(exprate(100, 200, {}, synth_vocab()) == 1.0); }

TEST_CASE("a single flip is corrected by the self head") {
  TokenVocab v = synth_vocab();
  NoiseSpec noise{1.0, 0.0, 0.1, 0.0, 0.0, 1, -1};
  int flipped = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto s = make_sample(seed, 2, v, noise);
    flipped += s.flips;
    CHECK(s.flips == 1);
    CHECK(decode_pipeline(s.probs, s.self_probs, s.left, s.right, v).latex == s.latex);
  }
  CHECK(flipped == 100);
}

TEST_CASE("a spurious token is deleted") {
  TokenVocab v = synth_vocab();
  NoiseSpec noise{0.0, 1.0, 0.1, 0.0, 0.0, -1, 1};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto s = make_sample(seed, 2, v, noise);
    CHECK(s.spurious == 1);
    CHECK(decode_pipeline(s.probs, s.self_probs, s.left, s.right, v).latex == s.latex);
  }
}

TEST_CASE("accuracy does not improve as flips become more likely") {
  TokenVocab v = synth_vocab();
  double prev = 1.0;
  for (double f : {0.0, 0.1, 0.3, 0.6}) {
    double rate = exprate(0, 300, {f, 0.0, 0.1, 0.0, 0.15}, v);
    CHECK(rate <= prev + 1e-12);
    prev = rate;
  }
  CHECK(prev < 1.0);
}
