#include <doctest.h>

#include <algorithm>
#include <random>

#include "namer/error.hpp"
#include "namer/latex.hpp"
#include "namer/vocab.hpp"
#include "support.hpp"

using namespace namer;
using test::ids;
using test::seq_of;
using test::symbols;

namespace {

TokenVocab demo_vocab() {
  return build_vocab({"x ^ { y z } + 1", "\\frac { a } { b } - c", "\\sqrt [ 3 ] { x } = 2", "\\sum \\limits _ { n }",
                      "\\overline { q } \\dot { p }"});
}

Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::EmptyInput;
}

}  // namespace

TEST_CASE("build_vocab assigns roles and places specials after predictable classes") {
  TokenVocab v = build_vocab({"x ^ { 2 }"});
  REQUIRE(v.size() == 7);
  CHECK(v.role(v.id_of("x")) == Role::Visible);
  CHECK(v.role(v.id_of("2")) == Role::Visible);
  CHECK(v.role(v.id_of("^")) == Role::IRS);
  CHECK(v.role(v.end_id()) == Role::ImaginaryEnd);
  CHECK(v.predictable_count() == 4);
  CHECK(v.none_id() == 4);
  CHECK(v.sos_id() == 5);
  CHECK(v.eos_id() == 6);
  // lexicographic among predictable symbols
  CHECK(v.id_of("2") < v.id_of("^"));
  CHECK(v.id_of("^") < v.id_of("x"));
  CHECK(v.id_of("x") < v.id_of("}"));
}

TEST_CASE("build_vocab rejects an empty corpus and unbalanced labels") {
  CHECK(code_of([] { build_vocab({}); }) == Errc::EmptyCorpus);
  CHECK(code_of([] { build_vocab({"x ^ { 2"}); }) == Errc::UnbalancedBraces);
}

TEST_CASE("\\frac is a two-group structural element") {
  TokenVocab v = build_vocab({"\\frac { a } { b }", "a + b"});
  ClassId frac = v.id_of("\\frac");
  CHECK(v.role(frac) == Role::HSE);
  REQUIRE(v.rule(frac) != nullptr);
  CHECK(v.rule(frac)->group_count == 2);
}

TEST_CASE("build_vocab depends only on the symbol multiset") {
  auto a = build_vocab({"a + b", "x ^ { 2 }"});
  auto b = build_vocab({"x ^ { 2 }", "b + a", "a"});
  CHECK(format_vocab(a) == format_vocab(b));
}

TEST_CASE("vocab file round trip and validation") {
  TokenVocab v = demo_vocab();
  std::string text = format_vocab(v);
  CHECK(format_vocab(parse_vocab(text)) == text);
  CHECK(text.find("\\frac\thse\n") != std::string::npos);
  CHECK(code_of([] { parse_vocab("a\tvisible\n}\tend\n<none>\tnone\n<sos>\tsos\n"); }) == Errc::BadVocab);
  CHECK(code_of([] { parse_vocab("a\tbogus\n"); }) == Errc::BadVocab);
  CHECK(code_of([] { parse_vocab("a\tvisible\na\tvisible\n}\tend\n<none>\tnone\n<sos>\tsos\n<eos>\teos\n"); }) ==
        Errc::BadVocab);
}

TEST_CASE("parse_latex reifies closing braces") {
  TokenVocab v = demo_vocab();
  CHECK(symbols(parse_latex("x ^ { y z } + 1", v), v) ==
        std::vector<std::string>{"x", "^", "y", "z", "}", "+", "1"});
  CHECK(symbols(parse_latex("\\frac { x } { y }", v), v) == std::vector<std::string>{"\\frac", "x", "}", "y", "}"});
  CHECK(symbols(parse_latex("a", v), v) == std::vector<std::string>{"a"});
  CHECK(symbols(parse_latex("\\sqrt [ 3 ] { x }", v), v) == std::vector<std::string>{"\\sqrt", "3", "}", "x", "}"});
}

TEST_CASE("unbraced arguments normalize to braced form") {
  TokenVocab v = demo_vocab();
  CHECK(parse_latex("x ^ 2", v).tokens == parse_latex("x ^ { 2 }", v).tokens);
  CHECK(parse_latex("x^2", v).tokens == parse_latex("x ^ { 2 }", v).tokens);
  CHECK(parse_latex("\\frac a b", v).tokens == parse_latex("\\frac { a } { b }", v).tokens);
  CHECK(parse_latex("\\frac{a}{b}", v).tokens == parse_latex("\\frac { a } { b }", v).tokens);
  // a structure as an unbraced argument takes all of its groups
  CHECK(parse_latex("x ^ \\frac a b", v).tokens == parse_latex("x ^ { \\frac { a } { b } }", v).tokens);
  // bare groups are flattened
  CHECK(parse_latex("{ a + b }", v).tokens == parse_latex("a + b", v).tokens);
}

TEST_CASE("parse_latex errors") {
  TokenVocab v = demo_vocab();
  CHECK(code_of([&] { parse_latex("x ^ { 2", v); }) == Errc::UnbalancedBraces);
  CHECK(code_of([&] { parse_latex("x } {", v); }) == Errc::UnbalancedBraces);
  CHECK(code_of([&] { parse_latex("x ^", v); }) == Errc::DanglingGroup);
  CHECK(code_of([&] { parse_latex("\\frac { a }", v); }) == Errc::DanglingGroup);
  CHECK(code_of([&] { parse_latex("w", v); }) == Errc::VocabMiss);
}

TEST_CASE("emit_latex examples") {
  TokenVocab v = demo_vocab();
  CHECK(emit_latex(seq_of({"\\frac", "x", "}", "y", "}"}, v), v) == "\\frac { x } { y }");
  CHECK(emit_latex(seq_of({"a"}, v), v) == "a");
  CHECK(emit_latex(seq_of({"x", "^", "}"}, v), v) == "x ^ { }");
  CHECK(emit_latex(seq_of({"\\sqrt", "3", "}", "x", "}"}, v), v) == "\\sqrt [ 3 ] { x }");
  CHECK(emit_latex(seq_of({"\\sqrt", "x", "}"}, v), v) == "\\sqrt { x }");
  CHECK(emit_latex(seq_of({}, v), v).empty());
}

TEST_CASE("emit_latex rejects ill-nested sequences") {
  TokenVocab v = demo_vocab();
  CHECK(code_of([&] { emit_latex(seq_of({"}"}, v), v); }) == Errc::IllNested);
  CHECK(code_of([&] { emit_latex(seq_of({"x", "^", "y"}, v), v); }) == Errc::IllNested);
  CHECK(code_of([&] { emit_latex(seq_of({"\\frac", "x", "}"}, v), v); }) == Errc::IllNested);
}

TEST_CASE("emit_latex_repaired drops stray ends and closes open groups") {
  TokenVocab v = demo_vocab();
  CHECK(emit_latex_repaired(ids({"}", "a", "+", "b"}, v), v) == "a + b");
  CHECK(emit_latex_repaired(ids({"x", "^", "y"}, v), v) == "x ^ { y }");
  CHECK(emit_latex_repaired(ids({"\\frac", "x", "}", "y"}, v), v) == "\\frac { x } { y }");
  CHECK(emit_latex_repaired(ids({"a", "+", "b"}, v), v) == "a + b");
}

TEST_CASE("resolve_nesting prefers the index-less square root") {
  TokenVocab v = demo_vocab();
  auto n = resolve_nesting(ids({"\\sqrt", "x", "}", "+", "1"}, v), v);
  REQUIRE(n);
  CHECK(n->arity[0] == 1);
  CHECK(n->owner[2] == 0);
  auto two = resolve_nesting(ids({"\\sqrt", "3", "}", "x", "}"}, v), v);
  REQUIRE(two);
  CHECK(two->arity[0] == 2);
  CHECK(!resolve_nesting(ids({"}", "x"}, v), v));
}

TEST_CASE("gt_targets chain examples") {
  TokenVocab v = demo_vocab();
  auto t = gt_targets(seq_of({"x", "+", "y"}, v));
  CHECK(t.left == std::vector<int>{0, 1, 2});
  CHECK(t.right == std::vector<int>{2, 3, 4});
  CHECK(t.self == ids({"x", "+", "y"}, v));
  auto a = gt_targets(seq_of({"a"}, v));
  CHECK(a.left == std::vector<int>{0});
  CHECK(a.right == std::vector<int>{2});
  CHECK(gt_targets(seq_of({"\\frac", "x", "}", "y", "}"}, v)).right == std::vector<int>{2, 3, 4, 5, 6});
}

TEST_CASE("tokenizer splits unspaced input with greedy vocab matches") {
  TokenVocab v = build_vocab({"\\sin x + \\pi", "x ^ { 2 }", "a b"});
  CHECK(tokenize_latex("\\sin{x}+\\pi") == std::vector<std::string>{"\\sin", "{", "x", "}", "+", "\\pi"});
  TokenVocab words = parse_vocab("ab\tvisible\nx\tvisible\n}\tend\n<none>\tnone\n<sos>\tsos\n<eos>\teos\n");
  CHECK(tokenize_latex("abx", &words) == std::vector<std::string>{"ab", "x"});
  CHECK(tokenize_latex("abx") == std::vector<std::string>{"a", "b", "x"});
  CHECK(tokenize_latex("α+β") == std::vector<std::string>{"α", "+", "β"});
}

// Random well-formed sequences over the demo vocab for the structural properties.
std::vector<std::string> random_symbols(std::mt19937_64& rng, int depth) {
  const std::vector<std::string> atoms{"a", "b", "c", "x", "y", "z", "1", "2", "3", "+", "-", "=", "q", "p", "n"};
  std::vector<std::string> out;
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::size_t items = 1 + pick(4);
  for (std::size_t i = 0; i < items; ++i) {
    std::size_t kind = depth > 0 ? pick(8) : 0;
    auto group = [&] {
      auto inner = random_symbols(rng, depth - 1);
      out.insert(out.end(), inner.begin(), inner.end());
      out.emplace_back("}");
    };
    switch (kind) {
      case 1: out.emplace_back(atoms[pick(atoms.size())]); out.emplace_back("^"); group(); break;
      case 2: out.emplace_back("_"); group(); break;
      case 3: out.emplace_back("\\frac"); group(); group(); break;
      case 4: out.emplace_back("\\sqrt"); group(); break;
      case 5: out.emplace_back("\\sqrt"); group(); group(); break;
      case 6: out.emplace_back("\\overline"); group(); break;
      case 7: out.emplace_back("\\limits"); group(); break;
      default: out.emplace_back(atoms[pick(atoms.size())]); break;
    }
  }
  return out;
}

TEST_CASE("round trip and nesting depth hold on random sequences") {
  TokenVocab v = demo_vocab();
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 500; ++trial) {
    auto seq = seq_of(random_symbols(rng, 3), v);
    std::string latex = emit_latex(seq, v);
    CHECK_MESSAGE(parse_latex(latex, v).tokens == seq.tokens, latex);
    CHECK(parse_latex(emit_latex(parse_latex(latex, v), v), v).tokens == seq.tokens);

    // every end closes the innermost open structure; all structures close
    auto nest = resolve_nesting(seq.tokens, v);
    REQUIRE(nest);
    std::vector<std::pair<int, int>> open;  // (structure, groups left)
    bool ok = true;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq.tokens[i] == v.end_id()) {
        ok = ok && !open.empty() && open.back().first == nest->owner[i];
        if (!open.empty() && --open.back().second == 0) open.pop_back();
      } else if (v.is_structural(seq.tokens[i])) {
        int arity = nest->arity[i];
        ok = ok && arity >= v.rule(seq.tokens[i])->group_count;
        open.emplace_back(static_cast<int>(i), arity);
      }
    }
    CHECK(ok);
    CHECK(open.empty());
  }
}

TEST_CASE("gt_targets is a Hamiltonian chain") {
  TokenVocab v = demo_vocab();
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto seq = seq_of(random_symbols(rng, 2), v);
    auto t = gt_targets(seq);
    const int L = static_cast<int>(seq.size());
    std::vector<int> next(static_cast<std::size_t>(L) + 2, -1);
    next[0] = L > 0 ? 1 : L + 1;
    for (int i = 0; i < L; ++i) next[static_cast<std::size_t>(i) + 1] = t.right[static_cast<std::size_t>(i)];
    int visited = 1;
    for (int at = 0; at != L + 1; at = next[static_cast<std::size_t>(at)]) ++visited;
    CHECK(visited == L + 2);
    for (int i = 0; i < L; ++i) CHECK(t.left[static_cast<std::size_t>(i)] + 2 == t.right[static_cast<std::size_t>(i)]);
  }
}
