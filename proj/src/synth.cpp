#include "namer/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string_view>

#include "namer/error.hpp"

namespace namer::synth {

namespace {

constexpr std::string_view kAtoms[] = {"a", "b", "c", "n", "x", "y", "z", "0", "1", "2", "3", "4", "5", "6", "7", "8", "9"};
constexpr std::string_view kOps[] = {"+", "-", "="};

// Stream tags for derived seeds.
enum Stream : std::uint64_t { Expr = 1, Flip, FlipClass, Spur, SpurCell, SpurClass, SelfHead, LeftHead, RightHead };

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class ExprGen {
 public:
  ExprGen(std::uint64_t seed, const TokenVocab& vocab) : rng_(seed, Expr), vocab_(vocab) {
    for (auto a : kAtoms) {
      if (vocab.find(a)) atoms_.emplace_back(a);
    }
    for (auto o : kOps) {
      if (vocab.find(o)) ops_.emplace_back(o);
    }
    if (atoms_.empty()) throw Error(Errc::VocabMiss, "vocab has none of the generator's symbols");
  }

  std::vector<std::string> run(int depth) {
    expr(depth);
    return std::move(out_);
  }

 private:
  bool has(std::string_view s) const { return vocab_.find(s).has_value(); }

  void atom() { out_.push_back(atoms_[rng_.index(atoms_.size())]); }

  void group(int depth) {
    expr(depth);
    out_.emplace_back(kEndSymbol);
  }

  void expr(int depth) {
    std::size_t terms = depth == 0 ? 1 : 1 + rng_.index(3);
    for (std::size_t t = 0; t < terms; ++t) {
      if (t > 0 && !ops_.empty()) out_.push_back(ops_[rng_.index(ops_.size())]);
      term(depth);
    }
  }

  void term(int depth) {
    if (depth == 0) {
      atom();
      return;
    }
    switch (rng_.index(10)) {
      case 4:
        if (!has("^")) break;
        atom();
        out_.emplace_back("^");
        group(depth - 1);
        return;
      case 5:
        if (!has("_")) break;
        atom();
        out_.emplace_back("_");
        group(depth - 1);
        return;
      case 6:
      case 7:
        if (!has("\\frac")) break;
        out_.emplace_back("\\frac");
        group(depth - 1);
        group(depth - 1);
        return;
      case 8:
        if (!has("\\sqrt")) break;
        out_.emplace_back("\\sqrt");
        group(depth - 1);
        return;
      case 9:
        atom();
        atom();
        return;
      default:
        break;
    }
    atom();
  }

  Rng rng_;
  const TokenVocab& vocab_;
  std::vector<std::string> atoms_;
  std::vector<std::string> ops_;
  std::vector<std::string> out_;
};

// Canonical sequence as a tree of items with their groups.
struct Item {
  std::size_t index = 0;
  std::vector<std::vector<Item>> groups;
};

std::vector<Item> build_items(const std::vector<ClassId>& tokens, const Nesting& nest, std::size_t& pos, int owner) {
  std::vector<Item> items;
  while (pos < tokens.size()) {
    if (nest.owner[pos] >= 0) {
      if (nest.owner[pos] == owner) ++pos;
      return items;
    }
    Item it{pos++, {}};
    for (int g = 0; g < nest.arity[it.index]; ++g) {
      it.groups.push_back(build_items(tokens, nest, pos, static_cast<int>(it.index)));
    }
    items.push_back(std::move(it));
  }
  return items;
}

struct Box {
  int width = 0;
  int ascent = 0;
  int descent = 0;
};

class Layout {
 public:
  Layout(const CanonicalTokenSeq& seq, const TokenVocab& vocab, std::vector<Cell>& cells)
      : seq_(seq), vocab_(vocab), cells_(cells) {}

  Box measure(const std::vector<Item>& items) const {
    Box box;
    for (const auto& it : items) {
      Box b = measure(it);
      box.width += b.width;
      box.ascent = std::max(box.ascent, b.ascent);
      box.descent = std::max(box.descent, b.descent);
    }
    return box;
  }

  void place(const std::vector<Item>& items, int baseline, int x) {
    for (const auto& it : items) {
      place(it, baseline, x);
      x += measure(it).width;
    }
  }

 private:
  std::string_view symbol(const Item& it) const { return vocab_.symbol(seq_.tokens[it.index]); }

  Box measure(const Item& it) const {
    if (it.groups.empty()) return {1, 0, 0};
    std::string_view s = symbol(it);
    if (s == "^" || s == "_") {
      Box g = measure(it.groups[0]);
      int extent = 1 + g.ascent + g.descent;
      return s == "^" ? Box{1 + g.width, extent, 0} : Box{1 + g.width, 0, extent};
    }
    if (s == "\\frac") {
      Box num = measure(it.groups[0]);
      Box den = measure(it.groups[1]);
      return {1 + std::max(num.width, den.width), 1 + num.ascent + num.descent, 1 + den.ascent + den.descent};
    }
    if (it.groups.size() == 2) {  // indexed root: raised index, then radicand
      Box idx = measure(it.groups[0]);
      Box rad = measure(it.groups[1]);
      return {1 + idx.width + rad.width, std::max(1 + idx.ascent + idx.descent, rad.ascent), rad.descent};
    }
    Box b = measure(it.groups[0]);
    return {1 + b.width, b.ascent, b.descent};
  }

  void place(const Item& it, int baseline, int x) {
    std::string_view s = symbol(it);
    if (s == "^" && !it.groups.empty()) {
      Box g = measure(it.groups[0]);
      int b = baseline - 1 - g.descent;
      mark(it.index, b, x);
      place(it.groups[0], b, x + 1);
      return;
    }
    if (s == "_" && !it.groups.empty()) {
      Box g = measure(it.groups[0]);
      int b = baseline + 1 + g.ascent;
      mark(it.index, b, x);
      place(it.groups[0], b, x + 1);
      return;
    }
    mark(it.index, baseline, x);
    if (s == "\\frac") {
      Box num = measure(it.groups[0]);
      Box den = measure(it.groups[1]);
      place(it.groups[0], baseline - 1 - num.descent, x + 1);
      place(it.groups[1], baseline + 1 + den.ascent, x + 1);
      return;
    }
    if (it.groups.size() == 2) {
      Box idx = measure(it.groups[0]);
      place(it.groups[0], baseline - 1 - idx.descent, x + 1);
      place(it.groups[1], baseline, x + 1 + idx.width);
      return;
    }
    if (!it.groups.empty()) place(it.groups[0], baseline, x + 1);
  }

  void mark(std::size_t index, int row, int col) { cells_[index] = {row, col}; }

  const CanonicalTokenSeq& seq_;
  const TokenVocab& vocab_;
  std::vector<Cell>& cells_;
};

// Row-stochastic softmax of logits / temperature.
void softmax_row(std::vector<double>& logits, double temperature, float* out) {
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp((v - mx) / temperature);
    sum += v;
  }
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = static_cast<float>(logits[i] / sum);
}

// One-hot logits plus optional Gaussian noise, softmaxed into `m` row r.
void head_row(ScoreMatrix& m, std::size_t r, std::size_t target, double noise, double temperature, Rng& rng,
              std::size_t confused = static_cast<std::size_t>(-1)) {
  std::vector<double> logits(m.cols, 0.0);
  logits[target] = 1.0;
  if (confused < m.cols) logits[confused] = kConfusionLogit;
  for (double& v : logits) {
    double z = rng.normal();
    v += noise * z;
  }
  softmax_row(logits, temperature, m.data.data() + r * m.cols);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(splitmix(splitmix(seed) ^ (stream * 0xD1B54A32D192ED03ULL))) {}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) return 0;
  return static_cast<std::size_t>(next() % n);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

TokenVocab synth_vocab() {
  std::string corpus;
  for (auto a : kAtoms) corpus += std::string(a) + " ";
  for (auto o : kOps) corpus += std::string(o) + " ";
  corpus += "\\frac { a } { b } \\sqrt { x } x ^ { 2 } x _ { 1 }";
  return build_vocab({corpus});
}

GeneratedExpression gen_expression(std::uint64_t seed, int max_depth, const TokenVocab& vocab) {
  if (max_depth < 0) max_depth = 0;
  auto symbols = ExprGen(seed, vocab).run(max_depth);
  GeneratedExpression g;
  for (const auto& s : symbols) g.seq.tokens.push_back(vocab.id_of(s));
  g.latex = emit_latex(g.seq, vocab);
  g.seq.source = g.latex;
  return g;
}

SynthSample layout_and_render(const CanonicalTokenSeq& seq, const TokenVocab& vocab, std::size_t height,
                              std::size_t width, const NoiseSpec& noise, std::uint64_t seed) {
  SynthSample s;
  s.seq = seq;
  s.latex = emit_latex(seq, vocab);
  s.noise = noise;
  const std::size_t L = seq.size();
  const auto K = static_cast<std::size_t>(vocab.none_id());
  const ClassId none = vocab.none_id();

  // Layout.
  auto nest = resolve_nesting(seq.tokens, vocab);
  if (!nest) throw Error(Errc::IllNested, "sample sequence cannot be nested");
  std::size_t pos = 0;
  auto items = build_items(seq.tokens, *nest, pos, -1);
  s.layout.assign(L, Cell{-1, -1});
  Layout layout(seq, vocab, s.layout);
  Box box = layout.measure(items);
  const int rows_needed = box.ascent + box.descent + 1;
  if (static_cast<std::size_t>(rows_needed) > height || static_cast<std::size_t>(box.width) > width) {
    throw Error(Errc::GridTooSmall, "expression needs " + std::to_string(rows_needed) + "x" +
                                        std::to_string(box.width) + " cells");
  }
  const int top = (static_cast<int>(height) - rows_needed) / 2;
  layout.place(items, top + box.ascent, 0);
  for (std::size_t i = 0; i < L; ++i) {
    if (nest->owner[i] >= 0) s.layout[i] = s.layout[static_cast<std::size_t>(nest->owner[i])];
  }

  // Occupancy: class the VAT grid shows at every cell, and which label token owns it.
  const std::size_t cells = height * width;
  std::vector<ClassId> shown(cells, none);
  std::vector<int> owner_of_cell(cells, -2);  // -2 empty, -1 spurious, else canonical index
  std::vector<char> flipped(cells, 0);
  std::vector<ClassId> visible;
  for (const auto& e : vocab.entries()) {
    if (e.role == Role::Visible) visible.push_back(e.id);
  }
  for (std::size_t i = 0; i < L; ++i) {
    if (nest->owner[i] >= 0 || seq.tokens[i] == vocab.end_id()) continue;
    auto cell = static_cast<std::size_t>(s.layout[i].row) * width + static_cast<std::size_t>(s.layout[i].col);
    if (owner_of_cell[cell] != -2) throw Error(Errc::GridTooSmall, "layout collision");
    owner_of_cell[cell] = static_cast<int>(i);
    shown[cell] = seq.tokens[i];
  }

  Rng flip_rng(seed, Flip), flip_class_rng(seed, FlipClass);
  for (std::size_t i = 0; i < L; ++i) {
    if (vocab.role(seq.tokens[i]) != Role::Visible) continue;
    double u = flip_rng.uniform();
    std::size_t pick = flip_class_rng.index(visible.size() > 1 ? visible.size() - 1 : 1);
    if (visible.size() < 2 || u >= noise.flip_prob) continue;
    if (noise.max_flips >= 0 && s.flips >= noise.max_flips) continue;
    // Any visible class other than the true one.
    auto truth_pos = static_cast<std::size_t>(std::find(visible.begin(), visible.end(), seq.tokens[i]) - visible.begin());
    ClassId wrong = visible[pick >= truth_pos ? pick + 1 : pick];
    auto cell = static_cast<std::size_t>(s.layout[i].row) * width + static_cast<std::size_t>(s.layout[i].col);
    shown[cell] = wrong;
    flipped[cell] = 1;
    ++s.flips;
  }

  Rng spur_rng(seed, Spur), spur_cell_rng(seed, SpurCell), spur_class_rng(seed, SpurClass);
  std::vector<std::size_t> empty;
  for (std::size_t c = 0; c < cells; ++c) {
    if (owner_of_cell[c] == -2) empty.push_back(c);
  }
  for (std::size_t i = 0; i < L; ++i) {
    double u = spur_rng.uniform();
    std::size_t pick = spur_cell_rng.index(empty.size());
    ClassId cls = visible.empty() ? none : visible[spur_class_rng.index(visible.size())];
    if (u >= noise.spurious_prob || empty.empty() || visible.empty()) continue;
    if (noise.max_spurious >= 0 && s.spurious >= noise.max_spurious) continue;
    std::size_t cell = empty[pick];
    empty.erase(empty.begin() + static_cast<std::ptrdiff_t>(pick));
    owner_of_cell[cell] = -1;
    shown[cell] = cls;
    ++s.spurious;
  }

  // VAT grid: 0.9 on the shown class, the rest spread evenly.
  constexpr float kPeak = 0.9F;
  const float rest = (1.0F - kPeak) / static_cast<float>(K);
  s.probs = Grid(K + 1, height, width, rest);
  for (std::size_t c = 0; c < cells; ++c) s.probs.data[static_cast<std::size_t>(shown[c]) * cells + c] = kPeak;

  // Teacher attention, one slice per canonical token, peaked on its cell.
  s.attn = AttentionStack(L, height, width);
  for (std::size_t i = 0; i < L; ++i) {
    auto slice = s.attn.slice(i);
    const int r0 = s.layout[i].row;
    const int c0 = s.layout[i].col;
    double total = 0.0;
    auto put = [&](int r, int c, float v) {
      if (r < 0 || c < 0 || r >= static_cast<int>(height) || c >= static_cast<int>(width)) return;
      slice[static_cast<std::size_t>(r) * width + static_cast<std::size_t>(c)] = v;
      total += v;
    };
    put(r0, c0, 1.0F);
    put(r0 - 1, c0, 0.25F);
    put(r0 + 1, c0, 0.25F);
    put(r0, c0 - 1, 0.25F);
    put(r0, c0 + 1, 0.25F);
    for (float& v : slice) v = static_cast<float>(v / total);
  }

  // Decode-time node order: raster cells, ending tokens right after their owner.
  std::vector<int> node_canon;  // canonical index, -1 for spurious
  std::vector<std::size_t> node_cell;
  for (std::size_t c = 0; c < cells; ++c) {
    if (owner_of_cell[c] == -2) continue;
    int canon = owner_of_cell[c];
    node_canon.push_back(canon);
    node_cell.push_back(c);
    if (canon >= 0 && nest->arity[static_cast<std::size_t>(canon)] > 0) {
      for (std::size_t j = 0; j < L; ++j) {
        if (nest->owner[j] == canon) {
          node_canon.push_back(static_cast<int>(j));
          node_cell.push_back(c);
        }
      }
    }
  }
  const std::size_t N = node_canon.size();
  std::vector<std::size_t> matrix_of(L, 0);
  for (std::size_t d = 0; d < N; ++d) {
    if (node_canon[d] >= 0) matrix_of[static_cast<std::size_t>(node_canon[d])] = d + 1;
  }

  Rng self_rng(seed, SelfHead), left_rng(seed, LeftHead), right_rng(seed, RightHead);
  s.self_probs = ScoreMatrix(N, K + 1);
  for (std::size_t d = 0; d < N; ++d) {
    const int canon = node_canon[d];
    const bool is_end = canon >= 0 && nest->owner[static_cast<std::size_t>(canon)] >= 0;
    auto target = static_cast<std::size_t>(canon >= 0 ? seq.tokens[static_cast<std::size_t>(canon)] : none);
    std::size_t confused = static_cast<std::size_t>(-1);
    if (!is_end && flipped[node_cell[d]]) confused = static_cast<std::size_t>(shown[node_cell[d]]);
    head_row(s.self_probs, d, target, noise.self_noise, noise.temperature, self_rng, confused);
  }

  const std::size_t M = N + 2;
  const std::size_t sos = 0;
  const std::size_t eos = N + 1;
  s.left = ScoreMatrix(M, M);
  s.right = ScoreMatrix(M, M);
  std::vector<std::size_t> left_target(M), right_target(M);
  left_target[sos] = sos;
  right_target[eos] = eos;
  right_target[sos] = L > 0 ? matrix_of[0] : eos;
  left_target[eos] = L > 0 ? matrix_of[L - 1] : sos;
  for (std::size_t d = 0; d < N; ++d) {
    const int canon = node_canon[d];
    if (canon < 0) {
      left_target[d + 1] = sos;
      right_target[d + 1] = eos;
      continue;
    }
    auto k = static_cast<std::size_t>(canon);
    left_target[d + 1] = k == 0 ? sos : matrix_of[k - 1];
    right_target[d + 1] = k + 1 == L ? eos : matrix_of[k + 1];
  }
  for (std::size_t r = 0; r < M; ++r) {
    head_row(s.left, r, left_target[r], noise.conn_noise, noise.temperature, left_rng);
    head_row(s.right, r, right_target[r], noise.conn_noise, noise.temperature, right_rng);
  }
  return s;
}

SynthSample make_sample(std::uint64_t seed, int max_depth, const TokenVocab& vocab, const NoiseSpec& noise,
                        std::size_t height, std::size_t width) {
  auto expr = gen_expression(seed, max_depth, vocab);
  return layout_and_render(expr.seq, vocab, height, width, noise, splitmix(seed ^ 0xA5A5A5A5ULL));
}

}  // namespace namer::synth
