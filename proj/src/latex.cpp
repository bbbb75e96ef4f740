#include "namer/latex.hpp"

#include <cctype>

#include "namer/error.hpp"

namespace namer {

namespace {

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

void split_chunk(std::string_view chunk, const TokenVocab* vocab, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < chunk.size()) {
    char c = chunk[i];
    if (c == '\\') {
      if (i + 1 >= chunk.size()) {
        throw Error(Errc::UnknownControlSequence, "lone backslash in '" + std::string(chunk) + "'");
      }
      std::size_t j = i + 1;
      if (is_letter(chunk[j])) {
        while (j < chunk.size() && is_letter(chunk[j])) ++j;
      } else {
        j += utf8_length(static_cast<unsigned char>(chunk[j]));
      }
      out.emplace_back(chunk.substr(i, j - i));
      i = j;
      continue;
    }
    if (c == '{' || c == '}') {
      out.emplace_back(1, c);
      ++i;
      continue;
    }
    std::size_t len = 0;
    if (vocab != nullptr) {
      std::string_view rest = chunk.substr(i);
      for (const auto& sym : vocab->match_order()) {
        if (sym.size() > 1 && sym.front() != '\\' && rest.substr(0, sym.size()) == sym) {
          len = sym.size();
          break;
        }
      }
    }
    if (len == 0) len = std::min(utf8_length(static_cast<unsigned char>(c)), chunk.size() - i);
    out.emplace_back(chunk.substr(i, len));
    i += len;
  }
}

// Recursive-descent normalizer from raw tokens to node symbols.
class SymbolParser {
 public:
  explicit SymbolParser(const std::vector<std::string>& toks) : toks_(toks) {}

  std::vector<std::string> run() {
    check_balance();
    parse_items(Stop::Eof);
    return std::move(out_);
  }

 private:
  enum class Stop { Eof, Brace, Bracket };

  void check_balance() const {
    int depth = 0;
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      if (toks_[i] == "{") ++depth;
      if (toks_[i] == "}" && --depth < 0) {
        throw Error(Errc::UnbalancedBraces, "unmatched '}' at token " + std::to_string(i));
      }
    }
    if (depth != 0) {
      throw Error(Errc::UnbalancedBraces,
                  std::to_string(depth) + " unclosed '{' at token " + std::to_string(toks_.size()));
    }
  }

  bool at_stop(Stop stop) const {
    if (pos_ >= toks_.size()) return true;
    const auto& t = toks_[pos_];
    return (stop == Stop::Brace && t == "}") || (stop == Stop::Bracket && t == "]");
  }

  void parse_items(Stop stop) {
    while (!at_stop(stop)) {
      if (toks_[pos_] == "}") {
        throw Error(Errc::DanglingGroup, "'}' closes no group at token " + std::to_string(pos_));
      }
      parse_atom(stop);
    }
    if (stop != Stop::Eof) {
      if (pos_ >= toks_.size()) {
        throw Error(Errc::DanglingGroup, "unterminated group at end of input");
      }
      ++pos_;  // closer
    }
  }

  void parse_atom(Stop stop) {
    const std::string& t = toks_[pos_++];
    if (t == "{") {
      parse_items(Stop::Brace);  // bare group: contents are flattened
      return;
    }
    const StructuralRule* rule = find_rule(t);
    if (rule == nullptr) {
      out_.push_back(t);
      return;
    }
    out_.push_back(t);
    if (rule->optional_index && pos_ < toks_.size() && toks_[pos_] == "[") {
      ++pos_;
      parse_items(Stop::Bracket);
      out_.emplace_back(kEndSymbol);
    }
    for (int g = 0; g < rule->group_count; ++g) parse_group(t, stop);
  }

  void parse_group(const std::string& parent, Stop stop) {
    if (at_stop(stop) || toks_[pos_] == "}") {
      throw Error(Errc::DanglingGroup, "missing argument for '" + parent + "' at token " +
                                           std::to_string(pos_));
    }
    if (toks_[pos_] == "{") {
      ++pos_;
      parse_items(Stop::Brace);
    } else {
      parse_atom(stop);
    }
    out_.emplace_back(kEndSymbol);
  }

  const std::vector<std::string>& toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> out_;
};

// Depth-first search over \sqrt arities with counting bounds on the suffix.
class NestingSearch {
 public:
  NestingSearch(const std::vector<ClassId>& tokens, const TokenVocab& vocab)
      : tokens_(tokens), n_(tokens.size()) {
    base_.assign(n_, 0);
    optional_.assign(n_, false);
    is_end_.assign(n_, false);
    for (std::size_t i = 0; i < n_; ++i) {
      ClassId t = tokens[i];
      if (t == vocab.end_id()) {
        is_end_[i] = true;
      } else if (const auto* r = vocab.rule(t)) {
        base_[i] = r->group_count;
        optional_[i] = r->optional_index;
      }
    }
    suffix_end_.assign(n_ + 1, 0);
    suffix_base_.assign(n_ + 1, 0);
    suffix_opt_.assign(n_ + 1, 0);
    for (std::size_t i = n_; i-- > 0;) {
      suffix_end_[i] = suffix_end_[i + 1] + (is_end_[i] ? 1 : 0);
      suffix_base_[i] = suffix_base_[i + 1] + base_[i];
      suffix_opt_[i] = suffix_opt_[i + 1] + (optional_[i] ? 1 : 0);
    }
    result_.arity.assign(n_, 0);
    result_.owner.assign(n_, -1);
  }

  std::optional<Nesting> run() {
    if (!step(0)) return std::nullopt;
    return std::move(result_);
  }

 private:
  struct Frame {
    int owner;
    int remaining;
    int closed;
    bool optional;
  };

  bool feasible(std::size_t pos) const {
    int need = open_need_ + suffix_base_[pos];
    int ends = suffix_end_[pos];
    if (ends < need) return false;
    return ends - need <= flex_ + suffix_opt_[pos];
  }

  bool step(std::size_t pos) {
    // Plain tokens never branch; skip them without recursing.
    while (pos < n_ && !is_end_[pos] && base_[pos] == 0) ++pos;
    if (pos == n_) return stack_.empty();
    if (!feasible(pos)) return false;

    if (base_[pos] > 0) {
      stack_.push_back({static_cast<int>(pos), base_[pos], 0, optional_[pos]});
      result_.arity[pos] = base_[pos];
      open_need_ += base_[pos];
      if (optional_[pos]) ++flex_;
      if (step(pos + 1)) return true;
      if (optional_[pos]) --flex_;
      open_need_ -= base_[pos];
      stack_.pop_back();
      return false;
    }

    if (stack_.empty()) return false;
    Frame saved = stack_.back();
    result_.owner[pos] = saved.owner;
    Frame& top = stack_.back();
    top.remaining -= 1;
    top.closed += 1;
    open_need_ -= 1;
    bool was_flexible = saved.optional && saved.closed == 0;
    if (was_flexible) --flex_;

    bool ok = false;
    if (top.remaining > 0) {
      ok = step(pos + 1);
      if (!ok) stack_.back() = saved;
    } else {
      stack_.pop_back();
      ok = step(pos + 1);
      if (!ok && was_flexible) {
        // Second chance: the closed group was an index; open the radicand.
        stack_.push_back({saved.owner, 1, 1, saved.optional});
        open_need_ += 1;
        result_.arity[static_cast<std::size_t>(saved.owner)] = 2;
        ok = step(pos + 1);
        if (!ok) {
          result_.arity[static_cast<std::size_t>(saved.owner)] = 1;
          open_need_ -= 1;
          stack_.back() = saved;
        }
      } else if (!ok) {
        stack_.push_back(saved);
      }
    }
    if (!ok) {
      open_need_ += 1;
      if (was_flexible) ++flex_;
      result_.owner[pos] = -1;
    }
    return ok;
  }

  const std::vector<ClassId>& tokens_;
  std::size_t n_;
  std::vector<int> base_;
  std::vector<bool> optional_;
  std::vector<bool> is_end_;
  std::vector<int> suffix_end_, suffix_base_, suffix_opt_;
  std::vector<Frame> stack_;
  int open_need_ = 0;
  int flex_ = 0;
  Nesting result_;
};

bool emittable(ClassId t, const TokenVocab& vocab) {
  if (t < 0 || static_cast<std::size_t>(t) >= vocab.size()) return false;
  Role r = vocab.role(t);
  return r != Role::None && r != Role::Sos && r != Role::Eos;
}

// Position of the first nesting violation under index-less \sqrt.
std::size_t first_violation(const std::vector<ClassId>& tokens, const TokenVocab& vocab) {
  std::vector<int> stack;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == vocab.end_id()) {
      if (stack.empty()) return i;
      if (--stack.back() == 0) stack.pop_back();
    } else if (const auto* r = vocab.rule(tokens[i])) {
      stack.push_back(r->group_count);
    }
  }
  return tokens.size();
}

std::string render(const std::vector<ClassId>& tokens, const Nesting& nest, const TokenVocab& vocab) {
  struct Open {
    int total;
    int done;
    bool indexed;
  };
  std::vector<Open> stack;
  std::string out;
  auto put = [&out](std::string_view s) {
    if (!out.empty()) out += ' ';
    out += s;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ClassId t = tokens[i];
    if (t == vocab.end_id()) {
      Open& top = stack.back();
      ++top.done;
      if (top.done < top.total) {
        put(top.indexed && top.done == 1 ? "] {" : "} {");
      } else {
        put("}");
        stack.pop_back();
      }
    } else if (const auto* r = vocab.rule(t)) {
      bool indexed = r->optional_index && nest.arity[i] > r->group_count;
      put(vocab.symbol(t));
      put(indexed ? "[" : "{");
      stack.push_back({nest.arity[i], 0, indexed});
    } else {
      put(vocab.symbol(t));
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize_latex(std::string_view latex, const TokenVocab* vocab) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < latex.size()) {
    while (i < latex.size() && std::isspace(static_cast<unsigned char>(latex[i]))) ++i;
    std::size_t j = i;
    while (j < latex.size() && !std::isspace(static_cast<unsigned char>(latex[j]))) ++j;
    if (j > i) {
      std::string_view chunk = latex.substr(i, j - i);
      if (vocab != nullptr && vocab->find(chunk) && chunk.find_first_of("{}") == std::string_view::npos) {
        out.emplace_back(chunk);
      } else {
        split_chunk(chunk, vocab, out);
      }
    }
    i = j;
  }
  return out;
}

std::vector<std::string> parse_symbols(std::string_view latex, const TokenVocab* vocab) {
  auto toks = tokenize_latex(latex, vocab);
  return SymbolParser(toks).run();
}

CanonicalTokenSeq parse_latex(std::string_view latex, const TokenVocab& vocab) {
  CanonicalTokenSeq seq;
  seq.source = std::string(latex);
  for (const auto& s : parse_symbols(latex, &vocab)) seq.tokens.push_back(vocab.id_of(s));
  return seq;
}

std::optional<Nesting> resolve_nesting(const std::vector<ClassId>& tokens, const TokenVocab& vocab) {
  return NestingSearch(tokens, vocab).run();
}

std::string emit_latex(const CanonicalTokenSeq& seq, const TokenVocab& vocab) {
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (!emittable(seq.tokens[i], vocab)) {
      throw Error(Errc::IllNested, "non-emittable token at position " + std::to_string(i));
    }
  }
  auto nest = resolve_nesting(seq.tokens, vocab);
  if (!nest) {
    throw Error(Errc::IllNested,
                "position " + std::to_string(first_violation(seq.tokens, vocab)));
  }
  return render(seq.tokens, *nest, vocab);
}

std::string emit_latex_repaired(const std::vector<ClassId>& tokens, const TokenVocab& vocab) {
  std::vector<ClassId> kept;
  kept.reserve(tokens.size());
  for (ClassId t : tokens) {
    if (emittable(t, vocab)) kept.push_back(t);
  }
  if (auto nest = resolve_nesting(kept, vocab)) return render(kept, *nest, vocab);

  std::vector<ClassId> fixed;
  std::vector<int> stack;
  for (ClassId t : kept) {
    if (t == vocab.end_id()) {
      if (stack.empty()) continue;
      if (--stack.back() == 0) stack.pop_back();
    } else if (const auto* r = vocab.rule(t)) {
      stack.push_back(r->group_count);
    }
    fixed.push_back(t);
  }
  for (int pending : stack) fixed.insert(fixed.end(), static_cast<std::size_t>(pending), vocab.end_id());
  auto nest = resolve_nesting(fixed, vocab);
  return render(fixed, *nest, vocab);
}

NodeTargets gt_targets(const CanonicalTokenSeq& seq) {
  NodeTargets t;
  t.self = seq.tokens;
  t.left.resize(seq.size());
  t.right.resize(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    t.left[i] = static_cast<int>(i);
    t.right[i] = static_cast<int>(i + 2);
  }
  return t;
}

}  // namespace namer
