#include "namer/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "namer/error.hpp"
#include "namer/latex.hpp"

namespace namer {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::UnbalancedBraces: return "UnbalancedBraces";
    case Errc::UnknownControlSequence: return "UnknownControlSequence";
    case Errc::DanglingGroup: return "DanglingGroup";
    case Errc::VocabMiss: return "VocabMiss";
    case Errc::IllNested: return "IllNested";
    case Errc::BadVocab: return "BadVocab";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::DimOverflow: return "DimOverflow";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::IoFailure: return "IoFailure";
    case Errc::StepMismatch: return "StepMismatch";
    case Errc::EvenKernel: return "EvenKernel";
    case Errc::ChannelMismatch: return "ChannelMismatch";
    case Errc::Infeasible: return "Infeasible";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFinite: return "NonFinite";
    case Errc::NonStochasticRow: return "NonStochasticRow";
    case Errc::NoPath: return "NoPath";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::NodeCountMismatch: return "NodeCountMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::GridTooSmall: return "GridTooSmall";
    case Errc::TooLarge: return "TooLarge";
    case Errc::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

std::string_view role_name(Role role) noexcept {
  switch (role) {
    case Role::Visible: return "visible";
    case Role::HSE: return "hse";
    case Role::IRS: return "irs";
    case Role::ImaginaryEnd: return "end";
    case Role::Sos: return "sos";
    case Role::Eos: return "eos";
    case Role::None: return "none";
  }
  return "visible";
}

std::optional<Role> parse_role(std::string_view text) noexcept {
  for (Role r : {Role::Visible, Role::HSE, Role::IRS, Role::ImaginaryEnd, Role::Sos,
                 Role::Eos, Role::None}) {
    if (role_name(r) == text) return r;
  }
  return std::nullopt;
}

const std::vector<StructuralRule>& structural_rules() {
  static const std::vector<StructuralRule> rules = {
      {"^", 1, false, Role::IRS},
      {"_", 1, false, Role::IRS},
      {"\\limits", 1, false, Role::IRS},
      {"\\frac", 2, false, Role::HSE},
      {"\\sqrt", 1, true, Role::HSE},
      {"\\dot", 1, false, Role::HSE},
      {"\\ddot", 1, false, Role::HSE},
      {"\\boxed", 1, false, Role::HSE},
      {"\\widehat", 1, false, Role::HSE},
      {"\\overline", 1, false, Role::HSE},
      {"\\xlongequal", 1, false, Role::HSE},
      {"\\textcircled", 1, false, Role::HSE},
      {"\\xrightarrow", 1, false, Role::HSE},
      {"\\overrightarrow", 1, false, Role::HSE},
  };
  return rules;
}

const StructuralRule* find_rule(std::string_view symbol) noexcept {
  for (const auto& r : structural_rules()) {
    if (r.parent == symbol) return &r;
  }
  return nullptr;
}

namespace {

bool predictable(Role r) {
  return r == Role::Visible || r == Role::HSE || r == Role::IRS || r == Role::ImaginaryEnd;
}

}  // namespace

TokenVocab::TokenVocab(std::vector<VocabEntry> entries) : entries_(std::move(entries)) {
  int n_end = 0, n_none = 0, n_sos = 0, n_eos = 0;
  bool seen_special = false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& e = entries_[i];
    e.id = static_cast<ClassId>(i);
    if (e.symbol.empty()) throw Error(Errc::BadVocab, "empty symbol at line " + std::to_string(i + 1));
    if (!index_.emplace(e.symbol, e.id).second) {
      throw Error(Errc::BadVocab, "duplicate symbol '" + e.symbol + "'");
    }
    switch (e.role) {
      case Role::ImaginaryEnd: ++n_end; end_id_ = e.id; break;
      case Role::None: ++n_none; none_id_ = e.id; break;
      case Role::Sos: ++n_sos; sos_id_ = e.id; break;
      case Role::Eos: ++n_eos; eos_id_ = e.id; break;
      case Role::HSE:
      case Role::IRS: {
        const auto* rule = find_rule(e.symbol);
        if (rule == nullptr || rule->role != e.role) {
          throw Error(Errc::BadVocab, "no structural rule for '" + e.symbol + "' as " +
                                          std::string(role_name(e.role)));
        }
        break;
      }
      case Role::Visible: break;
    }
    if (predictable(e.role)) {
      if (seen_special) {
        throw Error(Errc::BadVocab, "predictable symbol '" + e.symbol + "' after special tokens");
      }
    } else {
      seen_special = true;
    }
  }
  if (n_end != 1 || n_none != 1 || n_sos != 1 || n_eos != 1) {
    throw Error(Errc::BadVocab, "need exactly one end, none, sos and eos entry");
  }
  if (none_id_ > sos_id_ || none_id_ > eos_id_) {
    throw Error(Errc::BadVocab, "none token must directly follow the predictable classes");
  }
  for (const auto& e : entries_) {
    if (predictable(e.role) && e.role != Role::ImaginaryEnd) match_order_.push_back(e.symbol);
  }
  std::stable_sort(match_order_.begin(), match_order_.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

std::optional<ClassId> TokenVocab::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ClassId TokenVocab::id_of(std::string_view symbol) const {
  auto id = find(symbol);
  if (!id) throw Error(Errc::VocabMiss, std::string(symbol));
  return *id;
}

bool TokenVocab::is_structural(ClassId id) const {
  Role r = role(id);
  return r == Role::HSE || r == Role::IRS;
}

const StructuralRule* TokenVocab::rule(ClassId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= entries_.size() || !is_structural(id)) return nullptr;
  return find_rule(entries_[static_cast<std::size_t>(id)].symbol);
}

TokenVocab build_vocab(const std::vector<std::string>& label_corpus) {
  if (label_corpus.empty()) throw Error(Errc::EmptyCorpus, "no label strings");
  std::set<std::string> symbols;
  for (const auto& label : label_corpus) {
    for (auto& s : parse_symbols(label)) symbols.insert(std::move(s));
  }
  symbols.insert(std::string(kEndSymbol));

  std::vector<VocabEntry> entries;
  entries.reserve(symbols.size() + 3);
  for (const auto& s : symbols) {
    Role role = Role::Visible;
    if (s == kEndSymbol) {
      role = Role::ImaginaryEnd;
    } else if (const auto* rule = find_rule(s)) {
      role = rule->role;
    }
    entries.push_back({s, 0, role});
  }
  entries.push_back({std::string(kNoneSymbol), 0, Role::None});
  entries.push_back({std::string(kSosSymbol), 0, Role::Sos});
  entries.push_back({std::string(kEosSymbol), 0, Role::Eos});
  return TokenVocab(std::move(entries));
}

std::string format_vocab(const TokenVocab& vocab) {
  std::string out;
  for (const auto& e : vocab.entries()) {
    out += e.symbol;
    out += '\t';
    out += role_name(e.role);
    out += '\n';
  }
  return out;
}

TokenVocab parse_vocab(std::string_view text) {
  std::vector<VocabEntry> entries;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto tab = line.rfind('\t');
    if (tab == std::string_view::npos) {
      throw Error(Errc::BadVocab, "line " + std::to_string(line_no) + ": expected symbol<TAB>role");
    }
    auto role = parse_role(line.substr(tab + 1));
    if (!role) {
      throw Error(Errc::BadVocab, "line " + std::to_string(line_no) + ": unknown role '" +
                                      std::string(line.substr(tab + 1)) + "'");
    }
    entries.push_back({std::string(line.substr(0, tab)), 0, *role});
  }
  return TokenVocab(std::move(entries));
}

TokenVocab read_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_vocab(buf.str());
}

void write_vocab(const TokenVocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out << format_vocab(vocab);
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

}  // namespace namer
