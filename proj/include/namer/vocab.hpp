#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace namer {

using ClassId = std::int32_t;

enum class Role { Visible, HSE, IRS, ImaginaryEnd, Sos, Eos, None };

std::string_view role_name(Role role) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

// Reserved spellings for the non-visible entries.
inline constexpr std::string_view kEndSymbol = "}";
inline constexpr std::string_view kNoneSymbol = "<none>";
inline constexpr std::string_view kSosSymbol = "<sos>";
inline constexpr std::string_view kEosSymbol = "<eos>";

/// Grouping behaviour of a structural token (IRS or HSE). Every group is
/// closed by one imaginary-end token. `optional_index` marks \sqrt, which may
/// take a leading [index] group in addition to its radicand.
struct StructuralRule {
  std::string_view parent;
  int group_count = 1;
  bool optional_index = false;
  Role role = Role::HSE;
};

/// Fixed table of local relation tokens and their attached ending tokens.
const std::vector<StructuralRule>& structural_rules();
const StructuralRule* find_rule(std::string_view symbol) noexcept;

struct VocabEntry {
  std::string symbol;
  ClassId id = 0;
  Role role = Role::Visible;
};

/// Symbol inventory. Predictable symbols (visible, structural, and the
/// imaginary end) hold ids 0..K-1, the none token holds K, and <sos>/<eos>
/// follow it.
class TokenVocab {
 public:
  TokenVocab() = default;

  /// Validates and indexes entries; ids are taken from vector position.
  explicit TokenVocab(std::vector<VocabEntry> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<VocabEntry>& entries() const noexcept { return entries_; }
  const VocabEntry& entry(ClassId id) const { return entries_.at(static_cast<std::size_t>(id)); }
  const std::string& symbol(ClassId id) const { return entry(id).symbol; }
  Role role(ClassId id) const { return entry(id).role; }

  std::optional<ClassId> find(std::string_view symbol) const;
  ClassId id_of(std::string_view symbol) const;  // throws VocabMiss

  /// K: number of predictable classes.
  ClassId predictable_count() const noexcept { return none_id_; }
  ClassId none_id() const noexcept { return none_id_; }
  ClassId end_id() const noexcept { return end_id_; }
  ClassId sos_id() const noexcept { return sos_id_; }
  ClassId eos_id() const noexcept { return eos_id_; }

  bool is_structural(ClassId id) const;
  /// Rule for a structural id, nullptr otherwise.
  const StructuralRule* rule(ClassId id) const;

  /// Symbols a tokenizer should try to match greedily, longest first.
  const std::vector<std::string>& match_order() const noexcept { return match_order_; }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, ClassId> index_;
  std::vector<std::string> match_order_;
  ClassId none_id_ = 0;
  ClassId end_id_ = 0;
  ClassId sos_id_ = 0;
  ClassId eos_id_ = 0;
};

/// Scans label strings and assigns roles from the fixed structural table.
/// Class ids follow lexicographic symbol order.
TokenVocab build_vocab(const std::vector<std::string>& label_corpus);

/// Vocab file: one `symbol<TAB>role` per line, ids by line order.
TokenVocab read_vocab(const std::filesystem::path& path);
void write_vocab(const TokenVocab& vocab, const std::filesystem::path& path);
std::string format_vocab(const TokenVocab& vocab);
TokenVocab parse_vocab(std::string_view text);

}  // namespace namer
