#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace recipegpt::codec {

using TokenId = std::int32_t;

enum class FieldKind { kTitle = 0, kIngredients = 1, kInstructions = 2 };

inline constexpr std::array<FieldKind, 3> kAllFields = {FieldKind::kTitle, FieldKind::kIngredients,
                                                       FieldKind::kInstructions};

/// "title", "ingredients", "instructions"
std::string_view field_name(FieldKind kind);
std::optional<FieldKind> parse_field_name(std::string_view name);

/// "<start-title>", "<end-ingr>", ...
std::string start_surface(FieldKind kind);
std::string end_surface(FieldKind kind);
inline constexpr std::string_view kPadSurface = "$";

/// Splits text into the chunks BPE merges may not cross: an optional single
/// leading space followed by a run of letters, digits or punctuation, or a
/// run of whitespace. Concatenating the chunks gives back the input.
std::vector<std::string_view> pretokenize(std::string_view text);

// Byte-level BPE. Ids 0..255 are raw bytes, then one id per merge, then the
// seven reserved special tokens (three field starts, three field ends, pad).
class BpeVocab {
 public:
  static constexpr int kByteCount = 256;
  static constexpr int kSpecialCount = 7;

  BpeVocab() : BpeVocab(std::vector<std::pair<TokenId, TokenId>>{}) {}
  explicit BpeVocab(std::vector<std::pair<TokenId, TokenId>> merges);

  /// Greedy merges by descending pair frequency; ties go to the
  /// lexicographically smaller (left bytes, right bytes). Stops early once no
  /// pair occurs at least `min_pair_frequency` times.
  static BpeVocab train(std::span<const std::string> texts, std::size_t merge_count,
                        std::size_t min_pair_frequency = 2);

  /// Never emits special ids: special surfaces inside `text` are encoded as
  /// ordinary bytes.
  std::vector<TokenId> encode(std::string_view text) const;
  /// Throws kUnknownId for ids outside the vocabulary.
  std::string decode(std::span<const TokenId> ids) const;

  std::size_t size() const { return bytes_.size() + kSpecialCount; }
  std::size_t bpe_size() const { return bytes_.size(); }
  const std::vector<std::pair<TokenId, TokenId>>& merges() const { return merges_; }

  TokenId start_id(FieldKind kind) const { return special_base() + 2 * static_cast<TokenId>(kind); }
  TokenId end_id(FieldKind kind) const { return special_base() + 2 * static_cast<TokenId>(kind) + 1; }
  TokenId pad_id() const { return special_base() + 6; }
  bool is_special(TokenId id) const { return id >= special_base() && id < static_cast<TokenId>(size()); }
  std::optional<FieldKind> start_field(TokenId id) const;
  std::optional<FieldKind> end_field(TokenId id) const;
  /// Raw bytes for BPE ids, surface text for special ids.
  std::string token_text(TokenId id) const;

  /// Versioned text format: header, ordered merges, special tokens with ids.
  std::string serialize() const;
  static BpeVocab parse(std::string_view text);
  void save(const std::string& path) const;
  static BpeVocab load(const std::string& path);
  /// Content hash of serialize(); checkpoints record it.
  std::string hash() const;

  friend bool operator==(const BpeVocab& a, const BpeVocab& b) { return a.merges_ == b.merges_; }

 private:
  TokenId special_base() const { return static_cast<TokenId>(bytes_.size()); }
  void encode_chunk(std::string_view chunk, std::vector<TokenId>& out) const;

  std::vector<std::pair<TokenId, TokenId>> merges_;
  std::vector<std::string> bytes_;
  // (left << 32 | right) -> merge rank; the merged id is kByteCount + rank.
  std::unordered_map<std::uint64_t, std::int32_t> ranks_;
};

}  // namespace recipegpt::codec
