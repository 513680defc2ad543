#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recipegpt/bpe.hpp"
#include "recipegpt/corpus.hpp"

namespace recipegpt::codec {

using FieldOrder = std::array<FieldKind, 3>;
using FieldContext = std::map<FieldKind, std::string>;

inline constexpr FieldOrder kCanonicalOrder = {FieldKind::kTitle, FieldKind::kIngredients, FieldKind::kInstructions};

/// Field text as it appears in serialized recipes: ingredient name phrases
/// joined by '\n', steps joined by ' '.
std::string field_content(const corpus::RecipeRecord& record, FieldKind kind,
                          const std::vector<std::size_t>* ingredient_order = nullptr);

FieldContext context_from_record(const corpus::RecipeRecord& record, std::initializer_list<FieldKind> kinds);

/// "<start-f> content <end-f>" per field, fields separated by one space.
std::string serialize_multifield(const corpus::RecipeRecord& record, const FieldOrder& field_order,
                                 const std::vector<std::size_t>& ingredient_order);

/// Token ids for a sequence of (field, content) pairs. decode() of the result
/// is exactly the text form above; content bytes can never produce special ids.
std::vector<TokenId> encode_fields(const BpeVocab& vocab,
                                   const std::vector<std::pair<FieldKind, std::string>>& fields);

std::vector<TokenId> encode_multifield(const BpeVocab& vocab, const corpus::RecipeRecord& record,
                                       const FieldOrder& field_order,
                                       const std::vector<std::size_t>& ingredient_order);

/// Field contents recovered from a serialized id sequence. Fields whose end
/// token is missing (clipped windows) are omitted.
FieldContext parse_multifield(const BpeVocab& vocab, std::span<const TokenId> ids);
/// Text form; only unambiguous when contents do not contain delimiter surfaces.
FieldContext parse_multifield_text(std::string_view text);

struct ParsedRecipe {
  std::string title;
  std::vector<std::string> ingredient_names;
  std::vector<std::string> steps;
};

ParsedRecipe to_parsed_recipe(const FieldContext& fields);

struct EncodedRecipe {
  std::vector<TokenId> ids;   // padded to max_len
  std::size_t length = 0;     // non-pad prefix
  std::size_t target_start = 0;  // index of the last field's start token inside the window (0 if clipped)

  friend bool operator==(const EncodedRecipe&, const EncodedRecipe&) = default;
};

/// All six field orders indexed 0..5.
FieldOrder field_permutation(std::size_t index);

struct ExampleDraw {
  FieldOrder field_order{};
  std::vector<std::size_t> ingredient_order;
  std::size_t window_start = 0;
  std::size_t full_length = 0;
};

/// Shuffles field and ingredient order from `seed`, encodes, then either takes
/// a random max_len window or right-pads with the pad id.
EncodedRecipe make_training_example(const corpus::RecipeRecord& record, std::uint64_t seed, const BpeVocab& vocab,
                                    std::size_t max_len, ExampleDraw* draw = nullptr);

/// Context fields in canonical order followed by the target's start token.
/// Throws kTargetInContext / kEmptyContext.
std::vector<TokenId> build_prompt(const FieldContext& context, FieldKind target, const BpeVocab& vocab);

}  // namespace recipegpt::codec
