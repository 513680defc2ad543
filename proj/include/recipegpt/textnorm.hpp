#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "recipegpt/ingredient.hpp"

namespace recipegpt::textnorm {

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

// Lowercased tokens with byte offsets back into the source text.
struct TokenStream {
  std::vector<std::string> tokens;
  std::vector<Span> spans;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

/// Splits on whitespace and punctuation; punctuation characters become
/// single-character tokens. Digit groups joined by '.', ',' or '/' stay whole
/// ("1.5", "1/2"). Bytes >= 0x80 count as word characters, so UTF-8 words are
/// kept intact. Only ASCII letters are lowercased.
TokenStream word_tokenize(std::string_view text);

/// True for tokens that start with a letter, digit or non-ASCII byte.
bool is_word_token(std::string_view token);
bool is_numeric_token(std::string_view token);

std::string ascii_lower(std::string_view s);

/// Replaces every byte that does not start a well-formed UTF-8 sequence
/// (overlong forms and surrogates included) with U+FFFD.
std::string sanitize_utf8(std::string_view s);

class Lemmatizer {
 public:
  enum class Guard {
    kNone,
    kLongWord,          // word longer than four characters
    kLeafLike,          // ...lves / ...aves
    kSibilantOrO,       // stem ends in ss, zz, x, ch, sh or o
    kPluralS,           // word longer than three and not ending in ss, us, is
  };
  struct SuffixRule {
    std::string suffix;
    std::string replacement;
    Guard guard = Guard::kNone;
  };

  /// Built-in noun-plural rules and a culinary exception list.
  Lemmatizer();
  Lemmatizer(std::unordered_map<std::string, std::string> exceptions, std::vector<SuffixRule> rules);

  /// Exceptions first, then the first suffix rule whose suffix and guard both
  /// match. Non-alphabetic words pass through unchanged.
  std::string lemmatize(std::string_view word) const;

  const std::unordered_map<std::string, std::string>& exceptions() const { return exceptions_; }

 private:
  std::unordered_map<std::string, std::string> exceptions_;
  std::vector<SuffixRule> rules_;
};

const Lemmatizer& default_lemmatizer();
std::string lemmatize(std::string_view word);

class IngredientDictionary {
 public:
  IngredientDictionary() = default;

  /// Throws kInvalidDictionary if an entry is not its own lemma or the set is empty.
  static IngredientDictionary from_words(const std::vector<std::string>& words, std::string source);
  /// One lowercase root noun per line, '#' comments allowed.
  static IngredientDictionary load(const std::string& path);

  bool contains(std::string_view noun) const { return nouns_.count(std::string(noun)) != 0; }
  std::size_t size() const { return nouns_.size(); }
  const std::set<std::string>& nouns() const { return nouns_; }
  const std::string& source() const { return source_; }

 private:
  std::set<std::string> nouns_;
  std::string source_;
};

/// data/ingredient_nouns.txt, loaded once.
const IngredientDictionary& bundled_dictionary();

/// Reads a one-word-per-line lexicon, lemmatizing each entry.
std::unordered_set<std::string> load_lexicon(const std::string& path);

using RootNounSet = std::set<std::string>;

bool is_descriptor(std::string_view word);

/// Head-word heuristic: lemma of the last word token that is not a
/// descriptor (preparation word, size, container part, "to taste" ...).
/// Falls back to the last word token's lemma.
std::string root_noun_of_phrase(std::string_view phrase);

/// Dictionary filter over all lemmatized tokens of `text`.
RootNounSet extract_ingredient_nouns(std::string_view text, const IngredientDictionary& dict);

enum class HighlightField { kIngredients, kGeneratedText };

std::string_view to_string(HighlightField field);

struct HighlightSpan {
  HighlightField field = HighlightField::kIngredients;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string root_noun;
  friend bool operator==(const HighlightSpan&, const HighlightSpan&) = default;
};

/// The text that ingredient-field highlight offsets refer to: the original
/// ingredient lines joined with '\n'.
std::string ingredient_text(std::span<const IngredientLine> ingredients);

/// Spans for every occurrence, in both fields, of each root noun shared by
/// the ingredient list and the dictionary nouns of `generated`.
std::vector<HighlightSpan> overlap_highlights(std::span<const IngredientLine> ingredients,
                                              std::string_view generated,
                                              const IngredientDictionary& dict);

}  // namespace recipegpt::textnorm
