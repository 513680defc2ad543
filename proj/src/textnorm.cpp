#include "recipegpt/textnorm.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "recipegpt/error.hpp"
#include "recipegpt/resources.hpp"

namespace recipegpt::textnorm {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Preparation words, sizes, serving notes and container/part nouns that are
// never the head of an ingredient phrase.
const std::unordered_set<std::string>& descriptors() {
  static const std::unordered_set<std::string> words = {
      "fresh", "freshly", "chopped", "finely", "coarsely", "roughly", "thinly", "thickly",
      "shredded", "grated", "ground", "large", "small", "medium", "extra", "optional",
      "divided", "minced", "diced", "sliced", "cubed", "peeled", "seeded", "cored",
      "halved", "quartered", "crushed", "softened", "melted", "beaten", "packed", "lightly",
      "sifted", "cooked", "uncooked", "raw", "frozen", "thawed", "canned", "drained",
      "rinsed", "dried", "toasted", "boneless", "skinless", "whole", "to", "taste", "for",
      "garnish", "serving", "needed", "as", "or", "and", "more", "about", "plus", "room",
      "temperature", "into", "cut", "inch", "of", "the", "a", "an", "with", "in", "at",
      "clove", "sprig", "stalk", "bunch", "head", "leaf", "piece", "strip", "slice", "cube",
      "wedge", "floret", "kernel", "breast", "thigh", "fillet", "tenderloin", "shoulder",
      "chunk", "half", "flake", "extract", "julienned", "pitted", "zested", "juiced",
      "warm", "cold", "hot", "ripe", "firm", "soft", "mashed", "torn", "trimmed",
  };
  return words;
}

}  // namespace

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string sanitize_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    unsigned char lo = 0x80, hi = 0xBF;  // bounds for the second byte
    if (b0 < 0x80) {
      len = 1;
    } else if (b0 >= 0xC2 && b0 <= 0xDF) {
      len = 2;
    } else if (b0 >= 0xE0 && b0 <= 0xEF) {
      len = 3;
      if (b0 == 0xE0) lo = 0xA0;
      if (b0 == 0xED) hi = 0x9F;
    } else if (b0 >= 0xF0 && b0 <= 0xF4) {
      len = 4;
      if (b0 == 0xF0) lo = 0x90;
      if (b0 == 0xF4) hi = 0x8F;
    }
    bool ok = len != 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      ok = k == 1 ? (b >= lo && b <= hi) : (b >= 0x80 && b <= 0xBF);
    }
    if (ok) {
      out.append(s.substr(i, len));
      i += len;
    } else {
      out += "\xEF\xBF\xBD";
      ++i;
    }
  }
  return out;
}

bool is_word_token(std::string_view token) {
  return !token.empty() && is_word_byte(static_cast<unsigned char>(token.front()));
}

bool is_numeric_token(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](unsigned char c) {
    return is_digit(c) || c == '.' || c == ',' || c == '/';
  }) && is_digit(static_cast<unsigned char>(token.front()));
}

TokenStream word_tokenize(std::string_view text) {
  TokenStream out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_word_byte(c)) {
      while (i < n) {
        const auto d = static_cast<unsigned char>(text[i]);
        if (is_word_byte(d)) {
          ++i;
        } else if ((d == '.' || d == ',' || d == '/') && i > start && i + 1 < n &&
                   is_digit(static_cast<unsigned char>(text[i - 1])) &&
                   is_digit(static_cast<unsigned char>(text[i + 1]))) {
          ++i;
        } else {
          break;
        }
      }
    } else {
      ++i;
    }
    out.tokens.push_back(ascii_lower(text.substr(start, i - start)));
    out.spans.push_back({start, i});
  }
  return out;
}

IngredientDictionary IngredientDictionary::from_words(const std::vector<std::string>& words,
                                                      std::string source) {
  IngredientDictionary dict;
  dict.source_ = std::move(source);
  for (const auto& raw : words) {
    const std::string w = ascii_lower(trim(raw));
    if (w.empty()) continue;
    if (lemmatize(w) != w) {
      throw Error(ErrorCode::kInvalidDictionary,
                  "dictionary entry '" + w + "' is not its own lemma ('" + lemmatize(w) + "')");
    }
    dict.nouns_.insert(w);
  }
  if (dict.nouns_.empty()) throw Error(ErrorCode::kInvalidDictionary, "dictionary is empty");
  return dict;
}

namespace {

std::vector<std::string> read_word_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open lexicon " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string w = trim(line);
    if (!w.empty()) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

IngredientDictionary IngredientDictionary::load(const std::string& path) {
  return from_words(read_word_lines(path), path);
}

const IngredientDictionary& bundled_dictionary() {
  static const IngredientDictionary dict = IngredientDictionary::load(data_path("ingredient_nouns.txt"));
  return dict;
}

std::unordered_set<std::string> load_lexicon(const std::string& path) {
  std::unordered_set<std::string> out;
  for (const auto& w : read_word_lines(path)) out.insert(lemmatize(ascii_lower(w)));
  return out;
}

bool is_descriptor(std::string_view word) { return descriptors().count(std::string(word)) != 0; }

std::string root_noun_of_phrase(std::string_view phrase) {
  const TokenStream ts = word_tokenize(phrase);
  std::vector<std::string_view> words;
  for (const auto& t : ts.tokens) {
    if (is_word_token(t)) words.push_back(t);
  }
  if (words.empty()) throw Error(ErrorCode::kEmptyPhrase, "phrase has no words: '" + std::string(phrase) + "'");
  for (auto it = words.rbegin(); it != words.rend(); ++it) {
    if (is_numeric_token(*it) || is_descriptor(*it)) continue;
    std::string lemma = lemmatize(*it);
    if (!is_descriptor(lemma)) return lemma;
  }
  return lemmatize(words.back());
}

RootNounSet extract_ingredient_nouns(std::string_view text, const IngredientDictionary& dict) {
  RootNounSet out;
  for (const auto& t : word_tokenize(text).tokens) {
    if (!is_word_token(t)) continue;
    std::string lemma = lemmatize(t);
    if (dict.contains(lemma)) out.insert(std::move(lemma));
  }
  return out;
}

std::string_view to_string(HighlightField field) {
  return field == HighlightField::kIngredients ? "ingredients" : "generated_text";
}

std::string ingredient_text(std::span<const IngredientLine> ingredients) {
  std::string out;
  for (std::size_t i = 0; i < ingredients.size(); ++i) {
    if (i) out += '\n';
    out += ingredients[i].original;
  }
  return out;
}

std::vector<HighlightSpan> overlap_highlights(std::span<const IngredientLine> ingredients,
                                              std::string_view generated,
                                              const IngredientDictionary& dict) {
  RootNounSet roots;
  for (const auto& line : ingredients) roots.insert(line.root_noun);
  const RootNounSet mentioned = extract_ingredient_nouns(generated, dict);
  RootNounSet overlap;
  std::set_intersection(roots.begin(), roots.end(), mentioned.begin(), mentioned.end(),
                        std::inserter(overlap, overlap.end()));

  auto collect = [&](std::string_view text, HighlightField field) {
    std::vector<HighlightSpan> spans;
    const TokenStream ts = word_tokenize(text);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!is_word_token(ts.tokens[i])) continue;
      std::string lemma = lemmatize(ts.tokens[i]);
      if (overlap.count(lemma)) spans.push_back({field, ts.spans[i].start, ts.spans[i].end, std::move(lemma)});
    }
    return spans;
  };
  auto in_ingredients = collect(ingredient_text(ingredients), HighlightField::kIngredients);
  auto in_generated = collect(generated, HighlightField::kGeneratedText);

  // Keep only nouns that were located in both fields.
  RootNounSet a, b;
  for (const auto& s : in_ingredients) a.insert(s.root_noun);
  for (const auto& s : in_generated) b.insert(s.root_noun);
  std::vector<HighlightSpan> out;
  for (auto* group : {&in_ingredients, &in_generated}) {
    for (auto& s : *group) {
      if (a.count(s.root_noun) && b.count(s.root_noun)) out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace recipegpt::textnorm
