#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "recipegpt/ingredient.hpp"

namespace recipegpt::corpus {

struct RawRecipe {
  std::string source_id;
  std::string title;
  std::vector<std::string> ingredient_lines;
  std::string instruction_text;
};

struct RecipeRecord {
  std::string id;
  std::string title;
  std::vector<IngredientLine> ingredients;
  std::vector<std::string> steps;

  friend bool operator==(const RecipeRecord&, const RecipeRecord&) = default;
};

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;

  friend bool operator==(const CorpusSplit&, const CorpusSplit&) = default;
};

/// Strips leading quantities (integers, decimals, fractions, unicode
/// fractions, ranges), a unit from the bundled lexicon, parenthesized asides
/// and everything after the first comma. Throws kEmptyAfterStripping when
/// nothing nameable remains.
IngredientLine parse_ingredient_line(std::string_view line);

bool is_unit_word(std::string_view word);

/// Sentence terminators (. ! ?) followed by whitespace end a sentence, except
/// after a known abbreviation. Decimals never split because no whitespace
/// follows their point.
std::vector<std::string> split_sentences(std::string_view instruction_text);

std::size_t count_words(std::string_view text);

enum class RejectReason {
  kNonRecipeContent,
  kTooFewIngredients,
  kTooFewSentences,
  kTooFewWords,
};

std::string_view to_string(RejectReason reason);

struct FilterRules {
  std::size_t min_ingredients = 2;
  std::size_t min_sentences = 2;
  std::size_t min_words = 20;
};

using FilterResult = std::variant<RecipeRecord, RejectReason>;

FilterResult filter_recipe(const RawRecipe& raw, const FilterRules& rules = {});

/// Sorts ids, shuffles them with a seeded Fisher-Yates, then deals
/// validation, test and train in that order.
CorpusSplit split_corpus(const std::vector<RecipeRecord>& records, std::uint64_t seed,
                         std::size_t n_val, std::size_t n_test);

struct IngestProblem {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<RawRecipe> recipes;
  std::vector<IngestProblem> problems;
};

/// Line-delimited JSON records {id, title, ingredients:[text], instructions:text}.
/// Malformed lines are collected, not fatal.
IngestResult ingest(const std::string& path);
IngestResult ingest_text(std::string_view contents);
/// Throws MalformedRecordError at the first bad line.
std::vector<RawRecipe> ingest_strict(const std::string& path);

// Prepared-corpus artifacts: records.jsonl holds filtered records, split.json
// the split manifest (seed, sizes, corpus hash, id lists).
std::string record_to_json_line(const RecipeRecord& record);
RecipeRecord record_from_json_line(std::string_view line);
void write_records(const std::string& path, const std::vector<RecipeRecord>& records);
std::vector<RecipeRecord> read_records(const std::string& path);

void write_split(const std::string& path, const CorpusSplit& split, const std::string& corpus_hash);
CorpusSplit read_split(const std::string& path, std::string* corpus_hash = nullptr);

// A prepared directory as written by `recipegpt prepare`.
struct PreparedCorpus {
  std::vector<RecipeRecord> records;
  CorpusSplit split;
  std::string corpus_hash;

  const RecipeRecord& by_id(std::string_view id) const;
  std::vector<RecipeRecord> select(const std::vector<std::string>& ids) const;
};

PreparedCorpus load_prepared(const std::string& dir);
std::string records_path(const std::string& dir);
std::string split_path(const std::string& dir);

}  // namespace recipegpt::corpus
