#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "recipegpt/corpus.hpp"
#include "recipegpt/fieldcodec.hpp"
#include "recipegpt/metrics.hpp"
#include "recipegpt/model.hpp"

namespace recipegpt::metrics {

/// What is generated: the ingredient list or the instructions.
enum class Mode { kIngredients, kInstructions };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);
codec::FieldKind target_field(Mode mode);
/// The fields given to the model: title plus the other non-target field.
std::vector<codec::FieldKind> context_fields(Mode mode);

/// Fields not applicable to the mode stay empty.
struct EvaluationReport {
  Mode mode = Mode::kInstructions;
  std::optional<double> f1, precision, recall;
  std::optional<std::size_t> n_generated_ingredients;
  std::optional<double> bleu, brevity_penalty;
  std::optional<double> rouge_l_precision, rouge_l_recall, rouge_l_f;
  std::optional<double> nted;
  std::optional<double> jaccard_coherence;
  std::optional<BleuStats> bleu_stats;
};

nlohmann::json to_json(const EvaluationReport& report);

/// Root nouns of generated ingredient lines; lines that do not parse are skipped.
RootNounSet generated_ingredient_roots(std::string_view generated, std::size_t* parsed_lines = nullptr);
RootNounSet record_ingredient_roots(const corpus::RecipeRecord& record);

/// Ingredient mode scores F1 against the reference root nouns. Instruction
/// mode scores BLEU, ROUGE-L and NTED against the reference steps, and the
/// Jaccard overlap of dictionary nouns in the text with the recipe's
/// ingredient roots.
EvaluationReport evaluate(std::string_view generated, const corpus::RecipeRecord& reference, Mode mode,
                          const TreeLexicon& lexicon = TreeLexicon::bundled(),
                          const textnorm::IngredientDictionary& dict = textnorm::bundled_dictionary());

// ---- batch harness

struct HarnessConfig {
  std::vector<int> ks = {1, 3, 5, 10, 30};
  std::vector<Mode> modes = {Mode::kIngredients, Mode::kInstructions};
  std::uint64_t seed = 0;
  int max_new_tokens = 384;
  std::size_t limit = 0;  // 0 = every test record
};

struct SampleRow {
  std::string recipe_id;
  Mode mode = Mode::kInstructions;
  int k = 0;
  std::uint64_t seed = 0;
  std::string generated;
  bool truncated = false;
  EvaluationReport report;
};

/// One line per k, same columns as the published comparison table.
struct SummaryRow {
  int k = 0;
  std::optional<double> f1, n_ingredients;
  std::optional<double> bleu_corpus, bleu_mean, brevity_penalty, rouge_l, nted, coherence;
  std::size_t samples = 0;
  double truncated_rate = 0.0;
};

struct HarnessResult {
  std::vector<SampleRow> rows;
  std::vector<SummaryRow> summary;
  double perplexity = 0.0;  // on the test records, independent of k
};

HarnessResult run_harness(const lm::Model& model, const codec::BpeVocab& vocab,
                          std::span<const corpus::RecipeRecord> test_records, const HarnessConfig& config,
                          const std::function<void(const SampleRow&)>& on_row = {});

std::string rows_to_jsonl(std::span<const SampleRow> rows);
/// Tab-separated: k, F1, #Ingr, BLEU, BLEU_mean, BP, R-L, NTED, Coherence, PPL, n, truncated.
std::string summary_to_tsv(const HarnessResult& result);

}  // namespace recipegpt::metrics
