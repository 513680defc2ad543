#include <cmath>
#include <map>

#include <fmt/format.h>

#include "recipegpt/error.hpp"
#include "recipegpt/evaluation.hpp"
#include "recipegpt/rng.hpp"
#include "recipegpt/sampling.hpp"
#include "recipegpt/train.hpp"

namespace recipegpt::metrics {
namespace {

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(const std::optional<double>& v) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  std::optional<double> get() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

}  // namespace

HarnessResult run_harness(const lm::Model& model, const codec::BpeVocab& vocab,
                          std::span<const corpus::RecipeRecord> test_records, const HarnessConfig& config,
                          const std::function<void(const SampleRow&)>& on_row) {
  if (test_records.empty()) throw Error(ErrorCode::kInvalidArgument, "no test records to evaluate");
  if (config.ks.empty()) throw Error(ErrorCode::kInvalidArgument, "no k values given");
  const auto records =
      config.limit > 0 ? test_records.first(std::min(config.limit, test_records.size())) : test_records;

  HarnessResult result;
  const auto test_set = lm::encode_dataset(records, vocab, static_cast<std::size_t>(model.config().context_len),
                                           mix_seed(config.seed, 0x70706c));
  result.perplexity = lm::perplexity(model, test_set);

  for (int k : config.ks) {
    SummaryRow summary;
    summary.k = k;
    Mean f1, n_ingr, bleu_mean, rouge, tree, coherence;
    BleuStats corpus_stats;
    std::size_t truncated = 0;
    for (const auto mode : config.modes) {
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        codec::FieldContext ctx;
        for (auto f : context_fields(mode)) ctx[f] = codec::field_content(rec, f);
        SampleRow row;
        row.recipe_id = rec.id;
        row.mode = mode;
        row.k = k;
        row.seed = mix_seed(config.seed, fnv1a64(rec.id + "|" + std::string(to_string(mode)) + "|" + std::to_string(k)));
        lm::SamplingConfig sc{k, config.max_new_tokens, row.seed};
        const auto gen = lm::generate_field(model, vocab, ctx, target_field(mode), sc);
        row.generated = gen.text;
        row.truncated = gen.truncated;
        row.report = evaluate(gen.text, rec, mode);

        f1.add(row.report.f1);
        if (row.report.n_generated_ingredients) n_ingr.add(static_cast<double>(*row.report.n_generated_ingredients));
        bleu_mean.add(row.report.bleu);
        rouge.add(row.report.rouge_l_f);
        tree.add(row.report.nted);
        coherence.add(row.report.jaccard_coherence);
        if (row.report.bleu_stats) corpus_stats += *row.report.bleu_stats;
        truncated += row.truncated ? 1 : 0;
        ++summary.samples;
        if (on_row) on_row(row);
        result.rows.push_back(std::move(row));
      }
    }
    summary.f1 = f1.get();
    summary.n_ingredients = n_ingr.get();
    summary.bleu_mean = bleu_mean.get();
    summary.rouge_l = rouge.get();
    summary.nted = tree.get();
    summary.coherence = coherence.get();
    if (corpus_stats.candidate_length > 0 || bleu_mean.n > 0) {
      const auto b = bleu_from_stats(corpus_stats);
      summary.bleu_corpus = b.score;
      summary.brevity_penalty = b.brevity_penalty;
    }
    summary.truncated_rate =
        summary.samples ? static_cast<double>(truncated) / static_cast<double>(summary.samples) : 0.0;
    result.summary.push_back(summary);
  }
  return result;
}

std::string rows_to_jsonl(std::span<const SampleRow> rows) {
  std::string out;
  for (const auto& r : rows) {
    nlohmann::json j = to_json(r.report);
    j["recipe_id"] = r.recipe_id;
    j["k"] = r.k;
    j["seed"] = r.seed;
    j["generated"] = r.generated;
    j["truncated"] = r.truncated;
    out += j.dump() + "\n";
  }
  return out;
}

std::string summary_to_tsv(const HarnessResult& result) {
  auto cell = [](const std::optional<double>& v, int digits) {
    return v ? fmt::format("{:.{}f}", *v, digits) : std::string("-");
  };
  std::string out = "k\tF1\t#Ingr\tBLEU\tBLEU_mean\tBP\tR-L\tNTED\tCoherence\tPPL\tn\ttruncated\n";
  for (const auto& s : result.summary) {
    // BLEU on the conventional 0-100 scale, like the published table.
    auto scaled = [](const std::optional<double>& v) { return v ? std::optional<double>(*v * 100.0) : std::nullopt; };
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.3f}\t{}\t{:.3f}\n", s.k, cell(s.f1, 3),
                       cell(s.n_ingredients, 2), cell(scaled(s.bleu_corpus), 2), cell(scaled(s.bleu_mean), 2),
                       cell(s.brevity_penalty, 3), cell(s.rouge_l, 3), cell(s.nted, 3), cell(s.coherence, 3),
                       result.perplexity, s.samples, s.truncated_rate);
  }
  return out;
}

}  // namespace recipegpt::metrics
