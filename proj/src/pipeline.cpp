#include "recipegpt/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "recipegpt/error.hpp"
#include "recipegpt/fieldcodec.hpp"

namespace recipegpt::pipeline {

PrepareResult prepare_corpus(const std::string& raw_path, std::uint64_t seed, std::size_t n_val, std::size_t n_test,
                             const corpus::FilterRules& rules) {
  PrepareResult out;
  auto ingested = corpus::ingest(raw_path);
  out.problems = std::move(ingested.problems);
  std::set<std::string> seen;
  for (const auto& raw : ingested.recipes) {
    if (!seen.insert(raw.source_id).second) throw Error(ErrorCode::kDuplicateId, "duplicate recipe id " + raw.source_id);
    auto result = corpus::filter_recipe(raw, rules);
    if (auto* rec = std::get_if<corpus::RecipeRecord>(&result)) {
      out.records.push_back(std::move(*rec));
    } else {
      ++out.rejected[std::get<corpus::RejectReason>(result)];
    }
  }
  std::sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  out.split = corpus::split_corpus(out.records, seed, n_val, n_test);
  return out;
}

std::string write_prepared(const std::string& dir, const PrepareResult& prepared) {
  std::filesystem::create_directories(dir);
  corpus::write_records(corpus::records_path(dir), prepared.records);
  const std::string hash = hex64(fnv1a64(read_file(corpus::records_path(dir))));
  corpus::write_split(corpus::split_path(dir), prepared.split, hash);
  return hash;
}

std::vector<std::string> bpe_training_texts(std::span<const corpus::RecipeRecord> records) {
  std::vector<std::string> texts;
  for (const auto& r : records) {
    for (auto kind : codec::kAllFields) texts.push_back(" " + codec::field_content(r, kind) + " ");
  }
  return texts;
}

}  // namespace recipegpt::pipeline
