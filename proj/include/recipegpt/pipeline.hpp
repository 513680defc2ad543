#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "recipegpt/bpe.hpp"
#include "recipegpt/corpus.hpp"

namespace recipegpt::pipeline {

struct PrepareResult {
  std::vector<corpus::RecipeRecord> records;  // accepted, sorted by id
  std::map<corpus::RejectReason, std::size_t> rejected;
  std::vector<corpus::IngestProblem> problems;
  corpus::CorpusSplit split;
};

/// Ingest, filter and split. Throws kDuplicateId if two raw records share an id.
PrepareResult prepare_corpus(const std::string& raw_path, std::uint64_t seed, std::size_t n_val, std::size_t n_test,
                             const corpus::FilterRules& rules = {});

/// Writes records.jsonl and split.json into `dir` (created if needed).
/// Returns the corpus hash recorded in the manifest.
std::string write_prepared(const std::string& dir, const PrepareResult& prepared);

/// Field contents wrapped in the spaces the codec puts around them.
std::vector<std::string> bpe_training_texts(std::span<const corpus::RecipeRecord> records);

}  // namespace recipegpt::pipeline
