#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recipegpt/corpus.hpp"
#include "recipegpt/model.hpp"

namespace recipegpt::lm {

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 8;
  int steps = 1500;
  int eval_every = 100;
  std::uint64_t seed = 0;
  int warmup_steps = 100;
  double grad_clip = 1.0;  // global L2 norm; <= 0 disables
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double init_std = 0.02;
  std::size_t max_len = 512;
  std::size_t val_examples = 64;
  LossOptions loss;
};

struct TracePoint {
  int step = 0;
  std::optional<double> train_loss;  // absent for the step-0 entry
  double val_ppl = 0.0;
};

struct TrainState {
  int step = 0;
  std::vector<float> m, v;
  double lr = 0.0;
  std::uint64_t seed = 0;
};

struct TrainResult {
  Model model;
  std::vector<TracePoint> trace;
  TrainState state;
};

/// One example per record with seeds derived from `seed` and the record index.
std::vector<codec::EncodedRecipe> encode_dataset(std::span<const corpus::RecipeRecord> records,
                                                 const codec::BpeVocab& vocab, std::size_t max_len,
                                                 std::uint64_t seed);

/// exp of the token-mean cross-entropy, evaluated in chunks of `batch_size`.
/// Returns 1 when nothing is scored.
double perplexity(const Model& model, std::span<const codec::EncodedRecipe> dataset, const LossOptions& options = {},
                  std::size_t batch_size = 8);

/// Adam with linear warmup and global-norm clipping. Deterministic in
/// `options.seed`. An empty validation split falls back to the training split.
/// `on_eval` sees every trace point as it is recorded.
TrainResult train(const ModelConfig& config, const codec::BpeVocab& vocab,
                  std::span<const corpus::RecipeRecord> train_records,
                  std::span<const corpus::RecipeRecord> validation_records, const TrainConfig& options,
                  const std::function<void(const TracePoint&)>& on_eval = {});

/// JSON lines: {"step":..,"train_loss":..|null,"val_ppl":..}
std::string trace_to_jsonl(std::span<const TracePoint> trace);

}  // namespace recipegpt::lm
