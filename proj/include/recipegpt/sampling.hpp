#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recipegpt/fieldcodec.hpp"
#include "recipegpt/model.hpp"

namespace recipegpt::lm {

struct SamplingConfig {
  int k = 3;
  int max_new_tokens = 384;
  std::uint64_t seed = 0;
};

/// What the sampler saw at one step; for instrumentation.
struct SampleStep {
  std::size_t index = 0;
  std::vector<TokenId> top_k;  // descending logit, ties by ascending id
  std::vector<double> probs;   // renormalized over top_k
  TokenId chosen = 0;
};

using SampleObserver = std::function<void(const SampleStep&)>;

/// The k highest logits, ties broken by ascending id.
std::vector<TokenId> top_k_ids(const Eigen::VectorXf& logits, int k);

/// Autoregressive top-k sampling. Stops after emitting `stop` or after
/// max_new_tokens. Throws kSequenceTooLong when |prompt| + max_new_tokens
/// exceeds the context, kInvalidArgument for an empty prompt, kOutOfRange
/// for k outside [1, vocab_size].
std::vector<TokenId> sample_topk(const Model& model, std::span<const TokenId> prompt, const SamplingConfig& cfg,
                                 std::optional<TokenId> stop, const SampleObserver& observer = {});

struct Generation {
  std::string text;
  bool truncated = false;  // budget ran out before the end token
  std::vector<TokenId> ids;
  std::size_t prompt_tokens = 0;
};

/// build_prompt, then sample until end(target). The token budget is clamped to
/// the context space left after the prompt. Special tokens and anything after
/// the end token are dropped and the text is trimmed.
Generation generate_field(const Model& model, const codec::BpeVocab& vocab, const codec::FieldContext& context,
                          codec::FieldKind target, const SamplingConfig& cfg, const SampleObserver& observer = {});

}  // namespace recipegpt::lm
