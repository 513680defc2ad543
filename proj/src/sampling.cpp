#include "recipegpt/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "recipegpt/error.hpp"
#include "recipegpt/rng.hpp"
#include "recipegpt/textnorm.hpp"

namespace recipegpt::lm {

std::vector<TokenId> top_k_ids(const Eigen::VectorXf& logits, int k) {
  std::vector<TokenId> ids(static_cast<std::size_t>(logits.size()));
  std::iota(ids.begin(), ids.end(), 0);
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(kk), ids.end(), [&](TokenId a, TokenId b) {
    return logits[a] != logits[b] ? logits[a] > logits[b] : a < b;
  });
  ids.resize(kk);
  return ids;
}

std::vector<TokenId> sample_topk(const Model& model, std::span<const TokenId> prompt, const SamplingConfig& cfg,
                                 std::optional<TokenId> stop, const SampleObserver& observer) {
  const auto& mc = model.config();
  if (prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "prompt is empty");
  if (cfg.k < 1 || cfg.k > mc.vocab_size) {
    throw Error(ErrorCode::kOutOfRange, "k must be in [1, " + std::to_string(mc.vocab_size) + "]");
  }
  if (cfg.max_new_tokens < 0) throw Error(ErrorCode::kInvalidArgument, "max_new_tokens must be non-negative");
  if (prompt.size() + static_cast<std::size_t>(cfg.max_new_tokens) > static_cast<std::size_t>(mc.context_len)) {
    throw Error(ErrorCode::kSequenceTooLong, "prompt of " + std::to_string(prompt.size()) + " tokens plus " +
                                                 std::to_string(cfg.max_new_tokens) + " new tokens exceeds context " +
                                                 std::to_string(mc.context_len));
  }

  InferenceSession session(model);
  const Eigen::VectorXf* logits = nullptr;
  for (TokenId t : prompt) logits = &session.step(t);

  std::mt19937_64 rng(cfg.seed);
  std::vector<TokenId> out;
  for (int i = 0; i < cfg.max_new_tokens; ++i) {
    SampleStep st;
    st.index = static_cast<std::size_t>(i);
    st.top_k = top_k_ids(*logits, cfg.k);
    const float mx = (*logits)[st.top_k.front()];
    double total = 0.0;
    for (TokenId id : st.top_k) {
      st.probs.push_back(std::exp(static_cast<double>((*logits)[id] - mx)));
      total += st.probs.back();
    }
    for (double& p : st.probs) p /= total;
    st.chosen = st.top_k.front();
    if (st.top_k.size() > 1) {
      const double u = uniform01(rng);
      double acc = 0.0;
      st.chosen = st.top_k.back();
      for (std::size_t j = 0; j < st.top_k.size(); ++j) {
        acc += st.probs[j];
        if (u < acc) {
          st.chosen = st.top_k[j];
          break;
        }
      }
    }
    if (observer) observer(st);
    out.push_back(st.chosen);
    if (stop && st.chosen == *stop) break;
    if (i + 1 < cfg.max_new_tokens) logits = &session.step(st.chosen);
  }
  return out;
}

Generation generate_field(const Model& model, const codec::BpeVocab& vocab, const codec::FieldContext& context,
                          codec::FieldKind target, const SamplingConfig& cfg, const SampleObserver& observer) {
  if (static_cast<std::size_t>(model.config().vocab_size) != vocab.size()) {
    throw Error(ErrorCode::kVocabMismatch, "model and vocabulary sizes differ");
  }
  const auto prompt = codec::build_prompt(context, target, vocab);
  const auto ctx = static_cast<std::size_t>(model.config().context_len);
  if (prompt.size() >= ctx) {
    throw Error(ErrorCode::kSequenceTooLong, "prompt of " + std::to_string(prompt.size()) +
                                                 " tokens leaves no room in context " + std::to_string(ctx));
  }
  SamplingConfig c = cfg;
  c.max_new_tokens = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.max_new_tokens, 0)),
                                                            ctx - prompt.size()));
  const TokenId stop = vocab.end_id(target);

  Generation g;
  g.prompt_tokens = prompt.size();
  g.ids = sample_topk(model, prompt, c, stop, observer);
  const auto end = std::find(g.ids.begin(), g.ids.end(), stop);
  g.truncated = end == g.ids.end();
  std::vector<TokenId> body;
  for (auto it = g.ids.begin(); it != end; ++it) {
    if (!vocab.is_special(*it)) body.push_back(*it);
  }
  // Byte-level pieces can stop mid-character.
  std::string text = textnorm::sanitize_utf8(vocab.decode(body));
  // The model can spell a delimiter out of ordinary bytes; drop those too.
  for (auto kind : codec::kAllFields) {
    for (const std::string& surface : {codec::start_surface(kind), codec::end_surface(kind)}) {
      for (auto pos = text.find(surface); pos != std::string::npos; pos = text.find(surface, pos)) {
        text.erase(pos, surface.size());
      }
    }
  }
  const auto first = text.find_first_not_of(" \t\n\r");
  const auto last = text.find_last_not_of(" \t\n\r");
  g.text = first == std::string::npos ? std::string() : text.substr(first, last - first + 1);
  return g;
}

}  // namespace recipegpt::lm
