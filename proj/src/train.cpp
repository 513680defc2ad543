#include "recipegpt/train.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "recipegpt/error.hpp"
#include "recipegpt/rng.hpp"

namespace recipegpt::lm {

std::vector<codec::EncodedRecipe> encode_dataset(std::span<const corpus::RecipeRecord> records,
                                                 const codec::BpeVocab& vocab, std::size_t max_len,
                                                 std::uint64_t seed) {
  std::vector<codec::EncodedRecipe> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.push_back(codec::make_training_example(records[i], mix_seed(seed, i), vocab, max_len));
  }
  return out;
}

double perplexity(const Model& model, std::span<const codec::EncodedRecipe> dataset, const LossOptions& options,
                  std::size_t batch_size) {
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be positive");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < dataset.size(); i += batch_size) {
    const auto chunk = dataset.subspan(i, std::min(batch_size, dataset.size() - i));
    const LossResult r = model.loss_and_grads(chunk, options, nullptr);
    sum += r.sum;
    count += r.count;
  }
  return count == 0 ? 1.0 : std::exp(sum / static_cast<double>(count));
}

TrainResult train(const ModelConfig& config, const codec::BpeVocab& vocab,
                  std::span<const corpus::RecipeRecord> train_records,
                  std::span<const corpus::RecipeRecord> validation_records, const TrainConfig& options,
                  const std::function<void(const TracePoint&)>& on_eval) {
  config.validate();
  if (static_cast<std::size_t>(config.vocab_size) != vocab.size()) {
    throw Error(ErrorCode::kVocabMismatch, "model vocab_size " + std::to_string(config.vocab_size) +
                                               " does not match vocabulary size " + std::to_string(vocab.size()));
  }
  if (train_records.empty()) throw Error(ErrorCode::kInvalidArgument, "training split is empty");
  if (options.batch_size <= 0 || options.steps < 0 || options.eval_every <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch_size and eval_every must be positive, steps non-negative");
  }
  if (options.max_len > static_cast<std::size_t>(config.context_len)) {
    throw Error(ErrorCode::kInvalidArgument, "max_len exceeds the model context");
  }

  TrainResult result{Model(config), {}, {}};
  Model& model = result.model;
  model.initialize(mix_seed(options.seed, 0x696e6974), options.init_std);

  if (validation_records.empty()) {
    spdlog::warn("validation split is empty; tracking perplexity on training records");
    validation_records = train_records;
  }
  const auto val_set = encode_dataset(validation_records.first(std::min(options.val_examples, validation_records.size())),
                                      vocab, options.max_len, mix_seed(options.seed, 0x76616c));

  auto record = [&](int step, std::optional<double> loss) {
    TracePoint tp{step, loss, perplexity(model, val_set, options.loss, static_cast<std::size_t>(options.batch_size))};
    result.trace.push_back(tp);
    if (on_eval) on_eval(tp);
  };
  record(0, std::nullopt);

  const std::size_t n_params = model.params().size();
  TrainState& st = result.state;
  st.m.assign(n_params, 0.0f);
  st.v.assign(n_params, 0.0f);
  st.seed = options.seed;

  std::mt19937_64 order_rng(mix_seed(options.seed, 0x6f72646572));
  std::vector<std::size_t> order(train_records.size());
  std::size_t cursor = order.size();
  std::uint64_t epoch = 0;
  Model::ParamVector grads;
  std::vector<codec::EncodedRecipe> batch;
  double loss_window = 0.0;
  int loss_window_n = 0;

  for (int step = 1; step <= options.steps; ++step) {
    batch.clear();
    for (int b = 0; b < options.batch_size; ++b) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[bounded(order_rng, i)]);
        cursor = 0;
        ++epoch;
      }
      const std::size_t idx = order[cursor++];
      batch.push_back(codec::make_training_example(train_records[idx], mix_seed(options.seed ^ (epoch << 32), idx),
                                                   vocab, options.max_len));
    }
    const LossResult lr = model.loss_and_grads(batch, options.loss, &grads);
    loss_window += lr.mean;
    ++loss_window_n;

    double norm2 = 0.0;
    for (float g : grads) norm2 += static_cast<double>(g) * g;
    const double norm = std::sqrt(norm2);
    const double clip = (options.grad_clip > 0 && norm > options.grad_clip) ? options.grad_clip / norm : 1.0;

    st.lr = options.warmup_steps > 0 ? options.lr * std::min(1.0, static_cast<double>(step) / options.warmup_steps)
                                     : options.lr;
    const double bc1 = 1.0 - std::pow(options.beta1, step);
    const double bc2 = 1.0 - std::pow(options.beta2, step);
    const auto b1 = static_cast<float>(options.beta1), b2 = static_cast<float>(options.beta2);
    const auto step_size = static_cast<float>(st.lr / bc1);
    const auto inv_bc2 = static_cast<float>(1.0 / bc2);
    const auto eps = static_cast<float>(options.adam_eps);
    const auto fclip = static_cast<float>(clip);
    auto& p = model.params();
    for (std::size_t i = 0; i < n_params; ++i) {
      const float g = grads[i] * fclip;
      st.m[i] = b1 * st.m[i] + (1 - b1) * g;
      st.v[i] = b2 * st.v[i] + (1 - b2) * g * g;
      p[i] -= step_size * st.m[i] / (std::sqrt(st.v[i] * inv_bc2) + eps);
    }
    st.step = step;

    if (step % options.eval_every == 0 || step == options.steps) {
      record(step, loss_window / loss_window_n);
      loss_window = 0.0;
      loss_window_n = 0;
    }
  }
  return result;
}

std::string trace_to_jsonl(std::span<const TracePoint> trace) {
  std::string out;
  for (const auto& tp : trace) {
    nlohmann::json j;
    j["step"] = tp.step;
    j["train_loss"] = tp.train_loss ? nlohmann::json(*tp.train_loss) : nlohmann::json(nullptr);
    j["val_ppl"] = tp.val_ppl;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace recipegpt::lm
