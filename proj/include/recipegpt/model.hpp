#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "recipegpt/bpe.hpp"
#include "recipegpt/fieldcodec.hpp"

namespace recipegpt::lm {

using codec::TokenId;

struct ModelConfig {
  int n_layers = 4;
  int n_heads = 4;
  int embed_dim = 128;
  int context_len = 512;
  int vocab_size = 0;

  /// Throws kInvalidArgument.
  void validate() const;
  int head_dim() const { return embed_dim / n_heads; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Offsets of each tensor inside the flat parameter buffer. Weights are stored
/// input-major (rows = fan-in), so a layer computes y = x * W + b.
struct ParamLayout {
  struct Layer {
    std::size_t ln1_g, ln1_b, w_qkv, b_qkv, w_proj, b_proj, ln2_g, ln2_b, w_fc, b_fc, w_out, b_out;
  };
  std::size_t wte = 0, wpe = 0;
  std::vector<Layer> layers;
  std::size_t lnf_g = 0, lnf_b = 0;
  std::size_t total = 0;

  explicit ParamLayout(const ModelConfig& cfg);
  /// Tensor name and element index, e.g. "h1.w_fc[37]".
  std::string describe(std::size_t flat_index) const;
};

struct LossOptions {
  bool mask_pads = true;      // only the non-pad prefix is scored
  bool mask_context = false;  // score only tokens after the last field's start token
};

struct LossResult {
  double mean = 0.0;  // 0 when nothing is scored
  double sum = 0.0;
  std::size_t count = 0;
};

/// GPT-2 style decoder: learned positions, pre-norm blocks, tanh GELU,
/// output projection tied to the token embedding.
template <typename Scalar>
class Transformer {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  /// Aligned storage: Eigen's vectorized kernels split work by address, so a
  /// fixed alignment keeps results bit-identical from run to run.
  using ParamVector = std::vector<Scalar, Eigen::aligned_allocator<Scalar>>;

  /// All parameters zero.
  explicit Transformer(ModelConfig cfg);

  /// N(0, std) weights, residual projections scaled by 1/sqrt(2 * n_layers),
  /// unit layer-norm scales, zero biases.
  void initialize(std::uint64_t seed, double std = 0.02);

  const ModelConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

  /// Logits for every position, |ids| x vocab. Throws kSequenceTooLong.
  Matrix forward(std::span<const TokenId> ids) const;

  /// Token-mean next-token cross-entropy over the batch. When `grads` is given
  /// it is resized to params().size() and filled with d(mean)/d(param).
  LossResult loss_and_grads(std::span<const codec::EncodedRecipe> batch, const LossOptions& options,
                            ParamVector* grads) const;

  template <typename Other>
  Transformer<Other> cast() const {
    Transformer<Other> out(cfg_);
    for (std::size_t i = 0; i < params_.size(); ++i) out.params()[i] = static_cast<Other>(params_[i]);
    return out;
  }

 private:
  ModelConfig cfg_;
  ParamLayout layout_;
  ParamVector params_;
};

extern template class Transformer<float>;
extern template class Transformer<double>;

using Model = Transformer<float>;

/// Incremental decoding with a per-session key/value cache. The model must
/// outlive the session; sessions are not shared between threads.
class InferenceSession {
 public:
  explicit InferenceSession(const Model& model);

  /// Feeds one token and returns the logits for the next position.
  /// Throws kSequenceTooLong past context_len.
  const Eigen::VectorXf& step(TokenId token);
  std::size_t position() const { return pos_; }

 private:
  const Model& model_;
  std::vector<Model::Matrix> keys_, values_;
  std::size_t pos_ = 0;
  Eigen::VectorXf logits_;
};

struct Checkpoint {
  Model model{ModelConfig{1, 1, 1, 1, 1}};
  std::string vocab_hash;
  std::uint64_t step = 0;
};

/// Binary: magic, version, config, vocab hash, step, float32 params, crc32.
void save_checkpoint(const std::string& path, const Model& model, const std::string& vocab_hash, std::uint64_t step);
/// Throws kIo, kFormat (bad magic/version/checksum/size).
Checkpoint load_checkpoint(const std::string& path);
/// Also throws kVocabMismatch when the checkpoint was trained on another vocabulary.
Checkpoint load_checkpoint(const std::string& path, const codec::BpeVocab& vocab);

}  // namespace recipegpt::lm
