#include "recipegpt/model.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include <spdlog/spdlog.h>
#include <zlib.h>

#include "recipegpt/error.hpp"
#include "recipegpt/rng.hpp"

namespace recipegpt::lm {

void ModelConfig::validate() const {
  if (n_layers <= 0 || n_heads <= 0 || embed_dim <= 0 || context_len <= 0 || vocab_size <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "model config sizes must be positive");
  }
  if (embed_dim % n_heads != 0) throw Error(ErrorCode::kInvalidArgument, "embed_dim must be divisible by n_heads");
}

ParamLayout::ParamLayout(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.embed_dim, v = cfg.vocab_size, c = cfg.context_len;
  std::size_t at = 0;
  auto take = [&](std::size_t n) {
    const std::size_t off = at;
    at += n;
    return off;
  };
  wte = take(v * d);
  wpe = take(c * d);
  for (int l = 0; l < cfg.n_layers; ++l) {
    Layer L{};
    L.ln1_g = take(d);
    L.ln1_b = take(d);
    L.w_qkv = take(d * 3 * d);
    L.b_qkv = take(3 * d);
    L.w_proj = take(d * d);
    L.b_proj = take(d);
    L.ln2_g = take(d);
    L.ln2_b = take(d);
    L.w_fc = take(d * 4 * d);
    L.b_fc = take(4 * d);
    L.w_out = take(4 * d * d);
    L.b_out = take(d);
    layers.push_back(L);
  }
  lnf_g = take(d);
  lnf_b = take(d);
  total = at;
}

std::string ParamLayout::describe(std::size_t i) const {
  std::vector<std::pair<std::string, std::size_t>> starts = {{"wte", wte}, {"wpe", wpe}};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    const std::string p = "h" + std::to_string(l) + ".";
    for (auto [name, off] : {std::pair{"ln1_g", L.ln1_g}, {"ln1_b", L.ln1_b}, {"w_qkv", L.w_qkv}, {"b_qkv", L.b_qkv},
                             {"w_proj", L.w_proj}, {"b_proj", L.b_proj}, {"ln2_g", L.ln2_g}, {"ln2_b", L.ln2_b},
                             {"w_fc", L.w_fc}, {"b_fc", L.b_fc}, {"w_out", L.w_out}, {"b_out", L.b_out}}) {
      starts.emplace_back(p + name, off);
    }
  }
  starts.emplace_back("lnf_g", lnf_g);
  starts.emplace_back("lnf_b", lnf_b);
  for (std::size_t k = starts.size(); k-- > 0;) {
    if (i >= starts[k].second) return starts[k].first + "[" + std::to_string(i - starts[k].second) + "]";
  }
  return "?";
}

namespace {

constexpr double kLayerNormEps = 1e-5;

template <typename S>
using Mat = typename Transformer<S>::Matrix;
template <typename S>
using CMap = Eigen::Map<const Mat<S>>;
template <typename S>
using MMap = Eigen::Map<Mat<S>>;
template <typename S>
using CVec = Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>>;
template <typename S>
using MVec = Eigen::Map<Eigen::Matrix<S, 1, Eigen::Dynamic>>;

template <typename S>
S gelu(S x) {
  const S c = static_cast<S>(0.7978845608028654);  // sqrt(2/pi)
  return static_cast<S>(0.5) * x * (1 + std::tanh(c * (x + static_cast<S>(0.044715) * x * x * x)));
}

template <typename S>
S gelu_grad(S x) {
  const S c = static_cast<S>(0.7978845608028654);
  const S a = static_cast<S>(0.044715);
  const S t = std::tanh(c * (x + a * x * x * x));
  return static_cast<S>(0.5) * (1 + t) + static_cast<S>(0.5) * x * (1 - t * t) * c * (1 + 3 * a * x * x);
}

// Row-wise layer norm; keeps xhat and 1/sigma for the backward pass.
template <typename S>
void layer_norm(const Mat<S>& x, const S* g, const S* b, Mat<S>& y, Mat<S>* xhat, std::vector<S>* rstd) {
  const Eigen::Index n = x.rows(), d = x.cols();
  y.resize(n, d);
  if (xhat) xhat->resize(n, d);
  if (rstd) rstd->resize(n);
  CVec<S> gv(g, d), bv(b, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const S mean = x.row(r).mean();
    const S var = (x.row(r).array() - mean).square().mean();
    const S rs = static_cast<S>(1.0 / std::sqrt(static_cast<double>(var) + kLayerNormEps));
    auto xh = ((x.row(r).array() - mean) * rs).matrix();
    if (xhat) xhat->row(r) = xh;
    if (rstd) (*rstd)[r] = rs;
    y.row(r) = (xh.array() * gv.array() + bv.array()).matrix();
  }
}

template <typename S>
void layer_norm_backward(const Mat<S>& dy, const Mat<S>& xhat, const std::vector<S>& rstd, const S* g, S* dg, S* db,
                         Mat<S>& dx_accum) {
  const Eigen::Index n = dy.rows(), d = dy.cols();
  CVec<S> gv(g, d);
  MVec<S> dgv(dg, d), dbv(db, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    dgv.array() += dy.row(r).array() * xhat.row(r).array();
    dbv += dy.row(r);
    const auto dxh = (dy.row(r).array() * gv.array()).eval();
    const S m1 = dxh.mean();
    const S m2 = (dxh * xhat.row(r).array()).mean();
    dx_accum.row(r).array() += rstd[r] * (dxh - m1 - xhat.row(r).array() * m2);
  }
}

struct Segment {
  Eigen::Index offset;
  Eigen::Index length;
};

template <typename S>
struct LayerCache {
  Mat<S> x_in, ln1, xhat1, qkv, att, x_mid, ln2, xhat2, fc_pre, fc_act;
  std::vector<S> rstd1, rstd2;
  std::vector<Mat<S>> probs;  // per (segment, head), row-stochastic and causal
};

template <typename S>
struct ForwardCache {
  std::vector<Segment> segments;
  std::vector<TokenId> tokens;
  std::vector<Eigen::Index> positions;
  std::vector<LayerCache<S>> layers;
  Mat<S> x_final, lnf, xhatf;
  std::vector<S> rstdf;
};

template <typename S>
Mat<S> run_forward(const ModelConfig& cfg, const ParamLayout& L, std::span<const S> P, ForwardCache<S>& fc,
                   bool keep) {
  const Eigen::Index d = cfg.embed_dim, n = static_cast<Eigen::Index>(fc.tokens.size()), h = cfg.n_heads;
  const Eigen::Index hd = cfg.head_dim();
  const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(hd)));
  const S* p = P.data();
  CMap<S> wte(p + L.wte, cfg.vocab_size, d), wpe(p + L.wpe, cfg.context_len, d);

  Mat<S> x(n, d);
  for (Eigen::Index r = 0; r < n; ++r) x.row(r) = wte.row(fc.tokens[r]) + wpe.row(fc.positions[r]);

  if (keep) fc.layers.assign(cfg.n_layers, {});
  for (int l = 0; l < cfg.n_layers; ++l) {
    const auto& Ly = L.layers[l];
    LayerCache<S> local;
    LayerCache<S>& c = keep ? fc.layers[l] : local;
    c.x_in = std::move(x);
    layer_norm<S>(c.x_in, p + Ly.ln1_g, p + Ly.ln1_b, c.ln1, keep ? &c.xhat1 : nullptr, keep ? &c.rstd1 : nullptr);
    c.qkv.noalias() = c.ln1 * CMap<S>(p + Ly.w_qkv, d, 3 * d);
    c.qkv.rowwise() += CVec<S>(p + Ly.b_qkv, 3 * d);
    c.att.setZero(n, d);
    if (keep) c.probs.clear();
    for (const auto& seg : fc.segments) {
      const Eigen::Index t = seg.length;
      for (Eigen::Index hh = 0; hh < h; ++hh) {
        auto q = c.qkv.block(seg.offset, hh * hd, t, hd);
        auto k = c.qkv.block(seg.offset, d + hh * hd, t, hd);
        auto v = c.qkv.block(seg.offset, 2 * d + hh * hd, t, hd);
        Mat<S> s = (q * k.transpose()) * scale;
        for (Eigen::Index i = 0; i < t; ++i) {
          const S mx = s.row(i).head(i + 1).maxCoeff();
          S sum = 0;
          for (Eigen::Index j = 0; j <= i; ++j) {
            s(i, j) = std::exp(s(i, j) - mx);
            sum += s(i, j);
          }
          for (Eigen::Index j = 0; j <= i; ++j) s(i, j) /= sum;
          for (Eigen::Index j = i + 1; j < t; ++j) s(i, j) = 0;
        }
        c.att.block(seg.offset, hh * hd, t, hd).noalias() = s * v;
        if (keep) c.probs.push_back(std::move(s));
      }
    }
    c.x_mid = c.x_in;
    c.x_mid.noalias() += c.att * CMap<S>(p + Ly.w_proj, d, d);
    c.x_mid.rowwise() += CVec<S>(p + Ly.b_proj, d);
    layer_norm<S>(c.x_mid, p + Ly.ln2_g, p + Ly.ln2_b, c.ln2, keep ? &c.xhat2 : nullptr, keep ? &c.rstd2 : nullptr);
    c.fc_pre.noalias() = c.ln2 * CMap<S>(p + Ly.w_fc, d, 4 * d);
    c.fc_pre.rowwise() += CVec<S>(p + Ly.b_fc, 4 * d);
    c.fc_act = c.fc_pre.unaryExpr([](S v) { return gelu(v); });
    x = c.x_mid;
    x.noalias() += c.fc_act * CMap<S>(p + Ly.w_out, 4 * d, d);
    x.rowwise() += CVec<S>(p + Ly.b_out, d);
  }
  fc.x_final = std::move(x);
  layer_norm<S>(fc.x_final, p + L.lnf_g, p + L.lnf_b, fc.lnf, keep ? &fc.xhatf : nullptr, keep ? &fc.rstdf : nullptr);
  Mat<S> logits = fc.lnf * wte.transpose();
  return logits;
}

}  // namespace

template <typename Scalar>
Transformer<Scalar>::Transformer(ModelConfig cfg) : cfg_(cfg), layout_(cfg), params_(layout_.total, Scalar(0)) {}

template <typename Scalar>
void Transformer<Scalar>::initialize(std::uint64_t seed, double std) {
  std::mt19937_64 rng(seed);
  // Box-Muller on our own uniform draws so weights match across standard libraries.
  auto normal = [&]() {
    double u1 = 0;
    while (u1 <= 0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  auto fill = [&](std::size_t off, std::size_t n, double s) {
    for (std::size_t i = 0; i < n; ++i) params_[off + i] = static_cast<Scalar>(normal() * s);
  };
  auto set = [&](std::size_t off, std::size_t n, Scalar v) { std::fill_n(params_.begin() + off, n, v); };
  std::fill(params_.begin(), params_.end(), Scalar(0));
  const std::size_t d = cfg_.embed_dim;
  const double resid = std / std::sqrt(2.0 * cfg_.n_layers);
  fill(layout_.wte, static_cast<std::size_t>(cfg_.vocab_size) * d, std);
  fill(layout_.wpe, static_cast<std::size_t>(cfg_.context_len) * d, std);
  for (const auto& L : layout_.layers) {
    set(L.ln1_g, d, Scalar(1));
    fill(L.w_qkv, d * 3 * d, std);
    fill(L.w_proj, d * d, resid);
    set(L.ln2_g, d, Scalar(1));
    fill(L.w_fc, d * 4 * d, std);
    fill(L.w_out, 4 * d * d, resid);
  }
  set(layout_.lnf_g, d, Scalar(1));
}

template <typename Scalar>
typename Transformer<Scalar>::Matrix Transformer<Scalar>::forward(std::span<const TokenId> ids) const {
  if (ids.size() > static_cast<std::size_t>(cfg_.context_len)) {
    throw Error(ErrorCode::kSequenceTooLong, "sequence of " + std::to_string(ids.size()) + " tokens exceeds context " +
                                                 std::to_string(cfg_.context_len));
  }
  ForwardCache<Scalar> fc;
  const auto n = static_cast<Eigen::Index>(ids.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ids[i] < 0 || ids[i] >= cfg_.vocab_size) throw Error(ErrorCode::kUnknownId, "token id out of range");
    fc.tokens.push_back(ids[i]);
    fc.positions.push_back(i);
  }
  if (n == 0) return Matrix(0, cfg_.vocab_size);
  fc.segments.push_back({0, n});
  return run_forward<Scalar>(cfg_, layout_, params_, fc, false);
}

template <typename Scalar>
LossResult Transformer<Scalar>::loss_and_grads(std::span<const codec::EncodedRecipe> batch,
                                               const LossOptions& options, ParamVector* grads) const {
  using S = Scalar;
  ForwardCache<S> fc;
  // Target rows: (packed row, target id).
  std::vector<std::pair<Eigen::Index, TokenId>> targets;
  Eigen::Index offset = 0;
  for (const auto& ex : batch) {
    const std::size_t len = options.mask_pads ? ex.length : ex.ids.size();
    if (len > ex.ids.size()) throw Error(ErrorCode::kInvalidArgument, "example length exceeds its ids");
    if (len > static_cast<std::size_t>(cfg_.context_len)) {
      throw Error(ErrorCode::kSequenceTooLong, "example longer than the model context");
    }
    if (len == 0) continue;
    for (std::size_t i = 0; i < len; ++i) {
      if (ex.ids[i] < 0 || ex.ids[i] >= cfg_.vocab_size) throw Error(ErrorCode::kUnknownId, "token id out of range");
      fc.tokens.push_back(ex.ids[i]);
      fc.positions.push_back(static_cast<Eigen::Index>(i));
    }
    for (std::size_t i = 0; i + 1 < len; ++i) {
      if (options.mask_context && i + 1 <= ex.target_start) continue;
      targets.emplace_back(offset + static_cast<Eigen::Index>(i), ex.ids[i + 1]);
    }
    fc.segments.push_back({offset, static_cast<Eigen::Index>(len)});
    offset += static_cast<Eigen::Index>(len);
  }

  if (grads) grads->assign(params_.size(), S(0));
  LossResult result;
  if (targets.empty()) {
    spdlog::warn("loss over a batch with no scored targets is defined as 0");
    return result;
  }

  Matrix logits = run_forward<S>(cfg_, layout_, params_, fc, grads != nullptr);
  const double inv_count = 1.0 / static_cast<double>(targets.size());
  Matrix dlogits;
  if (grads) dlogits.setZero(logits.rows(), logits.cols());
  for (const auto& [row, tgt] : targets) {
    const S mx = logits.row(row).maxCoeff();
    const auto e = (logits.row(row).array() - mx).exp().eval();
    const S sum = e.sum();
    const double nll = std::log(static_cast<double>(sum)) + static_cast<double>(mx - logits(row, tgt));
    result.sum += nll;
    if (grads) {
      dlogits.row(row) = (e / sum).matrix() * static_cast<S>(inv_count);
      dlogits(row, tgt) -= static_cast<S>(inv_count);
    }
  }
  result.count = targets.size();
  result.mean = result.sum * inv_count;
  if (!grads) return result;

  const Eigen::Index d = cfg_.embed_dim, h = cfg_.n_heads, hd = cfg_.head_dim();
  const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(hd)));
  const S* p = params_.data();
  S* g = grads->data();
  const ParamLayout& L = layout_;
  CMap<S> wte(p + L.wte, cfg_.vocab_size, d);
  MMap<S> dwte(g + L.wte, cfg_.vocab_size, d);

  Matrix dlnf = dlogits * wte;
  dwte.noalias() += dlogits.transpose() * fc.lnf;
  dlogits.resize(0, 0);
  Matrix dx = Matrix::Zero(dlnf.rows(), d);
  layer_norm_backward<S>(dlnf, fc.xhatf, fc.rstdf, p + L.lnf_g, g + L.lnf_g, g + L.lnf_b, dx);

  for (int l = cfg_.n_layers - 1; l >= 0; --l) {
    const auto& Ly = L.layers[l];
    auto& c = fc.layers[l];
    // feed-forward branch; dx is d(x_out), and flows unchanged into d(x_mid)
    MVec<S>(g + Ly.b_out, d) += dx.colwise().sum();
    MMap<S>(g + Ly.w_out, 4 * d, d).noalias() += c.fc_act.transpose() * dx;
    Matrix dpre = dx * CMap<S>(p + Ly.w_out, 4 * d, d).transpose();
    dpre.array() *= c.fc_pre.unaryExpr([](S v) { return gelu_grad(v); }).array();
    MVec<S>(g + Ly.b_fc, 4 * d) += dpre.colwise().sum();
    MMap<S>(g + Ly.w_fc, d, 4 * d).noalias() += c.ln2.transpose() * dpre;
    Matrix dln2 = dpre * CMap<S>(p + Ly.w_fc, d, 4 * d).transpose();
    dpre.resize(0, 0);
    layer_norm_backward<S>(dln2, c.xhat2, c.rstd2, p + Ly.ln2_g, g + Ly.ln2_g, g + Ly.ln2_b, dx);

    // attention branch; dx is now d(x_mid)
    MVec<S>(g + Ly.b_proj, d) += dx.colwise().sum();
    MMap<S>(g + Ly.w_proj, d, d).noalias() += c.att.transpose() * dx;
    Matrix datt = dx * CMap<S>(p + Ly.w_proj, d, d).transpose();
    Matrix dqkv = Matrix::Zero(c.qkv.rows(), 3 * d);
    std::size_t pi = 0;
    for (const auto& seg : fc.segments) {
      const Eigen::Index t = seg.length;
      for (Eigen::Index hh = 0; hh < h; ++hh, ++pi) {
        const Matrix& P = c.probs[pi];
        auto q = c.qkv.block(seg.offset, hh * hd, t, hd);
        auto k = c.qkv.block(seg.offset, d + hh * hd, t, hd);
        auto v = c.qkv.block(seg.offset, 2 * d + hh * hd, t, hd);
        auto dout = datt.block(seg.offset, hh * hd, t, hd);
        Matrix dP = dout * v.transpose();
        dqkv.block(seg.offset, 2 * d + hh * hd, t, hd).noalias() += P.transpose() * dout;
        // softmax backward: dS = P * (dP - rowsum(P * dP))
        Matrix dS = P.cwiseProduct(dP);
        const Eigen::Matrix<S, Eigen::Dynamic, 1> rs = dS.rowwise().sum();
        dS.noalias() -= P.cwiseProduct(rs.replicate(1, t));
        dS *= scale;
        dqkv.block(seg.offset, hh * hd, t, hd).noalias() += dS * k;
        dqkv.block(seg.offset, d + hh * hd, t, hd).noalias() += dS.transpose() * q;
      }
    }
    MVec<S>(g + Ly.b_qkv, 3 * d) += dqkv.colwise().sum();
    MMap<S>(g + Ly.w_qkv, d, 3 * d).noalias() += c.ln1.transpose() * dqkv;
    Matrix dln1 = dqkv * CMap<S>(p + Ly.w_qkv, d, 3 * d).transpose();
    layer_norm_backward<S>(dln1, c.xhat1, c.rstd1, p + Ly.ln1_g, g + Ly.ln1_g, g + Ly.ln1_b, dx);
    c = LayerCache<S>{};
  }

  MMap<S> dwpe(g + L.wpe, cfg_.context_len, d);
  for (Eigen::Index r = 0; r < dx.rows(); ++r) {
    dwte.row(fc.tokens[r]) += dx.row(r);
    dwpe.row(fc.positions[r]) += dx.row(r);
  }
  return result;
}

template class Transformer<float>;
template class Transformer<double>;

InferenceSession::InferenceSession(const Model& model) : model_(model) {
  const auto& cfg = model.config();
  keys_.assign(cfg.n_layers, Model::Matrix(cfg.context_len, cfg.embed_dim));
  values_.assign(cfg.n_layers, Model::Matrix(cfg.context_len, cfg.embed_dim));
}

const Eigen::VectorXf& InferenceSession::step(TokenId token) {
  using S = float;
  const auto& cfg = model_.config();
  const auto& L = model_.layout();
  if (pos_ >= static_cast<std::size_t>(cfg.context_len)) {
    throw Error(ErrorCode::kSequenceTooLong, "generation reached the model context");
  }
  if (token < 0 || token >= cfg.vocab_size) throw Error(ErrorCode::kUnknownId, "token id out of range");
  const Eigen::Index d = cfg.embed_dim, hd = cfg.head_dim(), t = static_cast<Eigen::Index>(pos_) + 1;
  const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(hd)));
  const S* p = model_.params().data();
  CMap<S> wte(p + L.wte, cfg.vocab_size, d), wpe(p + L.wpe, cfg.context_len, d);

  Model::Matrix x = wte.row(token) + wpe.row(static_cast<Eigen::Index>(pos_));
  Model::Matrix y, qkv, att(1, d), hidden;
  for (int l = 0; l < cfg.n_layers; ++l) {
    const auto& Ly = L.layers[l];
    layer_norm<S>(x, p + Ly.ln1_g, p + Ly.ln1_b, y, nullptr, nullptr);
    qkv.noalias() = y * CMap<S>(p + Ly.w_qkv, d, 3 * d);
    qkv += CVec<S>(p + Ly.b_qkv, 3 * d);
    keys_[l].row(static_cast<Eigen::Index>(pos_)) = qkv.block(0, d, 1, d);
    values_[l].row(static_cast<Eigen::Index>(pos_)) = qkv.block(0, 2 * d, 1, d);
    for (Eigen::Index hh = 0; hh < cfg.n_heads; ++hh) {
      Eigen::Matrix<S, 1, Eigen::Dynamic> s =
          (qkv.block(0, hh * hd, 1, hd) * keys_[l].block(0, hh * hd, t, hd).transpose()) * scale;
      const S mx = s.maxCoeff();
      s = (s.array() - mx).exp().matrix();
      s /= s.sum();
      att.block(0, hh * hd, 1, hd).noalias() = s * values_[l].block(0, hh * hd, t, hd);
    }
    x.noalias() += att * CMap<S>(p + Ly.w_proj, d, d);
    x += CVec<S>(p + Ly.b_proj, d);
    layer_norm<S>(x, p + Ly.ln2_g, p + Ly.ln2_b, y, nullptr, nullptr);
    hidden.noalias() = y * CMap<S>(p + Ly.w_fc, d, 4 * d);
    hidden += CVec<S>(p + Ly.b_fc, 4 * d);
    hidden = hidden.unaryExpr([](S v) { return gelu(v); });
    x.noalias() += hidden * CMap<S>(p + Ly.w_out, 4 * d, d);
    x += CVec<S>(p + Ly.b_out, d);
  }
  layer_norm<S>(x, p + L.lnf_g, p + L.lnf_b, y, nullptr, nullptr);
  logits_ = (wte * y.transpose()).col(0);
  ++pos_;
  return logits_;
}

namespace {

constexpr char kMagic[8] = {'R', 'G', 'P', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::string_view& in) {
  if (in.size() < sizeof(T)) throw Error(ErrorCode::kFormat, "checkpoint truncated");
  T v;
  std::memcpy(&v, in.data(), sizeof(T));
  in.remove_prefix(sizeof(T));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const std::string& vocab_hash, std::uint64_t step) {
  const auto& cfg = model.config();
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  for (int v : {cfg.n_layers, cfg.n_heads, cfg.embed_dim, cfg.context_len, cfg.vocab_size}) put<std::int32_t>(out, v);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(vocab_hash.size()));
  out += vocab_hash;
  put<std::uint64_t>(out, step);
  put<std::uint64_t>(out, model.params().size());
  out.append(reinterpret_cast<const char*>(model.params().data()), model.params().size() * sizeof(float));
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size())));
  put<std::uint32_t>(out, crc);
  write_file_atomic(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string data = read_file(path);
  if (data.size() < sizeof(kMagic) + 8 || std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kFormat, path + " is not a checkpoint");
  }
  std::string_view body(data.data(), data.size() - 4);
  std::string_view tail(data.data() + data.size() - 4, 4);
  const auto stored = get<std::uint32_t>(tail);
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
  if (crc != stored) throw Error(ErrorCode::kFormat, path + ": checksum mismatch");
  body.remove_prefix(sizeof(kMagic));
  if (get<std::uint32_t>(body) != kCheckpointVersion) throw Error(ErrorCode::kFormat, path + ": unsupported version");
  ModelConfig cfg;
  cfg.n_layers = get<std::int32_t>(body);
  cfg.n_heads = get<std::int32_t>(body);
  cfg.embed_dim = get<std::int32_t>(body);
  cfg.context_len = get<std::int32_t>(body);
  cfg.vocab_size = get<std::int32_t>(body);
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, path + ": " + e.what());
  }
  const auto hash_len = get<std::uint32_t>(body);
  if (body.size() < hash_len) throw Error(ErrorCode::kFormat, "checkpoint truncated");
  Checkpoint ck{Model(cfg), std::string(body.substr(0, hash_len)), 0};
  body.remove_prefix(hash_len);
  ck.step = get<std::uint64_t>(body);
  const auto count = get<std::uint64_t>(body);
  if (count != ck.model.params().size() || body.size() != count * sizeof(float)) {
    throw Error(ErrorCode::kFormat, path + ": parameter count does not match config");
  }
  std::memcpy(ck.model.params().data(), body.data(), body.size());
  return ck;
}

Checkpoint load_checkpoint(const std::string& path, const codec::BpeVocab& vocab) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.vocab_hash != vocab.hash() || static_cast<std::size_t>(ck.model.config().vocab_size) != vocab.size()) {
    throw Error(ErrorCode::kVocabMismatch, "checkpoint " + path + " was trained with vocabulary " + ck.vocab_hash +
                                               ", loaded vocabulary is " + vocab.hash());
  }
  return ck;
}

}  // namespace recipegpt::lm
