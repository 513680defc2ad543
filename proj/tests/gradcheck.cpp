#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "recipegpt/model.hpp"

namespace testing_support {

using namespace recipegpt;

GradCheckResult gradient_check(std::uint64_t seed, std::size_t n_params, bool mask_context, double init_std,
                               double floor) {
  const lm::ModelConfig cfg{2, 2, 16, 32, 64};
  lm::Transformer<double> model(cfg);
  model.initialize(seed, init_std);

  std::mt19937_64 rng(seed ^ 0x5eed);
  std::vector<codec::EncodedRecipe> batch;
  for (std::size_t len : {32u, 20u, 9u}) {
    codec::EncodedRecipe ex;
    ex.ids.resize(32, 63);
    for (std::size_t i = 0; i < len; ++i) ex.ids[i] = static_cast<codec::TokenId>(rng() % 63);
    ex.length = len;
    ex.target_start = len / 3;
    batch.push_back(ex);
  }
  lm::LossOptions opts;
  opts.mask_context = mask_context;

  lm::Transformer<double>::ParamVector grads;
  model.loss_and_grads(batch, opts, &grads);

  std::vector<std::size_t> idx(model.params().size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(n_params, idx.size()));

  GradCheckResult res;
  const double h = 1e-5;
  for (std::size_t i : idx) {
    double& p = model.params()[i];
    const double orig = p;
    p = orig + h;
    const double up = model.loss_and_grads(batch, opts, nullptr).mean;
    p = orig - h;
    const double down = model.loss_and_grads(batch, opts, nullptr).mean;
    p = orig;
    const double numeric = (up - down) / (2 * h);
    const double analytic = grads[i];
    const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
    if (std::max(std::abs(analytic), std::abs(numeric)) < floor) ++res.below_floor;
    const double rel = std::abs(analytic - numeric) / scale;
    ++res.checked;
    if (rel >= res.worst_rel) {
      res.worst_rel = rel;
      res.worst_param = model.layout().describe(i);
      res.worst_analytic = analytic;
      res.worst_numeric = numeric;
    }
  }
  return res;
}

}  // namespace testing_support
