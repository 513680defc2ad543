#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "recipegpt/error.hpp"
#include "recipegpt/sampling.hpp"
#include "support.hpp"

using namespace recipegpt;
using namespace recipegpt::lm;
using codec::FieldKind;

namespace {

const codec::BpeVocab& vocab() { return testing_support::bundled_vocab(); }

Model random_model(std::uint64_t seed, int context = 128) {
  Model m(ModelConfig{2, 2, 16, context, static_cast<int>(vocab().size())});
  m.initialize(seed, 0.5);
  return m;
}

/// Every next-token distribution puts all mass on `token`.
Model constant_model(TokenId token) {
  Model m(ModelConfig{1, 1, 8, 128, static_cast<int>(vocab().size())});
  m.params()[m.layout().lnf_b] = 100.0f;
  m.params()[m.layout().wte + static_cast<std::size_t>(token) * 8] = 1.0f;
  return m;
}

codec::FieldContext context() {
  return {{FieldKind::kTitle, "Tomato Soup"}, {FieldKind::kIngredients, "tomatoes\nonion\nbutter"}};
}

}  // namespace

TEST(TopK, TiesByAscendingId) {
  Eigen::VectorXf logits(6);
  logits << 1, 3, 3, 0, 3, 2;
  EXPECT_EQ(top_k_ids(logits, 1), (std::vector<TokenId>{1}));
  EXPECT_EQ(top_k_ids(logits, 4), (std::vector<TokenId>{1, 2, 4, 5}));
  EXPECT_EQ(top_k_ids(logits, 6).size(), 6u);
}

TEST(Sampling, GreedyIgnoresSeed) {
  const auto m = random_model(1);
  const auto prompt = codec::build_prompt(context(), FieldKind::kInstructions, vocab());
  SamplingConfig cfg{1, 40, 0};
  const auto ref = sample_topk(m, prompt, cfg, std::nullopt);
  EXPECT_EQ(ref.size(), 40u);
  for (std::uint64_t seed = 1; seed < 10; ++seed) {
    cfg.seed = seed;
    EXPECT_EQ(sample_topk(m, prompt, cfg, std::nullopt), ref);
  }
  // greedy equals argmax of a full forward pass at every step
  std::vector<TokenId> seq = prompt;
  for (TokenId t : ref) {
    const auto logits = m.forward(seq);
    Eigen::Index arg;
    logits.row(logits.rows() - 1).maxCoeff(&arg);
    EXPECT_EQ(arg, t);
    seq.push_back(t);
  }
}

TEST(Sampling, EmittedTokensInsideTopK) {
  const auto m = random_model(2);
  const auto prompt = codec::build_prompt(context(), FieldKind::kInstructions, vocab());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<TokenId> seq = prompt;
    std::size_t steps = 0;
    const auto out = sample_topk(m, prompt, SamplingConfig{5, 30, seed}, std::nullopt, [&](const SampleStep& s) {
      ASSERT_EQ(s.top_k.size(), 5u);
      EXPECT_NE(std::find(s.top_k.begin(), s.top_k.end(), s.chosen), s.top_k.end());
      double mass = 0;
      for (double p : s.probs) mass += p;
      EXPECT_NEAR(mass, 1.0, 1e-12);
      // independent check of the top-5 set from a full forward pass
      const auto logits = m.forward(seq);
      Eigen::VectorXf last = logits.row(logits.rows() - 1).transpose();
      EXPECT_EQ(top_k_ids(last, 5), s.top_k);
      seq.push_back(s.chosen);
      ++steps;
    });
    EXPECT_EQ(out.size(), steps);
  }
}

TEST(Sampling, DeterministicPerSeedAndVariesAcrossSeeds) {
  const auto m = random_model(3);
  const auto prompt = codec::build_prompt(context(), FieldKind::kInstructions, vocab());
  const auto a = sample_topk(m, prompt, SamplingConfig{5, 40, 9}, std::nullopt);
  EXPECT_EQ(a, sample_topk(m, prompt, SamplingConfig{5, 40, 9}, std::nullopt));
  std::size_t differ = 0;
  for (std::uint64_t s = 10; s < 15; ++s) differ += sample_topk(m, prompt, SamplingConfig{5, 40, s}, std::nullopt) != a;
  EXPECT_GT(differ, 0u);
}

TEST(Sampling, RenormalizedFrequencies) {
  // a two-token distribution: frequencies follow the renormalized softmax
  Model m(ModelConfig{1, 1, 2, 8, 4});
  m.params()[m.layout().lnf_b] = 1.0f;
  m.params()[m.layout().wte + 0 * 2] = 1.0f;   // logit 1
  m.params()[m.layout().wte + 1 * 2] = 0.0f;   // logit 0
  m.params()[m.layout().wte + 2 * 2] = -5.0f;
  m.params()[m.layout().wte + 3 * 2] = -5.0f;
  std::map<TokenId, int> counts;
  const int n = 4000;
  for (int s = 0; s < n; ++s) counts[sample_topk(m, std::vector<TokenId>{3}, SamplingConfig{2, 1, std::uint64_t(s)}, std::nullopt)[0]]++;
  const double p0 = std::exp(1.0) / (std::exp(1.0) + 1.0);
  EXPECT_NEAR(counts[0] / double(n), p0, 0.03);
  EXPECT_EQ(counts[0] + counts[1], n);
}

TEST(Sampling, StopsAtStopToken) {
  const TokenId end = vocab().end_id(FieldKind::kInstructions);
  const auto m = constant_model(end);
  const auto out = sample_topk(m, std::vector<TokenId>{1, 2}, SamplingConfig{3, 50, 0}, end);
  EXPECT_EQ(out, (std::vector<TokenId>{end}));
}

TEST(Sampling, Errors) {
  const auto m = random_model(4, 64);
  auto code_of = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code_of([&] { sample_topk(m, std::vector<TokenId>{}, SamplingConfig{}, std::nullopt); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { sample_topk(m, std::vector<TokenId>{1}, SamplingConfig{0, 4, 0}, std::nullopt); }),
            ErrorCode::kOutOfRange);
  EXPECT_EQ(code_of([&] {
              sample_topk(m, std::vector<TokenId>{1}, SamplingConfig{static_cast<int>(vocab().size()) + 1, 4, 0},
                          std::nullopt);
            }),
            ErrorCode::kOutOfRange);
  EXPECT_EQ(code_of([&] { sample_topk(m, std::vector<TokenId>(10, 1), SamplingConfig{1, 55, 0}, std::nullopt); }),
            ErrorCode::kSequenceTooLong);
  EXPECT_NO_THROW(sample_topk(m, std::vector<TokenId>(10, 1), SamplingConfig{1, 54, 0}, std::nullopt));
}

TEST(GenerateField, StopsCleanly) {
  const auto m = constant_model(vocab().end_id(FieldKind::kInstructions));
  const auto g = generate_field(m, vocab(), context(), FieldKind::kInstructions, SamplingConfig{3, 50, 0});
  EXPECT_FALSE(g.truncated);
  EXPECT_EQ(g.text, "");
}

TEST(GenerateField, TruncatedWhenBudgetRunsOut) {
  const auto word = vocab().encode(" stir");
  ASSERT_EQ(word.size(), 1u);
  const auto m = constant_model(word[0]);
  const auto g = generate_field(m, vocab(), context(), FieldKind::kInstructions, SamplingConfig{1, 5, 0});
  EXPECT_TRUE(g.truncated);
  EXPECT_EQ(g.text, "stir stir stir stir stir");
  EXPECT_EQ(g.ids.size(), 5u);
}

TEST(GenerateField, SpecialTokensStripped) {
  const auto m = constant_model(vocab().pad_id());
  const auto g = generate_field(m, vocab(), context(), FieldKind::kInstructions, SamplingConfig{1, 8, 0});
  EXPECT_TRUE(g.truncated);
  EXPECT_EQ(g.text, "");
  const auto r = random_model(5);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto out = generate_field(r, vocab(), context(), FieldKind::kInstructions, SamplingConfig{30, 60, s});
    for (auto k : codec::kAllFields) {
      EXPECT_EQ(out.text.find(codec::start_surface(k)), std::string::npos);
      EXPECT_EQ(out.text.find(codec::end_surface(k)), std::string::npos);
    }
  }
}

TEST(GenerateField, BudgetClampedToContext) {
  const auto word = vocab().encode(" stir");
  const auto m = constant_model(word[0]);
  const auto prompt = codec::build_prompt(context(), FieldKind::kInstructions, vocab());
  const auto g = generate_field(m, vocab(), context(), FieldKind::kInstructions, SamplingConfig{1, 1000, 0});
  EXPECT_EQ(g.prompt_tokens, prompt.size());
  EXPECT_EQ(g.ids.size(), 128 - prompt.size());
  EXPECT_TRUE(g.truncated);
}
