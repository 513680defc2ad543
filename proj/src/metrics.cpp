#include "recipegpt/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace recipegpt::metrics {

Tokens metric_tokens(std::string_view text) { return textnorm::word_tokenize(text).tokens; }

PrfScore ingredient_f1(const RootNounSet& generated, const RootNounSet& gold) {
  if (generated.empty() && gold.empty()) return {1.0, 1.0, 1.0};
  if (generated.empty() || gold.empty()) return {};
  std::size_t hit = 0;
  for (const auto& g : generated) hit += gold.count(g);
  PrfScore s;
  s.precision = static_cast<double>(hit) / static_cast<double>(generated.size());
  s.recall = static_cast<double>(hit) / static_cast<double>(gold.size());
  s.f1 = hit == 0 ? 0.0 : 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

double coherence_jaccard(const RootNounSet& a, const RootNounSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

NGramProfile ngram_profile(std::span<const std::string> tokens, std::size_t n) {
  NGramProfile out;
  if (n == 0 || tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++out[NGram(tokens.begin() + i, tokens.begin() + i + n)];
  return out;
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  if (matches.size() < o.matches.size()) {
    matches.resize(o.matches.size(), 0);
    totals.resize(o.totals.size(), 0);
  }
  for (std::size_t i = 0; i < o.matches.size(); ++i) {
    matches[i] += o.matches[i];
    totals[i] += o.totals[i];
  }
  candidate_length += o.candidate_length;
  reference_length += o.reference_length;
  return *this;
}

BleuStats bleu_stats(std::span<const std::string> candidate, std::span<const std::string> reference,
                     std::size_t max_n) {
  BleuStats s;
  s.candidate_length = candidate.size();
  s.reference_length = reference.size();
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand = ngram_profile(candidate, n);
    const auto ref = ngram_profile(reference, n);
    std::size_t match = 0, total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      if (auto it = ref.find(gram); it != ref.end()) match += std::min(count, it->second);
    }
    s.matches.push_back(match);
    s.totals.push_back(total);
  }
  return s;
}

BleuScore bleu_from_stats(const BleuStats& stats, const BleuOptions& options) {
  BleuScore out;
  if (stats.candidate_length == 0) return out;
  const double c = static_cast<double>(stats.candidate_length), r = static_cast<double>(stats.reference_length);
  out.brevity_penalty = c >= r ? 1.0 : std::exp(1.0 - r / c);
  double log_sum = 0.0;
  bool zero = false;
  const std::size_t orders = std::min(options.max_n, stats.matches.size());
  if (orders == 0) return out;
  for (std::size_t i = 0; i < orders; ++i) {
    double p;
    if (stats.matches[i] > 0) {
      p = static_cast<double>(stats.matches[i]) / static_cast<double>(stats.totals[i]);
    } else if (options.smooth) {
      p = 1.0 / static_cast<double>(stats.totals[i] + 1);
    } else {
      p = 0.0;
      zero = true;
    }
    out.precisions.push_back(p);
    if (p > 0) log_sum += std::log(p);
  }
  out.score = zero ? 0.0 : out.brevity_penalty * std::exp(log_sum / static_cast<double>(orders));
  return out;
}

BleuScore bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
               const BleuOptions& options) {
  return bleu_from_stats(bleu_stats(candidate, reference, options.max_n), options);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PrfScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  PrfScore s;
  if (candidate.empty() || reference.empty()) return s;
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  s.precision = lcs / static_cast<double>(candidate.size());
  s.recall = lcs / static_cast<double>(reference.size());
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace recipegpt::metrics
