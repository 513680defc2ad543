#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "recipegpt/textnorm.hpp"

namespace recipegpt::metrics {

using textnorm::RootNounSet;
using Tokens = std::vector<std::string>;

/// Lowercased word and punctuation tokens, the unit for BLEU and ROUGE-L.
Tokens metric_tokens(std::string_view text);

// ---- set metrics

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Both empty gives (1,1,1); exactly one empty gives (0,0,0).
PrfScore ingredient_f1(const RootNounSet& generated, const RootNounSet& gold);

/// |a ∩ b| / |a ∪ b|; 1 when both are empty.
double coherence_jaccard(const RootNounSet& a, const RootNounSet& b);

// ---- BLEU

using NGram = std::vector<std::string>;
using NGramProfile = std::map<NGram, std::size_t>;

NGramProfile ngram_profile(std::span<const std::string> tokens, std::size_t n);

struct BleuOptions {
  std::size_t max_n = 4;
  /// Orders with no clipped match use (0 + 1) / (total + 1) instead of zeroing the score.
  bool smooth = true;
};

/// Sufficient statistics; summing them over samples gives corpus-level BLEU.
struct BleuStats {
  std::vector<std::size_t> matches;  // clipped, per order 1..max_n
  std::vector<std::size_t> totals;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  BleuStats& operator+=(const BleuStats& other);
};

struct BleuScore {
  double score = 0.0;
  double brevity_penalty = 0.0;
  std::vector<double> precisions;
};

BleuStats bleu_stats(std::span<const std::string> candidate, std::span<const std::string> reference,
                     std::size_t max_n = 4);
/// BP = min(1, exp(1 - r/c)); an empty candidate has BP 0 and score 0.
BleuScore bleu_from_stats(const BleuStats& stats, const BleuOptions& options = {});
BleuScore bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
               const BleuOptions& options = {});

// ---- ROUGE-L

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);
/// P = LCS/|cand|, R = LCS/|ref|, F = 2PR/(P+R), zero when undefined.
PrfScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);

// ---- trees

struct Tree {
  std::string label;
  std::vector<Tree> children;

  std::size_t node_count() const;
  /// "root(mix(egg,flour),bake)"
  std::string to_string() const;
  /// Inverse of to_string. Labels may not contain '(', ')' or ','.
  static Tree parse(std::string_view text);

  friend bool operator==(const Tree&, const Tree&) = default;
};

inline constexpr std::string_view kTreeRootLabel = "root";

struct TreeLexicon {
  std::unordered_set<std::string> verbs;
  std::unordered_set<std::string> nouns;  // ingredient dictionary plus tools

  /// data/cooking_verbs.txt, data/ingredient_nouns.txt, data/cooking_tools.txt
  static const TreeLexicon& bundled();
};

/// Verbs become children of a synthetic root in order of appearance; each
/// dictionary or tool noun hangs off the most recent verb of its step, or off
/// the root when the step has no verb yet. A lemma listed both as verb and
/// noun ("cream", "grill") counts as a verb only at the start of a clause.
Tree build_instruction_tree(std::span<const std::string> steps, const TreeLexicon& lexicon = TreeLexicon::bundled());

struct EditCost {
  double insert = 1.0;
  double remove = 1.0;
  double replace = 1.0;
};

/// Postorder flattening used by the distance computation; size 0 is the empty tree.
struct PostorderTree {
  std::vector<std::string> labels;       // postorder
  std::vector<std::size_t> leftmost;     // leftmost leaf descendant, postorder index
  std::vector<std::size_t> keyroots;     // ascending

  static PostorderTree from(const Tree& tree);
  std::size_t size() const { return labels.size(); }
};

/// Exact ordered tree edit distance (keyroot decomposition).
double zhang_shasha(const PostorderTree& a, const PostorderTree& b, const EditCost& cost = {});
double zhang_shasha(const Tree& a, const Tree& b, const EditCost& cost = {});

/// Distance over the summed node counts. Throws kBothTreesEmpty.
double nted(const PostorderTree& a, const PostorderTree& b, const EditCost& cost = {});
double nted(const Tree& a, const Tree& b, const EditCost& cost = {});

}  // namespace recipegpt::metrics
