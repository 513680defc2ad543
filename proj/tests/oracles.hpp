#pragma once

// Independent reference implementations used only by tests. They share no
// code with the library and favour obviousness over speed.

#include <cstdint>
#include <string>
#include <vector>

#include "recipegpt/metrics.hpp"

namespace oracle {

// ---- BLEU / LCS

/// Clipped n-gram precision by direct counting with nested scans.
struct BruteBleu {
  double score = 0.0;
  double brevity_penalty = 0.0;
};
BruteBleu bleu(const std::vector<std::string>& cand, const std::vector<std::string>& ref, int max_n, bool smooth);

/// Top-down memoized LCS.
std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b);
double rouge_l_f(const std::vector<std::string>& cand, const std::vector<std::string>& ref);

// ---- ordered labeled forests

/// Preorder (label, depth) sequence; depth 0 nodes are roots.
struct Forest {
  std::string labels;
  std::vector<int> depth;
  std::size_t size() const { return labels.size(); }
  bool is_tree() const;
  std::string key() const;
};

recipegpt::metrics::Tree to_tree(const Forest& f);

/// Every ordered forest with at most `max_nodes` nodes over `alphabet`, with
/// unit-cost edit edges (delete, insert, relabel) between them.
class ForestGraph {
 public:
  ForestGraph(int max_nodes, const std::string& alphabet);

  std::size_t state_count() const { return states_.size(); }
  const Forest& state(std::size_t i) const { return states_[i]; }
  const std::vector<std::size_t>& trees() const { return trees_; }

  /// Minimal number of unit edits from `source` to every state.
  std::vector<std::uint8_t> distances_from(std::size_t source) const;

 private:
  std::vector<Forest> states_;
  std::vector<std::size_t> trees_;
  std::vector<std::uint32_t> offsets_, edges_;
};

}  // namespace oracle
