#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recipegpt/corpus.hpp"
#include "recipegpt/fieldcodec.hpp"

namespace recipegpt::retrieval {

using codec::FieldKind;

/// word_tokenize + lemmatize, punctuation dropped.
std::vector<std::string> index_terms(std::string_view text);

struct Posting {
  std::uint32_t doc = 0;
  std::uint32_t tf = 0;
  friend bool operator==(const Posting&, const Posting&) = default;
};

struct FieldIndex {
  std::map<std::string, std::vector<Posting>> postings;  // sorted by doc
  std::vector<std::uint32_t> doc_length;
  double average_length = 0.0;
  friend bool operator==(const FieldIndex&, const FieldIndex&) = default;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
  std::array<double, 3> field_weights = {2.0, 1.5, 1.0};  // title, ingredients, instructions
  friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct Query {
  std::optional<std::string> title;
  std::optional<std::string> ingredients;
  std::optional<std::string> instructions;

  const std::optional<std::string>& field(FieldKind kind) const;
};

/// A recipe's own title and ingredient name phrases.
Query self_query(const corpus::RecipeRecord& record);

struct ScoredHit {
  std::string recipe_id;
  double score = 0.0;
  std::array<double, 3> field_scores{};  // unweighted BM25 per field
};

class InvertedIndex {
 public:
  InvertedIndex() = default;

  /// Throws kDuplicateId.
  static InvertedIndex build(std::span<const corpus::RecipeRecord> records, const Bm25Params& params = {});

  /// Per-field BM25 with Lucene idf, weighted sum over fields. Each query field
  /// is matched against the same document field. Only hits with a positive
  /// score are returned, descending, ties by ascending id. Throws kEmptyQuery
  /// when no query field has an indexable term.
  std::vector<ScoredHit> search(const Query& query, std::size_t top_n) const;

  std::size_t document_count() const { return doc_ids_.size(); }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const FieldIndex& field(FieldKind kind) const { return fields_[static_cast<std::size_t>(kind)]; }
  const Bm25Params& params() const { return params_; }

  /// JSON cache tagged with the corpus hash it was built from.
  void save(const std::string& path, const std::string& corpus_hash) const;
  /// nullopt when the file is missing, unreadable or built from another corpus.
  static std::optional<InvertedIndex> load(const std::string& path, const std::string& corpus_hash);

  friend bool operator==(const InvertedIndex&, const InvertedIndex&) = default;

 private:
  Bm25Params params_;
  std::vector<std::string> doc_ids_;
  std::array<FieldIndex, 3> fields_;
};

}  // namespace recipegpt::retrieval
