#include "recipegpt/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "recipegpt/error.hpp"
#include "recipegpt/textnorm.hpp"

namespace recipegpt::retrieval {

std::vector<std::string> index_terms(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& tok : textnorm::word_tokenize(text).tokens) {
    if (textnorm::is_word_token(tok)) out.push_back(textnorm::lemmatize(tok));
  }
  return out;
}

const std::optional<std::string>& Query::field(FieldKind kind) const {
  switch (kind) {
    case FieldKind::kTitle: return title;
    case FieldKind::kIngredients: return ingredients;
    case FieldKind::kInstructions: return instructions;
  }
  return title;
}

Query self_query(const corpus::RecipeRecord& record) {
  Query q;
  q.title = record.title;
  q.ingredients = codec::field_content(record, FieldKind::kIngredients);
  return q;
}

InvertedIndex InvertedIndex::build(std::span<const corpus::RecipeRecord> records, const Bm25Params& params) {
  InvertedIndex idx;
  idx.params_ = params;
  std::vector<const corpus::RecipeRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->id == sorted[i - 1]->id) throw Error(ErrorCode::kDuplicateId, "duplicate recipe id " + sorted[i]->id);
  }
  for (auto kind : codec::kAllFields) {
    FieldIndex& f = idx.fields_[static_cast<std::size_t>(kind)];
    double total = 0;
    for (std::uint32_t d = 0; d < sorted.size(); ++d) {
      const auto terms = index_terms(codec::field_content(*sorted[d], kind));
      std::map<std::string, std::uint32_t> tf;
      for (const auto& t : terms) ++tf[t];
      for (const auto& [t, n] : tf) f.postings[t].push_back({d, n});
      f.doc_length.push_back(static_cast<std::uint32_t>(terms.size()));
      total += static_cast<double>(terms.size());
    }
    f.average_length = sorted.empty() ? 0.0 : total / static_cast<double>(sorted.size());
  }
  for (auto* r : sorted) idx.doc_ids_.push_back(r->id);
  return idx;
}

std::vector<ScoredHit> InvertedIndex::search(const Query& query, std::size_t top_n) const {
  std::array<std::set<std::string>, 3> terms;
  bool any = false;
  for (auto kind : codec::kAllFields) {
    if (const auto& text = query.field(kind)) {
      for (auto& t : index_terms(*text)) terms[static_cast<std::size_t>(kind)].insert(std::move(t));
    }
    any = any || !terms[static_cast<std::size_t>(kind)].empty();
  }
  if (!any) throw Error(ErrorCode::kEmptyQuery, "query has no searchable terms");

  const double n_docs = static_cast<double>(doc_ids_.size());
  std::vector<std::array<double, 3>> scores(doc_ids_.size(), {0.0, 0.0, 0.0});
  std::vector<bool> touched(doc_ids_.size(), false);
  for (std::size_t fi = 0; fi < 3; ++fi) {
    const FieldIndex& f = fields_[fi];
    for (const auto& term : terms[fi]) {
      auto it = f.postings.find(term);
      if (it == f.postings.end()) continue;
      const double df = static_cast<double>(it->second.size());
      const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
      for (const auto& p : it->second) {
        const double tf = p.tf;
        const double norm = f.average_length > 0 ? f.doc_length[p.doc] / f.average_length : 0.0;
        scores[p.doc][fi] += idf * tf * (params_.k1 + 1) / (tf + params_.k1 * (1 - params_.b + params_.b * norm));
        touched[p.doc] = true;
      }
    }
  }

  std::vector<ScoredHit> hits;
  for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
    if (!touched[d]) continue;
    ScoredHit h{doc_ids_[d], 0.0, scores[d]};
    for (std::size_t fi = 0; fi < 3; ++fi) h.score += params_.field_weights[fi] * scores[d][fi];
    if (h.score > 0) hits.push_back(std::move(h));
  }
  // doc order is id order, so a stable sort keeps ties by ascending id
  std::stable_sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) { return a.score > b.score; });
  if (hits.size() > top_n) hits.resize(top_n);
  return hits;
}

void InvertedIndex::save(const std::string& path, const std::string& corpus_hash) const {
  nlohmann::json j;
  j["format"] = "recipegpt-index/1";
  j["corpus_hash"] = corpus_hash;
  j["params"] = {{"k1", params_.k1}, {"b", params_.b}, {"field_weights", params_.field_weights}};
  j["docs"] = doc_ids_;
  for (auto kind : codec::kAllFields) {
    const FieldIndex& f = field(kind);
    nlohmann::json fj;
    fj["doc_length"] = f.doc_length;
    fj["average_length"] = f.average_length;
    nlohmann::json postings = nlohmann::json::object();
    for (const auto& [term, list] : f.postings) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& p : list) arr.push_back({p.doc, p.tf});
      postings[term] = std::move(arr);
    }
    fj["postings"] = std::move(postings);
    j["fields"][std::string(codec::field_name(kind))] = std::move(fj);
  }
  write_file_atomic(path, j.dump());
}

std::optional<InvertedIndex> InvertedIndex::load(const std::string& path, const std::string& corpus_hash) {
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    if (j.at("format") != "recipegpt-index/1" || j.at("corpus_hash") != corpus_hash) return std::nullopt;
    InvertedIndex idx;
    idx.params_.k1 = j.at("params").at("k1");
    idx.params_.b = j.at("params").at("b");
    idx.params_.field_weights = j.at("params").at("field_weights").get<std::array<double, 3>>();
    idx.doc_ids_ = j.at("docs").get<std::vector<std::string>>();
    for (auto kind : codec::kAllFields) {
      const auto& fj = j.at("fields").at(std::string(codec::field_name(kind)));
      FieldIndex& f = idx.fields_[static_cast<std::size_t>(kind)];
      f.doc_length = fj.at("doc_length").get<std::vector<std::uint32_t>>();
      f.average_length = fj.at("average_length");
      for (const auto& [term, arr] : fj.at("postings").items()) {
        auto& list = f.postings[term];
        for (const auto& p : arr) list.push_back({p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()});
      }
      if (f.doc_length.size() != idx.doc_ids_.size()) return std::nullopt;
    }
    return idx;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace recipegpt::retrieval
