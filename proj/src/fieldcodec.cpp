#include "recipegpt/fieldcodec.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "recipegpt/error.hpp"
#include "recipegpt/rng.hpp"

namespace recipegpt::codec {
namespace {

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void check_permutation(const std::vector<std::size_t>& order, std::size_t n) {
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != identity_order(n)) throw Error(ErrorCode::kInvalidArgument, "ingredient order is not a permutation");
}

void check_permutation(const FieldOrder& order) {
  FieldOrder sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != kCanonicalOrder) throw Error(ErrorCode::kInvalidArgument, "field order is not a permutation");
}

std::vector<std::pair<FieldKind, std::string>> ordered_fields(const corpus::RecipeRecord& record,
                                                              const FieldOrder& field_order,
                                                              const std::vector<std::size_t>& ingredient_order) {
  check_permutation(field_order);
  check_permutation(ingredient_order, record.ingredients.size());
  std::vector<std::pair<FieldKind, std::string>> out;
  for (auto f : field_order) out.emplace_back(f, field_content(record, f, &ingredient_order));
  return out;
}

}  // namespace

std::string field_content(const corpus::RecipeRecord& record, FieldKind kind,
                          const std::vector<std::size_t>* ingredient_order) {
  std::string out;
  switch (kind) {
    case FieldKind::kTitle:
      return record.title;
    case FieldKind::kIngredients: {
      const auto order = ingredient_order ? *ingredient_order : identity_order(record.ingredients.size());
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) out += '\n';
        out += record.ingredients.at(order[i]).name_phrase;
      }
      return out;
    }
    case FieldKind::kInstructions:
      for (std::size_t i = 0; i < record.steps.size(); ++i) {
        if (i) out += ' ';
        out += record.steps[i];
      }
      return out;
  }
  return out;
}

FieldContext context_from_record(const corpus::RecipeRecord& record, std::initializer_list<FieldKind> kinds) {
  FieldContext ctx;
  for (auto k : kinds) ctx[k] = field_content(record, k);
  return ctx;
}

std::string serialize_multifield(const corpus::RecipeRecord& record, const FieldOrder& field_order,
                                 const std::vector<std::size_t>& ingredient_order) {
  std::string out;
  for (const auto& [kind, content] : ordered_fields(record, field_order, ingredient_order)) {
    if (!out.empty()) out += ' ';
    out += start_surface(kind) + " " + content + " " + end_surface(kind);
  }
  return out;
}

std::vector<TokenId> encode_fields(const BpeVocab& vocab,
                                   const std::vector<std::pair<FieldKind, std::string>>& fields) {
  std::vector<TokenId> ids;
  const auto space = vocab.encode(" ");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) ids.insert(ids.end(), space.begin(), space.end());
    ids.push_back(vocab.start_id(fields[i].first));
    const auto body = vocab.encode(" " + fields[i].second + " ");
    ids.insert(ids.end(), body.begin(), body.end());
    ids.push_back(vocab.end_id(fields[i].first));
  }
  return ids;
}

std::vector<TokenId> encode_multifield(const BpeVocab& vocab, const corpus::RecipeRecord& record,
                                       const FieldOrder& field_order,
                                       const std::vector<std::size_t>& ingredient_order) {
  return encode_fields(vocab, ordered_fields(record, field_order, ingredient_order));
}

namespace {

std::string strip_one_space(std::string s) {
  if (!s.empty() && s.front() == ' ') s.erase(s.begin());
  if (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

FieldContext parse_multifield(const BpeVocab& vocab, std::span<const TokenId> ids) {
  FieldContext out;
  std::optional<FieldKind> open;
  std::size_t body_start = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (auto s = vocab.start_field(ids[i])) {
      open = s;
      body_start = i + 1;
    } else if (auto e = vocab.end_field(ids[i])) {
      if (open && *open == *e) out[*e] = strip_one_space(vocab.decode(ids.subspan(body_start, i - body_start)));
      open.reset();
    }
  }
  return out;
}

FieldContext parse_multifield_text(std::string_view text) {
  FieldContext out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::optional<FieldKind> found;
    std::size_t at = std::string_view::npos;
    for (auto k : kAllFields) {
      const auto p = text.find(start_surface(k), pos);
      if (p < at) {
        at = p;
        found = k;
      }
    }
    if (!found) break;
    const std::string start = start_surface(*found), end = end_surface(*found);
    const auto body = at + start.size();
    const auto close = text.find(end, body);
    if (close == std::string_view::npos) break;
    out[*found] = strip_one_space(std::string(text.substr(body, close - body)));
    pos = close + end.size();
  }
  return out;
}

ParsedRecipe to_parsed_recipe(const FieldContext& fields) {
  ParsedRecipe r;
  if (auto it = fields.find(FieldKind::kTitle); it != fields.end()) r.title = it->second;
  if (auto it = fields.find(FieldKind::kIngredients); it != fields.end()) {
    std::size_t pos = 0;
    const std::string& s = it->second;
    while (pos <= s.size()) {
      auto nl = s.find('\n', pos);
      if (nl == std::string::npos) nl = s.size();
      if (nl > pos) r.ingredient_names.push_back(s.substr(pos, nl - pos));
      pos = nl + 1;
    }
  }
  if (auto it = fields.find(FieldKind::kInstructions); it != fields.end()) r.steps = corpus::split_sentences(it->second);
  return r;
}

FieldOrder field_permutation(std::size_t index) {
  static constexpr std::array<FieldOrder, 6> perms = {{
      {FieldKind::kTitle, FieldKind::kIngredients, FieldKind::kInstructions},
      {FieldKind::kTitle, FieldKind::kInstructions, FieldKind::kIngredients},
      {FieldKind::kIngredients, FieldKind::kTitle, FieldKind::kInstructions},
      {FieldKind::kIngredients, FieldKind::kInstructions, FieldKind::kTitle},
      {FieldKind::kInstructions, FieldKind::kTitle, FieldKind::kIngredients},
      {FieldKind::kInstructions, FieldKind::kIngredients, FieldKind::kTitle},
  }};
  return perms.at(index);
}

EncodedRecipe make_training_example(const corpus::RecipeRecord& record, std::uint64_t seed, const BpeVocab& vocab,
                                    std::size_t max_len, ExampleDraw* draw) {
  if (max_len == 0) throw Error(ErrorCode::kInvalidArgument, "max_len must be positive");
  std::mt19937_64 rng(seed);
  const FieldOrder order = field_permutation(bounded(rng, 6));
  std::vector<std::size_t> ingr = identity_order(record.ingredients.size());
  for (std::size_t i = ingr.size(); i > 1; --i) std::swap(ingr[i - 1], ingr[bounded(rng, i)]);

  std::vector<TokenId> full = encode_multifield(vocab, record, order, ingr);
  std::size_t target_start = 0;
  for (std::size_t i = full.size(); i-- > 0;) {
    if (vocab.start_field(full[i])) {
      target_start = i;
      break;
    }
  }

  EncodedRecipe ex;
  std::size_t window = 0;
  if (full.size() > max_len) {
    window = bounded(rng, full.size() - max_len + 1);
    ex.ids.assign(full.begin() + static_cast<std::ptrdiff_t>(window),
                  full.begin() + static_cast<std::ptrdiff_t>(window + max_len));
    ex.length = max_len;
    ex.target_start = target_start >= window ? target_start - window : 0;
  } else {
    ex.ids = full;
    ex.length = full.size();
    ex.ids.resize(max_len, vocab.pad_id());
    ex.target_start = target_start;
  }
  if (draw) *draw = ExampleDraw{order, ingr, window, full.size()};
  return ex;
}

std::vector<TokenId> build_prompt(const FieldContext& context, FieldKind target, const BpeVocab& vocab) {
  if (context.empty()) throw Error(ErrorCode::kEmptyContext, "prompt needs at least one context field");
  if (context.count(target)) {
    throw Error(ErrorCode::kTargetInContext, "target field '" + std::string(field_name(target)) + "' is also in the context");
  }
  std::vector<std::pair<FieldKind, std::string>> fields;
  for (auto k : kCanonicalOrder) {
    if (auto it = context.find(k); it != context.end()) fields.emplace_back(k, it->second);
  }
  std::vector<TokenId> ids = encode_fields(vocab, fields);
  const auto space = vocab.encode(" ");
  ids.insert(ids.end(), space.begin(), space.end());
  ids.push_back(vocab.start_id(target));
  return ids;
}

}  // namespace recipegpt::codec
