#include "recipegpt/evaluation.hpp"

#include "recipegpt/error.hpp"

namespace recipegpt::metrics {

std::string_view to_string(Mode mode) { return mode == Mode::kIngredients ? "ingredients" : "instructions"; }

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "ingredients") return Mode::kIngredients;
  if (name == "instructions") return Mode::kInstructions;
  return std::nullopt;
}

codec::FieldKind target_field(Mode mode) {
  return mode == Mode::kIngredients ? codec::FieldKind::kIngredients : codec::FieldKind::kInstructions;
}

std::vector<codec::FieldKind> context_fields(Mode mode) {
  if (mode == Mode::kIngredients) return {codec::FieldKind::kTitle, codec::FieldKind::kInstructions};
  return {codec::FieldKind::kTitle, codec::FieldKind::kIngredients};
}

nlohmann::json to_json(const EvaluationReport& r) {
  auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return nlohmann::json{
      {"mode", std::string(to_string(r.mode))},
      {"f1", opt(r.f1)},
      {"precision", opt(r.precision)},
      {"recall", opt(r.recall)},
      {"n_generated_ingredients", opt(r.n_generated_ingredients)},
      {"bleu", opt(r.bleu)},
      {"brevity_penalty", opt(r.brevity_penalty)},
      {"rouge_l_precision", opt(r.rouge_l_precision)},
      {"rouge_l_recall", opt(r.rouge_l_recall)},
      {"rouge_l_f", opt(r.rouge_l_f)},
      {"nted", opt(r.nted)},
      {"jaccard_coherence", opt(r.jaccard_coherence)},
  };
}

RootNounSet generated_ingredient_roots(std::string_view generated, std::size_t* parsed_lines) {
  RootNounSet roots;
  std::size_t parsed = 0;
  std::size_t pos = 0;
  while (pos <= generated.size()) {
    auto nl = generated.find('\n', pos);
    if (nl == std::string_view::npos) nl = generated.size();
    const auto line = generated.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      roots.insert(corpus::parse_ingredient_line(line).root_noun);
      ++parsed;
    } catch (const Error&) {
    }
  }
  if (parsed_lines) *parsed_lines = parsed;
  return roots;
}

RootNounSet record_ingredient_roots(const corpus::RecipeRecord& record) {
  RootNounSet roots;
  for (const auto& line : record.ingredients) roots.insert(line.root_noun);
  return roots;
}

EvaluationReport evaluate(std::string_view generated, const corpus::RecipeRecord& reference, Mode mode,
                          const TreeLexicon& lexicon, const textnorm::IngredientDictionary& dict) {
  EvaluationReport r;
  r.mode = mode;
  if (mode == Mode::kIngredients) {
    std::size_t n = 0;
    const auto roots = generated_ingredient_roots(generated, &n);
    const auto s = ingredient_f1(roots, record_ingredient_roots(reference));
    r.precision = s.precision;
    r.recall = s.recall;
    r.f1 = s.f1;
    r.n_generated_ingredients = n;
    return r;
  }

  std::string ref_text;
  for (std::size_t i = 0; i < reference.steps.size(); ++i) {
    if (i) ref_text += ' ';
    ref_text += reference.steps[i];
  }
  const Tokens cand = metric_tokens(generated), ref = metric_tokens(ref_text);
  r.bleu_stats = bleu_stats(cand, ref);
  const auto b = bleu_from_stats(*r.bleu_stats);
  r.bleu = b.score;
  r.brevity_penalty = b.brevity_penalty;
  const auto rl = rouge_l(cand, ref);
  r.rouge_l_precision = rl.precision;
  r.rouge_l_recall = rl.recall;
  r.rouge_l_f = rl.f1;
  const auto gen_steps = corpus::split_sentences(generated);
  r.nted = nted(build_instruction_tree(gen_steps, lexicon), build_instruction_tree(reference.steps, lexicon));
  r.jaccard_coherence =
      coherence_jaccard(textnorm::extract_ingredient_nouns(generated, dict), record_ingredient_roots(reference));
  return r;
}

}  // namespace recipegpt::metrics
