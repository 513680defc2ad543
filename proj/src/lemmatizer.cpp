#include <algorithm>

#include "recipegpt/textnorm.hpp"

namespace recipegpt::textnorm {
namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool all_alpha(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) {
    return (c >= 'a' && c <= 'z') || c >= 0x80 || c == '-';
  });
}

bool guard_holds(Lemmatizer::Guard guard, std::string_view word, std::string_view stem) {
  switch (guard) {
    case Lemmatizer::Guard::kNone:
      return true;
    case Lemmatizer::Guard::kLongWord:
      return word.size() > 4;
    case Lemmatizer::Guard::kLeafLike:
      return word.size() > 4 && (ends_with(stem, "l") || ends_with(stem, "a"));
    case Lemmatizer::Guard::kSibilantOrO:
      return ends_with(stem, "ss") || ends_with(stem, "zz") || ends_with(stem, "x") ||
             ends_with(stem, "ch") || ends_with(stem, "sh") || ends_with(stem, "o");
    case Lemmatizer::Guard::kPluralS:
      return word.size() > 3 && !ends_with(word, "ss") && !ends_with(word, "us") &&
             !ends_with(word, "is");
  }
  return false;
}

std::unordered_map<std::string, std::string> builtin_exceptions() {
  return {
      {"molasses", "molasses"}, {"hummus", "hummus"},     {"couscous", "couscous"},
      {"asparagus", "asparagus"}, {"swiss", "swiss"},     {"grits", "grits"},
      {"cookies", "cookie"},     {"brownies", "brownie"}, {"smoothies", "smoothie"},
      {"veggies", "veggie"},     {"calories", "calorie"}, {"goodies", "goodie"},
      {"knives", "knife"},       {"wives", "wife"},       {"lives", "life"},
      {"olives", "olive"},       {"cloves", "clove"},     {"chives", "chive"},
      {"gloves", "glove"},       {"stoves", "stove"},     {"leaves", "leaf"},
      {"potatoes", "potato"},    {"tomatoes", "tomato"},  {"mice", "mouse"},
      {"geese", "goose"},        {"teeth", "tooth"},      {"feet", "foot"},
      {"children", "child"},     {"men", "man"},          {"women", "woman"},
      {"dice", "dice"},          {"series", "series"},    {"species", "species"},
      {"anise", "anise"},        {"bass", "bass"},        {"citrus", "citrus"},
  };
}

std::vector<Lemmatizer::SuffixRule> builtin_rules() {
  using G = Lemmatizer::Guard;
  return {
      {"ies", "y", G::kLongWord},
      {"ves", "f", G::kLeafLike},
      {"es", "", G::kSibilantOrO},
      {"s", "", G::kPluralS},
  };
}

}  // namespace

Lemmatizer::Lemmatizer() : Lemmatizer(builtin_exceptions(), builtin_rules()) {}

Lemmatizer::Lemmatizer(std::unordered_map<std::string, std::string> exceptions,
                       std::vector<SuffixRule> rules)
    : exceptions_(std::move(exceptions)), rules_(std::move(rules)) {}

std::string Lemmatizer::lemmatize(std::string_view word) const {
  if (auto it = exceptions_.find(std::string(word)); it != exceptions_.end()) return it->second;
  if (!all_alpha(word)) return std::string(word);
  for (const auto& rule : rules_) {
    if (!ends_with(word, rule.suffix)) continue;
    std::string_view stem = word.substr(0, word.size() - rule.suffix.size());
    if (stem.empty() || !guard_holds(rule.guard, word, stem)) continue;
    return std::string(stem) + rule.replacement;
  }
  return std::string(word);
}

const Lemmatizer& default_lemmatizer() {
  static const Lemmatizer instance;
  return instance;
}

std::string lemmatize(std::string_view word) { return default_lemmatizer().lemmatize(word); }

}  // namespace recipegpt::textnorm
