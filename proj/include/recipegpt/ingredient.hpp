#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace recipegpt {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;

  friend Rational operator+(Rational a, Rational b) { return make(a.num * b.den + b.num * a.den, a.den * b.den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

// One parsed ingredient line. `name_phrase` has quantities, units and
// comments removed; `root_noun` is the lemmatized head word of the phrase.
struct IngredientLine {
  std::string original;
  std::string name_phrase;
  std::optional<Rational> quantity;
  std::optional<std::string> unit;
  std::string root_noun;

  friend bool operator==(const IngredientLine&, const IngredientLine&) = default;
};

}  // namespace recipegpt
