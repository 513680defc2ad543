#include <gtest/gtest.h>

#include <random>

#include "json.hpp"
#include "recipegpt/error.hpp"
#include "recipegpt/textnorm.hpp"
#include "support.hpp"

using namespace recipegpt;
using namespace recipegpt::textnorm;

TEST(Tokenize, OffsetsReconstructSource) {
  const std::string text = "Add 1.5 cups Flour, then 1/2 tsp salt; Sauté the jalapeños!";
  auto ts = word_tokenize(text);
  ASSERT_EQ(ts.tokens.size(), ts.spans.size());
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& sp = ts.spans[i];
    EXPECT_LT(sp.start, sp.end);
    EXPECT_GE(sp.start, prev_end);
    prev_end = sp.end;
    EXPECT_EQ(ascii_lower(text.substr(sp.start, sp.end - sp.start)), ts.tokens[i]);
  }
  EXPECT_EQ(ts.tokens[1], "1.5");
  EXPECT_EQ(ts.tokens[3], "flour");
  EXPECT_EQ(ts.tokens[4], ",");
  EXPECT_EQ(ts.tokens[6], "1/2");
  EXPECT_EQ(ts.tokens[10], "sauté");
  EXPECT_EQ(ts.tokens[12], "jalapeños");
  EXPECT_EQ(ts.tokens.back(), "!");
}

TEST(Tokenize, RandomTextInvariants) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "abcXYZ019 .,/;!-\t\n";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) text += alphabet[rng() % alphabet.size()];
    auto ts = word_tokenize(text);
    ASSERT_EQ(ts.tokens.size(), ts.spans.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (i) EXPECT_LE(ts.spans[i - 1].end, ts.spans[i].start);
      EXPECT_EQ(ascii_lower(text.substr(ts.spans[i].start, ts.spans[i].end - ts.spans[i].start)), ts.tokens[i]);
    }
  }
}

TEST(Lemmatize, Rules) {
  EXPECT_EQ(lemmatize("tomatoes"), "tomato");
  EXPECT_EQ(lemmatize("berries"), "berry");
  EXPECT_EQ(lemmatize("leaves"), "leaf");
  EXPECT_EQ(lemmatize("loaves"), "loaf");
  EXPECT_EQ(lemmatize("olives"), "olive");
  EXPECT_EQ(lemmatize("dishes"), "dish");
  EXPECT_EQ(lemmatize("boxes"), "box");
  EXPECT_EQ(lemmatize("eggs"), "egg");
  EXPECT_EQ(lemmatize("molasses"), "molasses");
  EXPECT_EQ(lemmatize("glass"), "glass");
  EXPECT_EQ(lemmatize("hummus"), "hummus");
  EXPECT_EQ(lemmatize("gas"), "gas");
  EXPECT_EQ(lemmatize("1/2"), "1/2");
}

TEST(Lemmatize, IdempotentOnCorpus) {
  for (const auto& r : testing_support::bundled_corpus().records) {
    std::string all = r.title;
    for (const auto& s : r.steps) all += " " + s;
    for (const auto& i : r.ingredients) all += " " + i.original;
    for (const auto& t : word_tokenize(all).tokens) {
      const auto once = lemmatize(t);
      EXPECT_EQ(lemmatize(once), once) << t;
    }
  }
}

TEST(Dictionary, EntriesAreLemmas) {
  const auto& d = bundled_dictionary();
  EXPECT_GT(d.size(), 400u);
  for (const auto& n : d.nouns()) EXPECT_EQ(lemmatize(n), n);
  try {
    IngredientDictionary::from_words({"eggs"}, "test");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidDictionary);
  }
  try {
    IngredientDictionary::from_words({}, "test");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidDictionary);
  }
}

TEST(RootNoun, HeadWord) {
  EXPECT_EQ(root_noun_of_phrase("shredded provolone cheese"), "cheese");
  EXPECT_EQ(root_noun_of_phrase("fresh basil leaves"), "basil");
  EXPECT_EQ(root_noun_of_phrase("eggs"), "egg");
  EXPECT_EQ(root_noun_of_phrase("salt to taste"), "salt");
}

TEST(Extract, SubsetOfDictionary) {
  const auto& d = bundled_dictionary();
  std::mt19937_64 rng(1);
  std::vector<std::string> words(d.nouns().begin(), d.nouns().end());
  for (const char* w : {"stir", "bake", "the", "quickly", "oven", "tomatoes", "eggs"}) words.push_back(w);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (int i = 0; i < 12; ++i) text += words[rng() % words.size()] + " ";
    for (const auto& n : extract_ingredient_nouns(text, d)) EXPECT_TRUE(d.contains(n)) << n;
  }
  EXPECT_EQ(extract_ingredient_nouns("Whisk the eggs with tomatoes.", d), (RootNounSet{"egg", "tomato"}));
}

namespace {
std::vector<IngredientLine> lines(std::initializer_list<const char*> texts) {
  std::vector<IngredientLine> out;
  for (const char* t : texts) out.push_back(corpus::parse_ingredient_line(t));
  return out;
}

void check_highlights(const std::vector<IngredientLine>& ingr, const std::string& generated) {
  const auto spans = overlap_highlights(ingr, generated, bundled_dictionary());
  const std::string itext = ingredient_text(ingr);
  RootNounSet in_ingr, in_gen;
  for (const auto& s : spans) {
    const std::string& src = s.field == HighlightField::kIngredients ? itext : generated;
    ASSERT_LE(s.end, src.size());
    EXPECT_EQ(lemmatize(ascii_lower(src.substr(s.start, s.end - s.start))), s.root_noun);
    (s.field == HighlightField::kIngredients ? in_ingr : in_gen).insert(s.root_noun);
  }
  EXPECT_EQ(in_ingr, in_gen);
}
}  // namespace

TEST(Highlights, VodkaExample) {
  auto ingr = lines({"2 oz vodka", "4 oz orange juice"});
  const std::string gen = "Combine vodka and orange juice.";
  auto spans = overlap_highlights(ingr, gen, bundled_dictionary());
  RootNounSet roots;
  for (const auto& s : spans) roots.insert(s.root_noun);
  EXPECT_EQ(roots, (RootNounSet{"juice", "vodka"}));
  std::size_t gen_spans = 0;
  for (const auto& s : spans) gen_spans += s.field == HighlightField::kGeneratedText;
  EXPECT_EQ(gen_spans, 2u);
  check_highlights(ingr, gen);
}

TEST(Highlights, VariantPhraseStillMatches) {
  auto ingr = lines({"1 cup shredded provolone cheese", "2 slices bread"});
  const std::string gen = "Toast the bread, then top with cheese and more cheese.";
  auto spans = overlap_highlights(ingr, gen, bundled_dictionary());
  std::size_t cheese_in_gen = 0;
  for (const auto& s : spans) cheese_in_gen += s.root_noun == "cheese" && s.field == HighlightField::kGeneratedText;
  EXPECT_EQ(cheese_in_gen, 2u);
  check_highlights(ingr, gen);
}

TEST(Highlights, Disjoint) {
  EXPECT_TRUE(overlap_highlights(lines({"1 cup rice", "2 cups water"}), "Fry the bacon.", bundled_dictionary()).empty());
}

TEST(Highlights, CorpusProperty) {
  const auto& recs = testing_support::bundled_corpus().records;
  for (std::size_t i = 0; i + 1 < recs.size(); i += 7) {
    std::string gen;
    for (const auto& s : recs[i + 1].steps) gen += s + " ";
    check_highlights(recs[i].ingredients, gen);
  }
}

TEST(Utf8, KnownSequences) {
  const std::string bad = "\xEF\xBF\xBD";
  EXPECT_EQ(sanitize_utf8("jalape\xC3\xB1o"), "jalape\xC3\xB1o");
  EXPECT_EQ(sanitize_utf8("a\xC3"), "a" + bad);
  EXPECT_EQ(sanitize_utf8("\xC0\xAF"), bad + bad);          // overlong
  EXPECT_EQ(sanitize_utf8("\xED\xA0\x80"), bad + bad + bad);  // surrogate
  EXPECT_EQ(sanitize_utf8("\xF0\x9F\x8D\x85!"), "\xF0\x9F\x8D\x85!");
  EXPECT_EQ(sanitize_utf8("\xF4\x90\x80\x80"), bad + bad + bad + bad);
}

TEST(Utf8, RandomBytesBecomeValid) {
  std::mt19937_64 rng(9);
  for (int iter = 0; iter < 3000; ++iter) {
    std::string s;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(rng() % 4 == 0 ? 'a' : 0x80 + rng() % 0x80));
    if (rng() % 3 == 0) s += "\xE2\x82\xAC";
    const std::string out = sanitize_utf8(s);
    EXPECT_NO_THROW((void)nlohmann::json(out).dump()) << iter;
    EXPECT_EQ(sanitize_utf8(out), out);
    // already-valid input passes through untouched
    bool valid = true;
    try {
      (void)nlohmann::json(s).dump();
    } catch (const nlohmann::json::exception&) {
      valid = false;
    }
    if (valid) EXPECT_EQ(out, s);
  }
}
