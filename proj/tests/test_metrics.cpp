#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "oracles.hpp"
#include "recipegpt/error.hpp"
#include "recipegpt/metrics.hpp"

using namespace recipegpt;
using namespace recipegpt::metrics;

namespace {

Tokens toks(std::initializer_list<const char*> w) { return Tokens(w.begin(), w.end()); }

Tokens random_tokens(std::mt19937_64& rng, std::size_t lo, std::size_t hi, int alphabet) {
  Tokens t(lo + rng() % (hi - lo + 1));
  for (auto& w : t) w = std::string(1, static_cast<char>('a' + rng() % static_cast<std::uint64_t>(alphabet)));
  return t;
}

Tree random_tree(std::mt19937_64& rng, std::size_t max_nodes, int labels) {
  // grow by attaching each new node under a random existing one, at a random child position
  std::vector<Tree*> nodes;
  Tree root{std::string(1, static_cast<char>('a' + rng() % labels)), {}};
  const std::size_t n = 1 + rng() % max_nodes;
  std::vector<std::vector<std::size_t>> path_of{{}};
  for (std::size_t i = 1; i < n; ++i) {
    const auto& parent_path = path_of[rng() % path_of.size()];
    Tree* p = &root;
    for (auto c : parent_path) p = &p->children[c];
    const std::size_t pos = rng() % (p->children.size() + 1);
    p->children.insert(p->children.begin() + static_cast<std::ptrdiff_t>(pos),
                       Tree{std::string(1, static_cast<char>('a' + rng() % labels)), {}});
    // paths shift when inserting before siblings; recompute all paths
    path_of.clear();
    std::vector<std::size_t> cur;
    std::function<void(const Tree&)> walk = [&](const Tree& t) {
      path_of.push_back(cur);
      for (std::size_t c = 0; c < t.children.size(); ++c) {
        cur.push_back(c);
        walk(t.children[c]);
        cur.pop_back();
      }
    };
    walk(root);
  }
  return root;
}

}  // namespace

TEST(IngredientF1, Examples) {
  auto s = ingredient_f1({"cheese", "egg", "flour"}, {"cheese", "flour", "butter"});
  EXPECT_NEAR(s.precision, 2.0 / 3, 1e-12);
  EXPECT_NEAR(s.recall, 2.0 / 3, 1e-12);
  EXPECT_NEAR(s.f1, 2.0 / 3, 1e-12);
  s = ingredient_f1({"a", "b"}, {"a", "b"});
  EXPECT_EQ(s.f1, 1.0);
  s = ingredient_f1({}, {"a"});
  EXPECT_EQ(s.f1, 0.0);
  EXPECT_EQ(s.precision, 0.0);
  s = ingredient_f1({}, {});
  EXPECT_EQ(s.f1, 1.0);
}

TEST(IngredientF1, HarmonicMeanLaw) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 300; ++i) {
    RootNounSet a, b;
    for (int j = 0; j < 6; ++j) {
      if (rng() % 2) a.insert(std::string(1, 'a' + rng() % 8));
      if (rng() % 2) b.insert(std::string(1, 'a' + rng() % 8));
    }
    const auto s = ingredient_f1(a, b);
    EXPECT_GE(s.f1, 0.0);
    EXPECT_LE(s.f1, 1.0);
    if (s.precision + s.recall > 0) EXPECT_NEAR(s.f1, 2 * s.precision * s.recall / (s.precision + s.recall), 1e-12);
    const double j = coherence_jaccard(a, b);
    EXPECT_GE(j, 0.0);
    EXPECT_LE(j, 1.0);
    EXPECT_EQ(j, coherence_jaccard(b, a));
  }
}

TEST(Jaccard, Examples) {
  EXPECT_NEAR(coherence_jaccard({"salt", "pepper"}, {"salt", "oil"}), 1.0 / 3, 1e-12);
  EXPECT_EQ(coherence_jaccard({"a"}, {"a"}), 1.0);
  EXPECT_EQ(coherence_jaccard({}, {}), 1.0);
}

TEST(NGramProfile, Mass) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_tokens(rng, 0, 12, 3);
    for (std::size_t n = 1; n <= 4; ++n) {
      std::size_t mass = 0;
      for (const auto& [g, c] : ngram_profile(t, n)) {
        EXPECT_GE(c, 1u);
        EXPECT_EQ(g.size(), n);
        mass += c;
      }
      EXPECT_EQ(mass, t.size() >= n ? t.size() - n + 1 : 0);
    }
  }
}

TEST(Bleu, Examples) {
  const auto x = toks({"mix", "the", "flour", "and", "eggs"});
  auto s = bleu(x, x);
  EXPECT_NEAR(s.score, 1.0, 1e-12);
  EXPECT_EQ(s.brevity_penalty, 1.0);

  s = bleu(toks({"the", "the", "the", "the"}), toks({"the", "cat", "sat"}));
  EXPECT_NEAR(s.precisions[0], 0.25, 1e-12);
  const auto st = bleu_stats(toks({"the", "the", "the", "the"}), toks({"the", "cat", "sat"}));
  EXPECT_EQ(st.matches[0], 1u);
  EXPECT_EQ(st.totals[0], 4u);

  s = bleu(toks({"a", "b", "c"}), toks({"a", "b", "c", "d", "e", "f"}));
  EXPECT_NEAR(s.brevity_penalty, std::exp(-1.0), 1e-12);
  EXPECT_NEAR(s.brevity_penalty, 0.3679, 1e-4);

  s = bleu(Tokens{}, toks({"a"}));
  EXPECT_EQ(s.score, 0.0);
  EXPECT_EQ(s.brevity_penalty, 0.0);
}

TEST(Bleu, UnsmoothedZero) {
  BleuOptions o;
  o.smooth = false;
  EXPECT_EQ(bleu(toks({"a", "b"}), toks({"a", "b"}), o).score, 0.0);  // no 3-grams
  o.max_n = 2;
  EXPECT_NEAR(bleu(toks({"a", "b"}), toks({"a", "b"}), o).score, 1.0, 1e-12);
}

TEST(Bleu, CorpusStatsAdd) {
  auto a = bleu_stats(toks({"a", "b", "c"}), toks({"a", "b"}));
  const auto b = bleu_stats(toks({"x", "y"}), toks({"x", "z", "y"}));
  a += b;
  EXPECT_EQ(a.candidate_length, 5u);
  EXPECT_EQ(a.reference_length, 5u);
  EXPECT_EQ(a.matches[0], 4u);
  EXPECT_EQ(a.totals[0], 5u);
  EXPECT_EQ(a.matches[1], 1u);
}

TEST(Bleu, MatchesBruteForceOracle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const auto c = random_tokens(rng, 1, 40, 4), r = random_tokens(rng, 1, 40, 4);
    for (bool smooth : {true, false}) {
      BleuOptions o;
      o.smooth = smooth;
      const auto got = bleu(c, r, o);
      const auto want = oracle::bleu(c, r, 4, smooth);
      EXPECT_NEAR(got.score, want.score, 1e-9);
      EXPECT_NEAR(got.brevity_penalty, want.brevity_penalty, 1e-9);
      EXPECT_GE(got.score, 0.0);
      EXPECT_LE(got.score, 1.0);
    }
  }
}

TEST(RougeL, Examples) {
  auto s = rouge_l(toks({"a", "b", "c", "d"}), toks({"a", "c", "d"}));
  EXPECT_NEAR(s.precision, 0.75, 1e-12);
  EXPECT_NEAR(s.recall, 1.0, 1e-12);
  EXPECT_NEAR(s.f1, 6.0 / 7, 1e-12);
  s = rouge_l(toks({"x", "y"}), toks({"x", "y"}));
  EXPECT_EQ(s.f1, 1.0);
  s = rouge_l(toks({"x"}), toks({"y"}));
  EXPECT_EQ(s.f1, 0.0);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(rouge_l(Tokens{}, toks({"y"})).f1, 0.0);
}

TEST(RougeL, MatchesLcsOracle) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const auto c = random_tokens(rng, 0, 40, 5), r = random_tokens(rng, 0, 40, 5);
    EXPECT_EQ(lcs_length(c, r), oracle::lcs(c, r));
    EXPECT_NEAR(rouge_l(c, r).f1, oracle::rouge_l_f(c, r), 1e-9);
    EXPECT_EQ(lcs_length(c, r), lcs_length(r, c));
  }
}

TEST(Tree, StringRoundTrip) {
  const auto t = Tree::parse("root(mix(egg,flour),bake)");
  EXPECT_EQ(t.node_count(), 5u);
  EXPECT_EQ(t.to_string(), "root(mix(egg,flour),bake)");
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto r = random_tree(rng, 8, 3);
    EXPECT_EQ(Tree::parse(r.to_string()), r);
  }
  EXPECT_THROW(Tree::parse("root(a"), Error);
}

TEST(InstructionTree, Examples) {
  const std::vector<std::string> steps{"Mix egg and flour.", "Bake."};
  EXPECT_EQ(build_instruction_tree(steps).to_string(), "root(mix(egg,flour),bake)");
  EXPECT_EQ(build_instruction_tree(std::vector<std::string>{}).node_count(), 1u);
  const auto serve = build_instruction_tree(std::vector<std::string>{"Serve."});
  EXPECT_EQ(serve.to_string(), "root(serve)");
  EXPECT_EQ(serve.node_count(), 2u);
}

TEST(InstructionTree, Attachment) {
  // verbless step nouns hang off the root; verb context resets per step
  EXPECT_EQ(build_instruction_tree(std::vector<std::string>{"Stir the sugar.", "Salt and pepper."}).to_string(),
            "root(stir(sugar),salt,pepper)");
  // "cream" opening a clause is the verb, later in the clause it is the noun
  EXPECT_EQ(build_instruction_tree(std::vector<std::string>{"Cream the butter, then whip the cream."}).to_string(),
            "root(cream(butter),whip(cream))");
}

TEST(InstructionTree, NodeCountLaw) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_tree(rng, 10, 4);
    std::function<std::size_t(const Tree&)> count = [&](const Tree& n) {
      std::size_t c = 1;
      for (const auto& k : n.children) c += count(k);
      return c;
    };
    EXPECT_EQ(t.node_count(), count(t));
  }
}

TEST(ZhangShasha, Examples) {
  const auto a = Tree::parse("root(mix(egg,flour))");
  EXPECT_EQ(zhang_shasha(a, a), 0.0);
  EXPECT_EQ(zhang_shasha(Tree::parse("mix"), Tree::parse("stir")), 1.0);
  const auto b = Tree::parse("root(mix(flour))");
  EXPECT_EQ(zhang_shasha(a, b), 1.0);
  EXPECT_NEAR(nted(a, b), 1.0 / 7, 1e-12);
  EXPECT_EQ(nted(a, a), 0.0);
  // two single-node trees under synthetic roots: one relabel over four nodes
  EXPECT_NEAR(nted(Tree::parse("root(mix)"), Tree::parse("root(bake)")), 0.25, 1e-12);
  // when relabeling costs as much as delete plus insert the distance is 2
  EXPECT_NEAR(nted(Tree::parse("root(mix)"), Tree::parse("root(bake)"), EditCost{1, 1, 2}), 0.5, 1e-12);
}

TEST(ZhangShasha, ClassicExample) {
  // the textbook pair: f(d(a,c(b)),e) vs f(c(d(a,b)),e) has distance 2
  EXPECT_EQ(zhang_shasha(Tree::parse("f(d(a,c(b)),e)"), Tree::parse("f(c(d(a,b)),e)")), 2.0);
}

TEST(ZhangShasha, EmptyTrees) {
  const PostorderTree empty;
  const auto t = PostorderTree::from(Tree::parse("a(b,c)"));
  EXPECT_EQ(zhang_shasha(empty, t), 3.0);
  EXPECT_EQ(zhang_shasha(t, empty), 3.0);
  EXPECT_EQ(nted(empty, t), 1.0);
  try {
    nted(empty, empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBothTreesEmpty);
  }
}

TEST(ZhangShasha, CustomCosts) {
  const auto a = Tree::parse("r(a,b)"), b = Tree::parse("r(a)");
  EXPECT_EQ(zhang_shasha(a, b, EditCost{1, 3, 1}), 3.0);
  EXPECT_EQ(zhang_shasha(b, a, EditCost{2, 3, 1}), 2.0);
}

TEST(ZhangShasha, MetricProperties) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const auto x = random_tree(rng, 6, 3), y = random_tree(rng, 6, 3), z = random_tree(rng, 6, 3);
    const double xy = zhang_shasha(x, y), yx = zhang_shasha(y, x);
    EXPECT_EQ(zhang_shasha(x, x), 0.0);
    EXPECT_EQ(xy, yx);
    EXPECT_LE(xy, zhang_shasha(x, z) + zhang_shasha(z, y));
    const double n = nted(x, y);
    EXPECT_GE(n, 0.0);
    EXPECT_LE(n, 1.0);
  }
}

TEST(ZhangShasha, MatchesExhaustiveSearchOnSmallTrees) {
  // trees up to 4 nodes here; the acceptance run covers 5
  oracle::ForestGraph g(4, "abc");
  std::vector<PostorderTree> pt;
  for (auto i : g.trees()) pt.push_back(PostorderTree::from(oracle::to_tree(g.state(i))));
  for (std::size_t a = 0; a < g.trees().size(); ++a) {
    const auto d = g.distances_from(g.trees()[a]);
    for (std::size_t b = 0; b < g.trees().size(); ++b) {
      ASSERT_EQ(zhang_shasha(pt[a], pt[b]), d[g.trees()[b]]) << a << " " << b;
    }
  }
}

TEST(Oracle, ForestCounts) {
  // ordered forests with n nodes are counted by Catalan(n), each with 3^n labelings
  oracle::ForestGraph g(5, "abc");
  EXPECT_EQ(g.state_count(), 1u + 3 + 18 + 135 + 1134 + 10206);
  EXPECT_EQ(g.trees().size(), 3u + 9 + 2 * 27 + 5 * 81 + 14 * 243);
}
