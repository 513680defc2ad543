#include <algorithm>
#include <functional>

#include <spdlog/spdlog.h>

#include "recipegpt/error.hpp"
#include "recipegpt/metrics.hpp"
#include "recipegpt/resources.hpp"

namespace recipegpt::metrics {

std::size_t Tree::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

std::string Tree::to_string() const {
  std::string out = label;
  if (!children.empty()) {
    out += '(';
    for (std::size_t i = 0; i < children.size(); ++i) {
      if (i) out += ',';
      out += children[i].to_string();
    }
    out += ')';
  }
  return out;
}

Tree Tree::parse(std::string_view text) {
  std::size_t pos = 0;
  std::function<Tree()> node = [&]() {
    Tree t;
    while (pos < text.size() && text[pos] != '(' && text[pos] != ')' && text[pos] != ',') t.label += text[pos++];
    if (t.label.empty()) throw Error(ErrorCode::kFormat, "tree node without label at offset " + std::to_string(pos));
    if (pos < text.size() && text[pos] == '(') {
      ++pos;
      for (;;) {
        t.children.push_back(node());
        if (pos >= text.size()) throw Error(ErrorCode::kFormat, "unterminated tree");
        if (text[pos] == ',') {
          ++pos;
        } else if (text[pos] == ')') {
          ++pos;
          break;
        } else {
          throw Error(ErrorCode::kFormat, "unexpected character in tree");
        }
      }
    }
    return t;
  };
  Tree t = node();
  if (pos != text.size()) throw Error(ErrorCode::kFormat, "trailing characters after tree");
  return t;
}

const TreeLexicon& TreeLexicon::bundled() {
  static const TreeLexicon lex = [] {
    TreeLexicon l;
    l.verbs = textnorm::load_lexicon(data_path("cooking_verbs.txt"));
    for (const auto& n : textnorm::bundled_dictionary().nouns()) l.nouns.insert(n);
    for (const auto& n : textnorm::load_lexicon(data_path("cooking_tools.txt"))) l.nouns.insert(n);
    return l;
  }();
  return lex;
}

Tree build_instruction_tree(std::span<const std::string> steps, const TreeLexicon& lexicon) {
  Tree root{std::string(kTreeRootLabel), {}};
  for (const auto& step : steps) {
    const auto ts = textnorm::word_tokenize(step);
    std::optional<std::size_t> verb;
    bool clause_start = true;
    for (const auto& tok : ts.tokens) {
      if (!textnorm::is_word_token(tok)) {
        if (tok == "," || tok == ";" || tok == ":") clause_start = true;
        continue;
      }
      if (tok == "then") {
        clause_start = true;
        continue;
      }
      const std::string lemma = textnorm::lemmatize(tok);
      const bool is_verb = lexicon.verbs.count(lemma) != 0;
      const bool is_noun = lexicon.nouns.count(lemma) != 0;
      if (is_verb && (!is_noun || clause_start)) {
        root.children.push_back(Tree{lemma, {}});
        verb = root.children.size() - 1;
      } else if (is_noun) {
        Tree& parent = verb ? root.children[*verb] : root;
        parent.children.push_back(Tree{lemma, {}});
      }
      clause_start = false;
    }
  }
  return root;
}

PostorderTree PostorderTree::from(const Tree& tree) {
  PostorderTree out;
  std::function<std::size_t(const Tree&)> walk = [&](const Tree& t) {
    std::optional<std::size_t> first_leaf;
    for (const auto& c : t.children) {
      const std::size_t leaf = walk(c);
      if (!first_leaf) first_leaf = leaf;
    }
    const std::size_t idx = out.labels.size();
    out.labels.push_back(t.label);
    out.leftmost.push_back(first_leaf ? *first_leaf : idx);
    return out.leftmost.back();
  };
  walk(tree);
  // A keyroot is the highest node for its leftmost leaf.
  std::vector<bool> seen(out.size(), false);
  for (std::size_t i = out.size(); i-- > 0;) {
    if (!seen[out.leftmost[i]]) {
      seen[out.leftmost[i]] = true;
      out.keyroots.push_back(i);
    }
  }
  std::reverse(out.keyroots.begin(), out.keyroots.end());
  return out;
}

double zhang_shasha(const PostorderTree& a, const PostorderTree& b, const EditCost& cost) {
  if (cost.replace > cost.insert + cost.remove) {
    spdlog::warn("replace cost exceeds insert + remove; replacements will never be chosen");
  }
  const std::size_t n = a.size(), m = b.size();
  if (n == 0) return cost.insert * static_cast<double>(m);
  if (m == 0) return cost.remove * static_cast<double>(n);

  std::vector<double> td(n * m, 0.0);
  std::vector<double> fd;
  for (std::size_t k1 : a.keyroots) {
    for (std::size_t k2 : b.keyroots) {
      const std::size_t l1 = a.leftmost[k1], l2 = b.leftmost[k2];
      const std::size_t rows = k1 - l1 + 2, cols = k2 - l2 + 2;
      fd.assign(rows * cols, 0.0);
      auto at = [&](std::size_t i, std::size_t j) -> double& { return fd[i * cols + j]; };
      for (std::size_t i = 1; i < rows; ++i) at(i, 0) = at(i - 1, 0) + cost.remove;
      for (std::size_t j = 1; j < cols; ++j) at(0, j) = at(0, j - 1) + cost.insert;
      for (std::size_t i = 1; i < rows; ++i) {
        const std::size_t x = l1 + i - 1;
        for (std::size_t j = 1; j < cols; ++j) {
          const std::size_t y = l2 + j - 1;
          const double del = at(i - 1, j) + cost.remove;
          const double ins = at(i, j - 1) + cost.insert;
          if (a.leftmost[x] == l1 && b.leftmost[y] == l2) {
            const double rep = at(i - 1, j - 1) + (a.labels[x] == b.labels[y] ? 0.0 : cost.replace);
            at(i, j) = std::min({del, ins, rep});
            td[x * m + y] = at(i, j);
          } else {
            const std::size_t p = a.leftmost[x] - l1, q = b.leftmost[y] - l2;
            at(i, j) = std::min({del, ins, at(p, q) + td[x * m + y]});
          }
        }
      }
    }
  }
  return td[(n - 1) * m + (m - 1)];
}

double zhang_shasha(const Tree& a, const Tree& b, const EditCost& cost) {
  return zhang_shasha(PostorderTree::from(a), PostorderTree::from(b), cost);
}

double nted(const PostorderTree& a, const PostorderTree& b, const EditCost& cost) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) throw Error(ErrorCode::kBothTreesEmpty, "cannot normalize the distance between two empty trees");
  return zhang_shasha(a, b, cost) / static_cast<double>(total);
}

double nted(const Tree& a, const Tree& b, const EditCost& cost) {
  return nted(PostorderTree::from(a), PostorderTree::from(b), cost);
}

}  // namespace recipegpt::metrics
