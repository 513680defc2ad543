#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "recipegpt/bpe.hpp"
#include "recipegpt/corpus.hpp"
#include "recipegpt/pipeline.hpp"
#include "recipegpt/resources.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline constexpr std::uint64_t kSplitSeed = 20200420;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("recipegpt-" + tag + "-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

/// The bundled corpus, filtered and split with the CLI defaults.
inline const recipegpt::pipeline::PrepareResult& bundled_corpus() {
  static const auto prepared =
      recipegpt::pipeline::prepare_corpus(recipegpt::data_path("recipes.jsonl"), kSplitSeed, 20, 20);
  return prepared;
}

inline std::vector<recipegpt::corpus::RecipeRecord> select(const std::vector<std::string>& ids) {
  std::vector<recipegpt::corpus::RecipeRecord> out;
  const auto& all = bundled_corpus().records;
  for (const auto& id : ids) {
    for (const auto& r : all) {
      if (r.id == id) out.push_back(r);
    }
  }
  return out;
}

/// BPE trained on the training split, as `train-bpe` does.
inline const recipegpt::codec::BpeVocab& bundled_vocab() {
  static const auto vocab = [] {
    const auto train = select(bundled_corpus().split.train);
    const auto texts = recipegpt::pipeline::bpe_training_texts(train);
    return recipegpt::codec::BpeVocab::train(texts, 4096);
  }();
  return vocab;
}

/// A raw recipe with exactly the requested ingredient, sentence and word counts.
inline recipegpt::corpus::RawRecipe synthetic_raw(std::size_t ingredients, std::size_t sentences, std::size_t words,
                                                  const std::string& id = "fixture") {
  static const char* kNames[] = {"flour", "sugar", "butter", "eggs", "milk", "salt", "cream"};
  recipegpt::corpus::RawRecipe raw;
  raw.source_id = id;
  raw.title = "Fixture Cake";
  for (std::size_t i = 0; i < ingredients; ++i) raw.ingredient_lines.push_back("1 cup " + std::string(kNames[i % 7]));
  // each sentence gets at least two words; the rest go to the first sentence
  std::vector<std::size_t> per(sentences, 2);
  per[0] = words - 2 * (sentences - 1);
  std::string text;
  for (std::size_t s = 0; s < sentences; ++s) {
    if (s) text += ' ';
    for (std::size_t w = 0; w < per[s]; ++w) {
      if (w) text += ' ';
      text += w == 0 ? "Stir" : "well";
    }
    text += '.';
  }
  raw.instruction_text = text;
  return raw;
}

}  // namespace testing_support
