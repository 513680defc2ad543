// Command-line entry points for the offline pipeline and the API server.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "recipegpt/error.hpp"
#include "recipegpt/evaluation.hpp"
#include "recipegpt/model.hpp"
#include "recipegpt/pipeline.hpp"
#include "recipegpt/resources.hpp"
#include "recipegpt/retrieval.hpp"
#include "recipegpt/sampling.hpp"
#include "recipegpt/service.hpp"
#include "recipegpt/store.hpp"
#include "recipegpt/train.hpp"

namespace fs = std::filesystem;
using namespace recipegpt;

namespace {

void require_file(const std::string& what, const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::kInvalidArgument, what + " path is required");
  if (!fs::exists(path)) throw Error(ErrorCode::kIo, what + " not found: " + path);
}

void require_prepared(const std::string& dir) {
  require_file("prepared corpus directory", dir);
  require_file("prepared records", corpus::records_path(dir));
  require_file("split manifest", corpus::split_path(dir));
}

std::vector<int> parse_ks(const std::string& text) {
  std::vector<int> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(item, &used);
      if (used != item.size() || k < 1) throw std::invalid_argument(item);
      ks.push_back(k);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "--k expects a comma-separated list of positive integers");
    }
  }
  if (ks.empty()) throw Error(ErrorCode::kInvalidArgument, "--k is empty");
  return ks;
}

struct Args {
  std::string corpus = data_path("recipes.jsonl");
  std::string vocab;
  std::string checkpoint;
  std::string out;
  std::string index;
  std::string store = "generations.log";
  std::uint64_t seed = 20200420;
  std::string k = "3";
  std::size_t merges = 4096;
  int steps = 1500;
  double lr = 1e-4;
  int batch_size = 8;
  int eval_every = 100;
  int warmup = 100;
  std::size_t max_len = 512;
  std::size_t n_val = 20;
  std::size_t n_test = 20;
  lm::ModelConfig model;
  std::string mode = "instructions";
  std::string title;
  std::vector<std::string> ingredients;
  std::string instructions;
  int max_new = 384;
  std::size_t limit = 0;
  std::string bind = "127.0.0.1:8080";
  std::string api_key_env = "RECIPEGPT_API_KEY";
};

int cmd_prepare(const Args& a) {
  require_file("raw corpus", a.corpus);
  if (a.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  const auto prepared = pipeline::prepare_corpus(a.corpus, a.seed, a.n_val, a.n_test);
  for (const auto& p : prepared.problems) spdlog::warn("{}:{}: {}", a.corpus, p.line, p.message);
  for (const auto& [reason, n] : prepared.rejected) spdlog::info("rejected {}: {}", corpus::to_string(reason), n);
  const std::string hash = pipeline::write_prepared(a.out, prepared);
  fmt::print("kept {} recipes (train {}, validation {}, test {}); corpus hash {}\n", prepared.records.size(),
             prepared.split.train.size(), prepared.split.validation.size(), prepared.split.test.size(), hash);
  return 0;
}

int cmd_train_bpe(const Args& a) {
  require_prepared(a.corpus);
  if (a.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  const auto pc = corpus::load_prepared(a.corpus);
  const auto train = pc.select(pc.split.train);
  const auto vocab = codec::BpeVocab::train(pipeline::bpe_training_texts(train), a.merges);
  vocab.save(a.out);
  fmt::print("learned {} merges, vocabulary size {}; vocab hash {}\n", vocab.merges().size(), vocab.size(),
             vocab.hash());
  return 0;
}

int cmd_train(const Args& a) {
  require_prepared(a.corpus);
  require_file("vocabulary", a.vocab);
  if (a.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  const auto pc = corpus::load_prepared(a.corpus);
  const auto vocab = codec::BpeVocab::load(a.vocab);
  lm::ModelConfig cfg = a.model;
  cfg.vocab_size = static_cast<int>(vocab.size());
  lm::TrainConfig tc;
  tc.lr = a.lr;
  tc.batch_size = a.batch_size;
  tc.steps = a.steps;
  tc.eval_every = a.eval_every;
  tc.warmup_steps = a.warmup;
  tc.seed = a.seed;
  tc.max_len = a.max_len;
  const auto train = pc.select(pc.split.train);
  const auto val = pc.select(pc.split.validation);
  const auto result = lm::train(cfg, vocab, train, val, tc, [](const lm::TracePoint& p) {
    if (p.train_loss) {
      spdlog::info("step {} train loss {:.4f} val ppl {:.3f}", p.step, *p.train_loss, p.val_ppl);
    } else {
      spdlog::info("step {} val ppl {:.3f}", p.step, p.val_ppl);
    }
  });
  lm::save_checkpoint(a.out, result.model, vocab.hash(), static_cast<std::uint64_t>(result.state.step));
  write_file_atomic(a.out + ".trace.jsonl", lm::trace_to_jsonl(result.trace));
  fmt::print("val perplexity {:.3f} -> {:.3f}; checkpoint {}\n", result.trace.front().val_ppl,
             result.trace.back().val_ppl, a.out);
  return 0;
}

int cmd_generate(const Args& a) {
  require_file("vocabulary", a.vocab);
  require_file("checkpoint", a.checkpoint);
  const auto vocab = codec::BpeVocab::load(a.vocab);
  const auto ck = lm::load_checkpoint(a.checkpoint, vocab);
  const auto mode = metrics::parse_mode(a.mode);
  if (!mode) throw Error(ErrorCode::kInvalidArgument, "--mode must be instructions or ingredients");
  codec::FieldContext ctx;
  if (!a.title.empty()) ctx[codec::FieldKind::kTitle] = a.title;
  if (!a.ingredients.empty()) {
    std::string names;
    for (const auto& line : a.ingredients) {
      std::string name = line;
      try {
        name = corpus::parse_ingredient_line(line).name_phrase;
      } catch (const Error&) {
      }
      names += (names.empty() ? "" : "\n") + name;
    }
    ctx[codec::FieldKind::kIngredients] = names;
  }
  if (!a.instructions.empty()) ctx[codec::FieldKind::kInstructions] = a.instructions;
  const int k = parse_ks(a.k).front();
  const auto gen = lm::generate_field(ck.model, vocab, ctx, metrics::target_field(*mode),
                                      lm::SamplingConfig{k, a.max_new, a.seed});
  fmt::print("{}\n", gen.text);
  if (gen.truncated) spdlog::warn("generation hit the token budget before the end token");
  return 0;
}

int cmd_evaluate(const Args& a) {
  require_prepared(a.corpus);
  require_file("vocabulary", a.vocab);
  require_file("checkpoint", a.checkpoint);
  if (a.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  const auto ks = parse_ks(a.k);
  const auto vocab = codec::BpeVocab::load(a.vocab);
  const auto ck = lm::load_checkpoint(a.checkpoint, vocab);
  const auto pc = corpus::load_prepared(a.corpus);
  const auto test = pc.select(pc.split.test);
  metrics::HarnessConfig hc;
  hc.ks = ks;
  hc.seed = a.seed;
  hc.max_new_tokens = a.max_new;
  hc.limit = a.limit;
  const auto result = metrics::run_harness(ck.model, vocab, test, hc);
  fs::create_directories(a.out);
  write_file_atomic((fs::path(a.out) / "rows.jsonl").string(), metrics::rows_to_jsonl(result.rows));
  const std::string table = metrics::summary_to_tsv(result);
  write_file_atomic((fs::path(a.out) / "table.tsv").string(), table);
  fmt::print("{}", table);
  return 0;
}

int cmd_index(const Args& a) {
  require_prepared(a.corpus);
  if (a.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  const auto pc = corpus::load_prepared(a.corpus);
  const auto idx = retrieval::InvertedIndex::build(pc.records);
  idx.save(a.out, pc.corpus_hash);
  fmt::print("indexed {} recipes into {}\n", idx.document_count(), a.out);
  return 0;
}

service::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const Args& a) {
  require_prepared(a.corpus);
  require_file("vocabulary", a.vocab);
  require_file("checkpoint", a.checkpoint);
  const char* key = std::getenv(a.api_key_env.c_str());
  if (!key || !*key) throw Error(ErrorCode::kInvalidArgument, "environment variable " + a.api_key_env + " is not set");
  const auto colon = a.bind.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "--bind expects host:port");
  const std::string host = a.bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(a.bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "--bind expects host:port");
  }

  auto vocab = std::make_shared<codec::BpeVocab>(codec::BpeVocab::load(a.vocab));
  auto ck = lm::load_checkpoint(a.checkpoint, *vocab);
  auto pc = corpus::load_prepared(a.corpus);
  std::optional<retrieval::InvertedIndex> index;
  if (!a.index.empty()) {
    index = retrieval::InvertedIndex::load(a.index, pc.corpus_hash);
    if (!index) spdlog::warn("index cache {} is missing or stale; rebuilding", a.index);
  }
  auto store = std::make_shared<store::Store>(a.store);
  service::ServiceConfig sc;
  sc.api_key = key;
  service::Service svc(sc, store);
  svc.set_model(std::make_shared<lm::Model>(std::move(ck.model)), vocab);
  svc.set_corpus(std::move(pc.records), std::move(index));

  service::Server server(svc);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const bool ok = server.listen(host, port, [&](int bound) { spdlog::info("listening on {}:{}", host, bound); });
  g_server = nullptr;
  if (!ok) throw Error(ErrorCode::kIo, "cannot bind " + a.bind);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-field recipe generation: data preparation, training, evaluation and serving"};
  app.require_subcommand(1);
  Args a;

  auto* prepare = app.add_subcommand("prepare", "Ingest, filter and split a raw recipe file");
  prepare->add_option("--corpus", a.corpus, "Raw JSON-lines recipes")->capture_default_str();
  prepare->add_option("--out", a.out, "Output directory")->required();
  prepare->add_option("--seed", a.seed, "Split seed")->capture_default_str();
  prepare->add_option("--n-val", a.n_val, "Validation recipes")->capture_default_str();
  prepare->add_option("--n-test", a.n_test, "Test recipes")->capture_default_str();

  auto* bpe = app.add_subcommand("train-bpe", "Learn a byte-level BPE vocabulary from the training split");
  bpe->add_option("--corpus", a.corpus, "Prepared corpus directory")->required();
  bpe->add_option("--merges", a.merges, "Merge count")->capture_default_str();
  bpe->add_option("--out", a.out, "Vocabulary file")->required();

  auto* train = app.add_subcommand("train", "Train the language model");
  train->add_option("--corpus", a.corpus, "Prepared corpus directory")->required();
  train->add_option("--vocab", a.vocab, "Vocabulary file")->required();
  train->add_option("--out", a.out, "Checkpoint file; the trace goes to <out>.trace.jsonl")->required();
  train->add_option("--steps", a.steps, "Optimizer steps")->capture_default_str();
  train->add_option("--lr", a.lr, "Peak learning rate")->capture_default_str();
  train->add_option("--batch-size", a.batch_size, "Recipes per step")->capture_default_str();
  train->add_option("--eval-every", a.eval_every, "Steps between validation passes")->capture_default_str();
  train->add_option("--warmup", a.warmup, "Linear warmup steps")->capture_default_str();
  train->add_option("--seed", a.seed, "Training seed")->capture_default_str();
  train->add_option("--max-len", a.max_len, "Tokens per training example")->capture_default_str();
  train->add_option("--layers", a.model.n_layers)->capture_default_str();
  train->add_option("--heads", a.model.n_heads)->capture_default_str();
  train->add_option("--dim", a.model.embed_dim)->capture_default_str();
  train->add_option("--context", a.model.context_len)->capture_default_str();

  auto* gen = app.add_subcommand("generate", "Generate one field from the others");
  gen->add_option("--vocab", a.vocab, "Vocabulary file")->required();
  gen->add_option("--checkpoint", a.checkpoint, "Checkpoint file")->required();
  gen->add_option("--mode", a.mode, "instructions or ingredients")->capture_default_str();
  gen->add_option("--title", a.title, "Recipe title");
  gen->add_option("--ingredient", a.ingredients, "Ingredient line (repeatable)");
  gen->add_option("--instructions", a.instructions, "Instruction text");
  gen->add_option("--k", a.k, "Top-k")->capture_default_str();
  gen->add_option("--seed", a.seed, "Sampling seed")->capture_default_str();
  gen->add_option("--max-new", a.max_new, "Token budget")->capture_default_str();

  auto* eval = app.add_subcommand("evaluate", "Score generations on the test split for several k");
  eval->add_option("--corpus", a.corpus, "Prepared corpus directory")->required();
  eval->add_option("--vocab", a.vocab, "Vocabulary file")->required();
  eval->add_option("--checkpoint", a.checkpoint, "Checkpoint file")->required();
  eval->add_option("--out", a.out, "Output directory for rows.jsonl and table.tsv")->required();
  eval->add_option("--k", a.k, "Comma-separated k values")->default_str("1,3,5,10,30");
  eval->add_option("--seed", a.seed, "Sampling seed")->capture_default_str();
  eval->add_option("--max-new", a.max_new, "Token budget")->capture_default_str();
  eval->add_option("--limit", a.limit, "Evaluate only the first N test recipes (0 = all)")->capture_default_str();

  auto* index = app.add_subcommand("index", "Build the retrieval index cache");
  index->add_option("--corpus", a.corpus, "Prepared corpus directory")->required();
  index->add_option("--out", a.out, "Index cache file")->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--corpus", a.corpus, "Prepared corpus directory")->required();
  serve->add_option("--vocab", a.vocab, "Vocabulary file")->required();
  serve->add_option("--checkpoint", a.checkpoint, "Checkpoint file")->required();
  serve->add_option("--index", a.index, "Index cache file (optional)");
  serve->add_option("--store", a.store, "Annotation log file")->capture_default_str();
  serve->add_option("--bind", a.bind, "host:port")->capture_default_str();
  serve->add_option("--api-key-env", a.api_key_env, "Environment variable holding the API key")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (eval->parsed() && eval->count("--k") == 0) a.k = "1,3,5,10,30";

  try {
    if (prepare->parsed()) return cmd_prepare(a);
    if (bpe->parsed()) return cmd_train_bpe(a);
    if (train->parsed()) return cmd_train(a);
    if (gen->parsed()) return cmd_generate(a);
    if (eval->parsed()) return cmd_evaluate(a);
    if (index->parsed()) return cmd_index(a);
    if (serve->parsed()) return cmd_serve(a);
  } catch (const Error& e) {
    fmt::print(stderr, "error ({}): {}\n", to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 1;
}
