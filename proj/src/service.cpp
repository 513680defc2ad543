#include "recipegpt/service.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <regex>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "recipegpt/error.hpp"
#include "recipegpt/evaluation.hpp"
#include "recipegpt/sampling.hpp"
#include "recipegpt/textnorm.hpp"

namespace recipegpt::service {
namespace {

using nlohmann::json;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

json error_body(const std::string& code, const std::string& message) {
  return json{{"error", {{"code", code}, {"message", message}}}};
}

ApiError unprocessable(const std::string& message) { return ApiError(422, "invalid_request", message); }

/// Maps library errors onto HTTP statuses; unknown failures become opaque 500s.
ApiError from_error(const Error& e) {
  const std::string code(to_string(e.code()));
  switch (e.code()) {
    case ErrorCode::kNotFound:
      return ApiError(404, code, e.what());
    case ErrorCode::kOutOfRange:
    case ErrorCode::kEmptyComment:
    case ErrorCode::kInvalidRecord:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kEmptyQuery:
    case ErrorCode::kTargetInContext:
    case ErrorCode::kEmptyContext:
    case ErrorCode::kSequenceTooLong:
      return ApiError(422, code, e.what());
    default:
      spdlog::error("internal error: {}", e.what());
      return ApiError(500, "internal", "internal error");
  }
}

bool constant_time_equal(const std::string& a, const std::string& b) {
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char x = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    const unsigned char y = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    diff |= x ^ y;
  }
  return diff == 0;
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error&) {
    throw ApiError(400, "invalid_json", "request body is not valid JSON");
  }
}

std::uint64_t parse_id(const std::string& s) {
  if (s.empty() || s.size() > 19 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ApiError(404, "not_found", "no generation with id '" + s + "'");
  }
  return std::stoull(s);
}

std::size_t parse_count(const std::map<std::string, std::string>& q, const std::string& key, std::size_t fallback) {
  auto it = q.find(key);
  if (it == q.end()) return fallback;
  const auto& s = it->second;
  if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw unprocessable("'" + key + "' must be a positive integer");
  }
  return std::stoul(s);
}

/// Ingredient lines as parsed records; unparseable lines keep their text with
/// no root noun so highlight offsets still line up with the joined text.
std::vector<IngredientLine> lines_for_highlight(const std::vector<std::string>& lines) {
  std::vector<IngredientLine> out;
  for (const auto& l : lines) {
    IngredientLine line;
    try {
      line = corpus::parse_ingredient_line(l);
    } catch (const Error&) {
    }
    line.original = l;
    out.push_back(std::move(line));
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto nl = text.find('\n', pos);
    out.push_back(text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos));
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return out;
}

}  // namespace

json recipe_to_json(const corpus::RecipeRecord& r) {
  json ingredients = json::array();
  for (const auto& l : r.ingredients) ingredients.push_back(l.original);
  return json{{"id", r.id},
              {"title", r.title},
              {"ingredients", ingredients},
              {"steps", r.steps},
              {"instructions", codec::field_content(r, codec::FieldKind::kInstructions)}};
}

Service::Service(ServiceConfig config, std::shared_ptr<store::Store> store)
    : config_(std::move(config)), store_(std::move(store)) {
  if (config_.api_key.empty()) throw Error(ErrorCode::kInvalidArgument, "an API key is required");
  if (!store_) throw Error(ErrorCode::kInvalidArgument, "a store is required");
  corpus_ = std::make_shared<Corpus>();
}

void Service::set_model(std::shared_ptr<const lm::Model> model, std::shared_ptr<const codec::BpeVocab> vocab) {
  if (!model || !vocab) throw Error(ErrorCode::kInvalidArgument, "model and vocabulary are required");
  if (static_cast<std::size_t>(model->config().vocab_size) != vocab->size()) {
    throw Error(ErrorCode::kVocabMismatch, "model vocab_size differs from the vocabulary");
  }
  auto bundle = std::make_shared<ModelBundle>(ModelBundle{std::move(model), std::move(vocab)});
  std::lock_guard lock(snapshot_mu_);
  model_ = std::move(bundle);
}

void Service::set_corpus(std::vector<corpus::RecipeRecord> records, std::optional<retrieval::InvertedIndex> index) {
  auto c = std::make_shared<Corpus>();
  c->index = index ? std::move(*index) : retrieval::InvertedIndex::build(records);
  c->records = std::move(records);
  for (std::size_t i = 0; i < c->records.size(); ++i) c->by_id[c->records[i].id] = i;
  std::lock_guard lock(snapshot_mu_);
  corpus_ = std::move(c);
}

std::shared_ptr<const Service::Corpus> Service::corpus_snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return corpus_;
}

std::shared_ptr<const Service::ModelBundle> Service::model_snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return model_;
}

bool Service::authorized(const HttpRequest& request) const {
  for (const auto& [name, value] : request.headers) {
    if (lower(name) == lower(kApiKeyHeader)) return constant_time_equal(value, config_.api_key);
  }
  return false;
}

json Service::health() const {
  const auto m = model_snapshot();
  const auto c = corpus_snapshot();
  return json{{"status", "ok"},
              {"model_loaded", m != nullptr},
              {"corpus_size", c->records.size()},
              {"vocab_hash", m ? json(m->vocab->hash()) : json(nullptr)}};
}

json Service::generate(const json& req) const {
  const auto started = std::chrono::steady_clock::now();
  if (!req.is_object()) throw unprocessable("request body must be a JSON object");
  if (!req.contains("mode") || !req["mode"].is_string()) throw unprocessable("'mode' must be a string");
  const auto mode = metrics::parse_mode(req["mode"].get<std::string>());
  if (!mode) throw unprocessable("'mode' must be 'instructions' or 'ingredients'");
  if (!req.contains("title") || !req["title"].is_string()) throw unprocessable("'title' must be a string");
  const std::string title = req["title"].get<std::string>();
  if (title.find_first_not_of(" \t\r\n") == std::string::npos) throw unprocessable("'title' must not be empty");

  const bool has_ingr = req.contains("ingredients") && !req["ingredients"].is_null();
  const bool has_instr = req.contains("instructions") && !req["instructions"].is_null();
  std::vector<std::string> ingredient_lines;
  std::string instructions;
  if (*mode == metrics::Mode::kInstructions) {
    if (has_instr) throw unprocessable("mode 'instructions' must not include 'instructions'");
    if (!has_ingr || !req["ingredients"].is_array()) throw unprocessable("mode 'instructions' requires an 'ingredients' list");
    for (const auto& l : req["ingredients"]) {
      if (!l.is_string()) throw unprocessable("'ingredients' must be a list of strings");
      ingredient_lines.push_back(l.get<std::string>());
    }
    if (std::none_of(ingredient_lines.begin(), ingredient_lines.end(),
                     [](const std::string& s) { return s.find_first_not_of(" \t\r\n") != std::string::npos; })) {
      throw unprocessable("'ingredients' must contain at least one non-empty line");
    }
  } else {
    if (has_ingr) throw unprocessable("mode 'ingredients' must not include 'ingredients'");
    if (!has_instr || !req["instructions"].is_string()) throw unprocessable("mode 'ingredients' requires 'instructions' text");
    instructions = req["instructions"].get<std::string>();
    if (instructions.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw unprocessable("'instructions' must not be empty");
    }
  }

  int k = config_.default_k;
  if (req.contains("k") && !req["k"].is_null()) {
    if (!req["k"].is_number_integer()) throw unprocessable("'k' must be an integer");
    const auto kk = req["k"].get<std::int64_t>();
    if (kk < 1 || kk > config_.max_k) throw unprocessable("'k' must be between 1 and " + std::to_string(config_.max_k));
    k = static_cast<int>(kk);
  }
  std::uint64_t seed;
  if (req.contains("seed") && !req["seed"].is_null()) {
    if (!req["seed"].is_number_integer() || (!req["seed"].is_number_unsigned() && req["seed"].get<std::int64_t>() < 0)) {
      throw unprocessable("'seed' must be a non-negative integer");
    }
    seed = req["seed"].get<std::uint64_t>();
  } else {
    seed = std::random_device{}() & 0x1fffffffffffffULL;
  }
  int max_new = config_.max_new_tokens_cap;
  if (req.contains("max_new_tokens") && !req["max_new_tokens"].is_null()) {
    if (!req["max_new_tokens"].is_number_integer() || req["max_new_tokens"].get<std::int64_t>() < 1) {
      throw unprocessable("'max_new_tokens' must be a positive integer");
    }
    max_new = static_cast<int>(std::min<std::int64_t>(req["max_new_tokens"].get<std::int64_t>(), max_new));
  }

  const auto bundle = model_snapshot();
  if (!bundle) throw ApiError(503, "model_not_loaded", "no model is loaded");
  const auto corpus = corpus_snapshot();

  // The model sees the same field contents as in training: ingredient name
  // phrases one per line, sentences joined by single spaces.
  codec::FieldContext ctx;
  ctx[codec::FieldKind::kTitle] = title;
  retrieval::Query query;
  query.title = title;
  std::vector<IngredientLine> request_lines;
  if (*mode == metrics::Mode::kInstructions) {
    request_lines = lines_for_highlight(ingredient_lines);
    std::string names;
    for (const auto& l : request_lines) {
      const std::string& text = l.name_phrase.empty() ? l.original : l.name_phrase;
      if (text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      if (!names.empty()) names += '\n';
      names += text;
    }
    ctx[codec::FieldKind::kIngredients] = names;
    query.ingredients = names;
  } else {
    const auto sentences = corpus::split_sentences(instructions);
    std::string joined;
    for (const auto& s : sentences) joined += (joined.empty() ? "" : " ") + s;
    ctx[codec::FieldKind::kInstructions] = joined;
    query.instructions = joined;
  }

  lm::Generation gen;
  try {
    gen = lm::generate_field(*bundle->model, *bundle->vocab, ctx, metrics::target_field(*mode),
                             lm::SamplingConfig{k, max_new, seed});
  } catch (const Error& e) {
    throw from_error(e);
  }

  // Highlights: ingredient-side offsets index the ingredient lines joined by
  // '\n' (request lines, or the generated lines in ingredients mode); the
  // other side is the generated instructions or the request instructions.
  json highlights = json::array();
  const auto& dict = textnorm::bundled_dictionary();
  std::vector<textnorm::HighlightSpan> spans;
  if (*mode == metrics::Mode::kInstructions) {
    spans = textnorm::overlap_highlights(request_lines, gen.text, dict);
  } else {
    spans = textnorm::overlap_highlights(lines_for_highlight(split_lines(gen.text)), instructions, dict);
  }
  for (const auto& s : spans) {
    highlights.push_back(
        {{"field", std::string(textnorm::to_string(s.field))}, {"start", s.start}, {"end", s.end}, {"root_noun", s.root_noun}});
  }

  json reference = nullptr, report = nullptr;
  if (!corpus->records.empty()) {
    std::vector<retrieval::ScoredHit> hits;
    try {
      hits = corpus->index.search(query, 1);
    } catch (const Error&) {
    }
    if (!hits.empty()) {
      const auto& rec = corpus->records[corpus->by_id.at(hits.front().recipe_id)];
      reference = json{{"recipe", recipe_to_json(rec)}, {"score", hits.front().score}};
      report = metrics::to_json(metrics::evaluate(gen.text, rec, *mode));
    }
  }

  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
  json ctx_json = json::object();
  for (const auto& [f, v] : ctx) ctx_json[std::string(codec::field_name(f))] = v;
  return json{{"mode", std::string(metrics::to_string(*mode))},
              {"context", ctx_json},
              {"output", gen.text},
              {"truncated", gen.truncated},
              {"highlights", highlights},
              {"reference", reference},
              {"report", report},
              {"sampling", {{"k", k}, {"max_new_tokens", max_new}, {"seed", seed}}},
              {"elapsed_ms", elapsed}};
}

json Service::reference(const std::map<std::string, std::string>& q) const {
  retrieval::Query query;
  auto take = [&](const char* key, std::optional<std::string>& dst) {
    if (auto it = q.find(key); it != q.end() && it->second.find_first_not_of(" \t\r\n") != std::string::npos) {
      dst = it->second;
    }
  };
  take("title", query.title);
  take("ingredients", query.ingredients);
  take("instructions", query.instructions);
  if (!query.title && !query.ingredients && !query.instructions) {
    throw ApiError(422, "empty_query", "give at least one of title, ingredients, instructions");
  }
  const auto corpus = corpus_snapshot();
  if (corpus->records.empty()) throw ApiError(404, "not_found", "the reference corpus is empty");
  std::vector<retrieval::ScoredHit> hits;
  try {
    hits = corpus->index.search(query, 1);
  } catch (const Error& e) {
    throw from_error(e);
  }
  if (hits.empty()) throw ApiError(404, "not_found", "no recipe matches the query");
  const auto& rec = corpus->records[corpus->by_id.at(hits.front().recipe_id)];
  return json{{"recipe", recipe_to_json(rec)},
              {"score", hits.front().score},
              {"field_scores",
               {{"title", hits.front().field_scores[0]},
                {"ingredients", hits.front().field_scores[1]},
                {"instructions", hits.front().field_scores[2]}}}};
}

HttpResponse Service::handle(const HttpRequest& request) const {
  try {
    return route(request);
  } catch (const ApiError& e) {
    return {e.status(), error_body(e.code(), e.what()).dump()};
  } catch (const Error& e) {
    const ApiError api = from_error(e);
    return {api.status(), error_body(api.code(), api.what()).dump()};
  } catch (const std::exception& e) {
    spdlog::error("unhandled error on {} {}: {}", request.method, request.path, e.what());
    return {500, error_body("internal", "internal error").dump()};
  }
}

HttpResponse Service::route(const HttpRequest& req) const {
  static const std::regex generation_re(R"(^/v1/generations/([^/]+)$)");
  static const std::regex rating_re(R"(^/v1/generations/([^/]+)/rating$)");
  static const std::regex comments_re(R"(^/v1/generations/([^/]+)/comments$)");
  auto method_not_allowed = [] { return ApiError(405, "method_not_allowed", "method not allowed"); };

  if (req.path == "/v1/health") {
    if (req.method != "GET") throw method_not_allowed();
    return {200, health().dump()};
  }
  if (req.path.rfind("/v1/", 0) != 0) throw ApiError(404, "not_found", "no such endpoint");
  if (!authorized(req)) throw ApiError(401, "unauthorized", "missing or invalid API key");

  std::smatch m;
  if (req.path == "/v1/generate") {
    if (req.method != "POST") throw method_not_allowed();
    return {200, generate(parse_body(req.body)).dump()};
  }
  if (req.path == "/v1/reference") {
    if (req.method != "GET") throw method_not_allowed();
    return {200, reference(req.query).dump()};
  }
  if (req.path == "/v1/generations") {
    if (req.method == "POST") {
      const auto saved = store_->save_generation(store::new_generation_from_json(parse_body(req.body)));
      return {201, store::to_json(saved).dump()};
    }
    if (req.method == "GET") {
      const std::size_t page = parse_count(req.query, "page", 1);
      const std::size_t size = parse_count(req.query, "page_size", 20);
      if (page == 0 || size == 0 || size > config_.max_page_size) {
        throw unprocessable("page must be >= 1 and page_size in 1.." + std::to_string(config_.max_page_size));
      }
      const auto p = store_->list(page, size);
      json items = json::array();
      for (const auto& g : p.items) items.push_back(store::to_json(g));
      return {200, json{{"items", items}, {"page", p.page}, {"page_size", p.page_size}, {"total", p.total}}.dump()};
    }
    throw method_not_allowed();
  }
  if (std::regex_match(req.path, m, rating_re)) {
    if (req.method != "POST") throw method_not_allowed();
    const auto id = parse_id(m[1]);
    const auto body = parse_body(req.body);
    if (!body.is_object() || !body.contains("value") || !body["value"].is_number_integer()) {
      throw unprocessable("'value' must be an integer from 1 to 5");
    }
    const auto v = body["value"].get<std::int64_t>();
    const int value = v < -1000 || v > 1000 ? 0 : static_cast<int>(v);
    return {201, store::to_json(store_->add_rating(id, value)).dump()};
  }
  if (std::regex_match(req.path, m, comments_re)) {
    if (req.method != "POST") throw method_not_allowed();
    const auto id = parse_id(m[1]);
    const auto body = parse_body(req.body);
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
      throw unprocessable("'text' must be a string");
    }
    return {201, store::to_json(store_->add_comment(id, body["text"].get<std::string>())).dump()};
  }
  if (std::regex_match(req.path, m, generation_re)) {
    if (req.method != "GET") throw method_not_allowed();
    return {200, store::to_json(store_->get(parse_id(m[1]))).dump()};
  }
  throw ApiError(404, "not_found", "no such endpoint");
}

void Service::mount(httplib::Server& server) const {
  server.set_read_timeout(config_.timeout_seconds, 0);
  server.set_write_timeout(config_.timeout_seconds, 0);
  auto handler = [this](const httplib::Request& in, httplib::Response& out) {
    HttpRequest req;
    req.method = in.method;
    req.path = in.path;
    for (const auto& [k, v] : in.params) req.query[k] = v;
    for (const auto& [k, v] : in.headers) req.headers[k] = v;
    req.body = in.body;
    const HttpResponse res = handle(req);
    out.status = res.status;
    out.set_content(res.body, "application/json");
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Put(".*", handler);
  server.Delete(".*", handler);
  server.Patch(".*", handler);
}

Server::Server(const Service& service) : http_(std::make_unique<httplib::Server>()) { service.mount(*http_); }

Server::~Server() { stop(); }

bool Server::listen(const std::string& host, int port, const std::function<void(int)>& on_ready) {
  int bound = port;
  if (port == 0) {
    bound = http_->bind_to_any_port(host);
  } else if (!http_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) return false;
  if (on_ready) on_ready(bound);
  return http_->listen_after_bind();
}

void Server::stop() {
  if (http_) http_->stop();
}

}  // namespace recipegpt::service
