#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "recipegpt/bpe.hpp"
#include "recipegpt/corpus.hpp"
#include "recipegpt/model.hpp"
#include "recipegpt/retrieval.hpp"
#include "recipegpt/store.hpp"

namespace httplib {
class Server;
}

namespace recipegpt::service {

struct ServiceConfig {
  std::string api_key;  // required; compared against the X-API-Key header
  int default_k = 3;
  int max_k = 30;
  int max_new_tokens_cap = 384;
  int timeout_seconds = 30;
  std::size_t max_page_size = 100;
};

inline constexpr const char* kApiKeyHeader = "X-API-Key";

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // names matched case-insensitively
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

/// HTTP-level failure carrying a machine-readable code.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

/// Routes the versioned JSON API. Model, vocabulary and index are swapped in
/// as immutable snapshots, so handlers run concurrently.
class Service {
 public:
  Service(ServiceConfig config, std::shared_ptr<store::Store> store);

  /// Throws kVocabMismatch if the model and vocabulary disagree.
  void set_model(std::shared_ptr<const lm::Model> model, std::shared_ptr<const codec::BpeVocab> vocab);
  /// Builds the index unless a matching one is supplied.
  void set_corpus(std::vector<corpus::RecipeRecord> records,
                  std::optional<retrieval::InvertedIndex> index = std::nullopt);

  HttpResponse handle(const HttpRequest& request) const;

  // Typed handlers; throw ApiError.
  nlohmann::json generate(const nlohmann::json& request) const;
  nlohmann::json reference(const std::map<std::string, std::string>& query) const;
  nlohmann::json health() const;

  /// Registers every route on `server` and applies the request timeouts.
  void mount(httplib::Server& server) const;

 private:
  struct Corpus {
    std::vector<corpus::RecipeRecord> records;
    std::map<std::string, std::size_t> by_id;
    retrieval::InvertedIndex index;
  };
  struct ModelBundle {
    std::shared_ptr<const lm::Model> model;
    std::shared_ptr<const codec::BpeVocab> vocab;
  };

  std::shared_ptr<const Corpus> corpus_snapshot() const;
  std::shared_ptr<const ModelBundle> model_snapshot() const;
  HttpResponse route(const HttpRequest& request) const;
  bool authorized(const HttpRequest& request) const;

  ServiceConfig config_;
  std::shared_ptr<store::Store> store_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Corpus> corpus_;
  std::shared_ptr<const ModelBundle> model_;
};

/// JSON form of a reference recipe: id, title, ingredient lines, steps, instructions text.
nlohmann::json recipe_to_json(const corpus::RecipeRecord& record);

/// Blocking HTTP server on host:port (port 0 picks a free port). `on_ready`
/// receives the bound port. Returns after stop() or on bind failure (false).
class Server {
 public:
  explicit Server(const Service& service);
  ~Server();
  bool listen(const std::string& host, int port, const std::function<void(int)>& on_ready = {});
  void stop();

 private:
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace recipegpt::service
