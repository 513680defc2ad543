#include <gtest/gtest.h>

#include <future>
#include <set>
#include <thread>

#include "recipegpt/service.hpp"
#include "recipegpt/textnorm.hpp"
#include "support.hpp"

// after the Eigen headers: resolv.h, pulled in by httplib, defines _res
#include "httplib.h"

using namespace recipegpt;
using namespace recipegpt::service;
using nlohmann::json;

namespace {

const char* kKey = "test-key";

/// Always predicts `word` (a single BPE token), so generations are predictable.
std::shared_ptr<lm::Model> constant_model(const std::string& word) {
  const auto& vocab = testing_support::bundled_vocab();
  const auto ids = vocab.encode(word);
  EXPECT_EQ(ids.size(), 1u) << word;
  auto m = std::make_shared<lm::Model>(lm::ModelConfig{1, 1, 8, 512, static_cast<int>(vocab.size())});
  m->params()[m->layout().lnf_b] = 100.0f;
  m->params()[m->layout().wte + static_cast<std::size_t>(ids[0]) * 8] = 1.0f;
  return m;
}

struct Fixture {
  testing_support::TempDir dir{"service"};
  std::shared_ptr<store::Store> store = std::make_shared<store::Store>(dir.file("log"));
  Service svc{ServiceConfig{kKey}, store};

  explicit Fixture(bool with_model = true) {
    svc.set_corpus(testing_support::bundled_corpus().records);
    if (with_model) {
      svc.set_model(constant_model(" tomato"),
                    std::make_shared<codec::BpeVocab>(testing_support::bundled_vocab()));
    }
  }

  HttpResponse call(const std::string& method, const std::string& path, const std::string& body = "",
                    std::map<std::string, std::string> query = {}, const char* key = kKey) {
    HttpRequest r;
    r.method = method;
    r.path = path;
    r.body = body;
    r.query = std::move(query);
    if (key) r.headers["x-api-key"] = key;
    return svc.handle(r);
  }
};

json instructions_request() {
  return json{{"mode", "instructions"},
              {"title", "Tomato Soup"},
              {"ingredients", {"4 ripe tomatoes, chopped", "1 onion", "2 cups broth"}},
              {"k", 3},
              {"seed", 17},
              {"max_new_tokens", 12}};
}

std::string error_code(const HttpResponse& r) { return json::parse(r.body)["error"]["code"]; }

}  // namespace

TEST(Service, RequiresKeyConfigured) { EXPECT_THROW(Service(ServiceConfig{}, nullptr), std::exception); }

TEST(Service, Health) {
  Fixture before(false);
  auto h = json::parse(before.call("GET", "/v1/health", "", {}, nullptr).body);
  EXPECT_EQ(h["status"], "ok");
  EXPECT_EQ(h["model_loaded"], false);
  EXPECT_EQ(h["corpus_size"], testing_support::bundled_corpus().records.size());
  Fixture after;
  h = json::parse(after.call("GET", "/v1/health").body);
  EXPECT_EQ(h["model_loaded"], true);
  EXPECT_EQ(h["vocab_hash"], testing_support::bundled_vocab().hash());
}

TEST(Service, AuthAndRouting) {
  Fixture f;
  EXPECT_EQ(f.call("POST", "/v1/generate", instructions_request().dump(), {}, nullptr).status, 401);
  auto r = f.call("POST", "/v1/generate", instructions_request().dump(), {}, "wrong");
  EXPECT_EQ(r.status, 401);
  EXPECT_EQ(error_code(r), "unauthorized");
  EXPECT_EQ(f.call("GET", "/v1/nope").status, 404);
  EXPECT_EQ(f.call("GET", "/v1/generate").status, 405);
  r = f.call("POST", "/v1/generate", "{not json");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(error_code(r), "invalid_json");
}

TEST(Service, GenerateValidation) {
  Fixture f;
  auto expect_422 = [&](json req) {
    const auto r = f.call("POST", "/v1/generate", req.dump());
    EXPECT_EQ(r.status, 422) << req.dump() << " " << r.body;
    const auto body = json::parse(r.body);
    EXPECT_TRUE(body["error"]["code"].is_string());
    EXPECT_TRUE(body["error"]["message"].is_string());
  };
  auto req = instructions_request();
  req["instructions"] = "Simmer.";
  expect_422(req);
  req = instructions_request();
  req.erase("ingredients");
  expect_422(req);
  req = instructions_request();
  req["k"] = 0;
  expect_422(req);
  req["k"] = 31;
  expect_422(req);
  req = instructions_request();
  req["mode"] = "title";
  expect_422(req);
  req = instructions_request();
  req["seed"] = -1;
  expect_422(req);
  expect_422(json{{"mode", "ingredients"}, {"title", "x"}, {"ingredients", {"salt"}}});
  expect_422(json{{"mode", "ingredients"}, {"title", "x"}});
  req = instructions_request();
  req["k"] = 30;
  EXPECT_EQ(f.call("POST", "/v1/generate", req.dump()).status, 200);

  Fixture no_model(false);
  const auto r = no_model.call("POST", "/v1/generate", instructions_request().dump());
  EXPECT_EQ(r.status, 503);
  EXPECT_EQ(error_code(r), "model_not_loaded");
}

TEST(Service, GenerateInstructions) {
  Fixture f;
  const auto r = f.call("POST", "/v1/generate", instructions_request().dump());
  ASSERT_EQ(r.status, 200) << r.body;
  const auto body = json::parse(r.body);
  EXPECT_EQ(body["output"], "tomato tomato tomato tomato tomato tomato tomato tomato tomato tomato tomato tomato");
  EXPECT_EQ(body["truncated"], true);
  EXPECT_EQ(body["sampling"]["k"], 3);
  EXPECT_EQ(body["sampling"]["seed"], 17);
  EXPECT_EQ(body["context"]["ingredients"], "ripe tomatoes\nonion\nbroth");
  ASSERT_FALSE(body["reference"].is_null());
  EXPECT_TRUE(body["reference"]["recipe"]["id"].is_string());
  EXPECT_TRUE(body["report"]["bleu"].is_number());
  EXPECT_TRUE(body["report"]["f1"].is_null());
  EXPECT_GE(body["elapsed_ms"].get<int>(), 0);

  // highlight offsets point at the root noun in the request ingredients and the output
  const std::string ingr_text = "4 ripe tomatoes, chopped\n1 onion\n2 cups broth";
  const std::string output = body["output"];
  ASSERT_FALSE(body["highlights"].empty());
  std::set<std::string> ingr_roots, out_roots;
  for (const auto& h : body["highlights"]) {
    const std::string field = h["field"];
    const std::string& src = field == "ingredients" ? ingr_text : output;
    const std::size_t s = h["start"], e = h["end"];
    EXPECT_EQ(textnorm::lemmatize(textnorm::ascii_lower(src.substr(s, e - s))), h["root_noun"]);
    (field == "ingredients" ? ingr_roots : out_roots).insert(h["root_noun"]);
  }
  EXPECT_EQ(ingr_roots, (std::set<std::string>{"tomato"}));
  EXPECT_EQ(out_roots, ingr_roots);

  // fixed seed gives byte-identical output
  EXPECT_EQ(json::parse(f.call("POST", "/v1/generate", instructions_request().dump()).body)["output"], body["output"]);
}

TEST(Service, GenerateIngredients) {
  Fixture f;
  const json req{{"mode", "ingredients"},
                 {"title", "Tomato Salad"},
                 {"instructions", "Slice the tomatoes. Season with salt."},
                 {"seed", 1},
                 {"max_new_tokens", 3}};
  const auto r = f.call("POST", "/v1/generate", req.dump());
  ASSERT_EQ(r.status, 200) << r.body;
  const auto body = json::parse(r.body);
  EXPECT_TRUE(body["report"]["f1"].is_number());
  EXPECT_TRUE(body["report"]["bleu"].is_null());
  EXPECT_EQ(body["context"]["instructions"], "Slice the tomatoes. Season with salt.");
}

TEST(Service, Reference) {
  Fixture f;
  const auto& rec = testing_support::bundled_corpus().records.at(10);
  auto r = f.call("GET", "/v1/reference", "", {{"title", rec.title}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(json::parse(r.body)["recipe"]["title"], rec.title);
  r = f.call("GET", "/v1/reference", "", {{"title", "zzyzx qwxv"}});
  EXPECT_EQ(r.status, 404);
  r = f.call("GET", "/v1/reference");
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(error_code(r), "empty_query");
}

TEST(Service, AnnotationRoundTrip) {
  Fixture f;
  const auto gen = json::parse(f.call("POST", "/v1/generate", instructions_request().dump()).body);
  json save{{"mode", gen["mode"]},
            {"context", gen["context"]},
            {"output", gen["output"]},
            {"sampling", gen["sampling"]},
            {"report", gen["report"]},
            {"reference_id", gen["reference"]["recipe"]["id"]}};
  auto r = f.call("POST", "/v1/generations", save.dump());
  ASSERT_EQ(r.status, 201) << r.body;
  const auto saved = json::parse(r.body);
  const std::string id = std::to_string(saved["id"].get<std::uint64_t>());

  EXPECT_EQ(f.call("POST", "/v1/generations/" + id + "/rating", json{{"value", 5}}.dump()).status, 201);
  r = f.call("POST", "/v1/generations/" + id + "/rating", json{{"value", 6}}.dump());
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(f.call("POST", "/v1/generations/" + id + "/comments", json{{"text", "lovely"}}.dump()).status, 201);
  EXPECT_EQ(f.call("POST", "/v1/generations/" + id + "/comments", json{{"text", ""}}.dump()).status, 422);
  EXPECT_EQ(f.call("POST", "/v1/generations/999/comments", json{{"text", "x"}}.dump()).status, 404);
  EXPECT_EQ(f.call("GET", "/v1/generations/999").status, 404);
  EXPECT_EQ(f.call("GET", "/v1/generations/abc").status, 404);

  const auto got = json::parse(f.call("GET", "/v1/generations/" + id).body);
  for (const char* k : {"mode", "context", "output", "sampling", "report", "reference_id"}) EXPECT_EQ(got[k], save[k]) << k;
  EXPECT_EQ(got["ratings"][0]["value"], 5);
  EXPECT_EQ(got["comments"][0]["text"], "lovely");

  const auto list = json::parse(f.call("GET", "/v1/generations", "", {{"page", "1"}, {"page_size", "10"}}).body);
  EXPECT_EQ(list["total"], 1);
  EXPECT_EQ(list["items"][0], got);
  EXPECT_EQ(f.call("GET", "/v1/generations", "", {{"page", "0"}}).status, 422);

  json bad = save;
  bad["context"]["instructions"] = "target leaked";
  EXPECT_EQ(f.call("POST", "/v1/generations", bad.dump()).status, 422);
}

TEST(Service, OverHttp) {
  Fixture f;
  Server server(f.svc);
  std::promise<int> ready;
  std::thread t([&] { server.listen("127.0.0.1", 0, [&](int port) { ready.set_value(port); }); });
  const int port = ready.get_future().get();
  httplib::Client cli("127.0.0.1", port);
  httplib::Headers auth{{"X-API-Key", kKey}};

  auto res = cli.Get("/v1/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = cli.Post("/v1/generate", instructions_request().dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 401);
  res = cli.Post("/v1/generate", auth, instructions_request().dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
  res = cli.Get("/v1/reference?title=Tomato%20Soup", auth);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);

  server.stop();
  t.join();
}
