#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "recipegpt/error.hpp"
#include "recipegpt/store.hpp"
#include "support.hpp"

using namespace recipegpt;
using namespace recipegpt::store;
using codec::FieldKind;

namespace {

NewGeneration sample(int i) {
  NewGeneration g;
  g.mode = metrics::Mode::kInstructions;
  g.context = {{FieldKind::kTitle, "Soup #" + std::to_string(i)},
               {FieldKind::kIngredients, "tomatoes\nonion\nsalt — to taste ✓"}};
  g.output = "Simmer everything.\nServe \"hot\".";
  g.sampling = SamplingSnapshot{3, 128, 1000u + static_cast<unsigned>(i)};
  g.report = nlohmann::json{{"bleu", 0.25}, {"nted", nullptr}};
  g.reference_id = "r" + std::to_string(i);
  return g;
}

Store::Clock counter_clock() {
  auto n = std::make_shared<int>(0);
  return [n] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "2026-01-01T00:00:%02d.000Z", (*n)++ % 60);
    return std::string(buf);
  };
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

}  // namespace

TEST(Store, SaveGetRoundTrip) {
  testing_support::TempDir dir("store");
  Store s(dir.file("log"));
  const auto saved = s.save_generation(sample(1));
  EXPECT_EQ(saved.id, 1u);
  const auto got = s.get(saved.id);
  EXPECT_EQ(got, saved);
  EXPECT_EQ(got.context, sample(1).context);
  EXPECT_EQ(got.output, sample(1).output);
  EXPECT_EQ(got.sampling, sample(1).sampling);
  EXPECT_EQ(got.report, sample(1).report);
  EXPECT_EQ(got.reference_id, sample(1).reference_id);
  EXPECT_EQ(got.created_at.size(), 24u);
  EXPECT_EQ(code_of([&] { s.get(99); }), ErrorCode::kNotFound);
}

TEST(Store, RatingsAndComments) {
  testing_support::TempDir dir("store");
  Store s(dir.file("log"));
  const auto id = s.save_generation(sample(1)).id;
  EXPECT_EQ(s.add_rating(id, 5).value, 5);
  EXPECT_EQ(s.add_rating(id, 1).value, 1);
  EXPECT_EQ(code_of([&] { s.add_rating(id, 6); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(code_of([&] { s.add_rating(id, 0); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(code_of([&] { s.add_rating(42, 3); }), ErrorCode::kNotFound);
  EXPECT_EQ(s.add_comment(id, "tasty").text, "tasty");
  EXPECT_EQ(code_of([&] { s.add_comment(42, "x"); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { s.add_comment(id, "  \n"); }), ErrorCode::kEmptyComment);
  // the limit counts code points, not bytes
  std::string at_limit;
  for (std::size_t i = 0; i < kMaxCommentCodePoints; ++i) at_limit += "é";
  EXPECT_NO_THROW(s.add_comment(id, at_limit));
  EXPECT_EQ(code_of([&] { s.add_comment(id, at_limit + "a"); }), ErrorCode::kOutOfRange);
  const auto g = s.get(id);
  ASSERT_EQ(g.ratings.size(), 2u);
  ASSERT_EQ(g.comments.size(), 2u);
  EXPECT_EQ(g.comments[1].text, at_limit);
}

TEST(Store, Pagination) {
  testing_support::TempDir dir("store");
  Store s(dir.file("log"), counter_clock());
  for (int i = 0; i < 25; ++i) s.save_generation(sample(i));
  std::vector<std::size_t> sizes;
  std::vector<std::uint64_t> ids;
  for (std::size_t p = 1; p <= 4; ++p) {
    const auto page = s.list(p, 10);
    EXPECT_EQ(page.total, 25u);
    sizes.push_back(page.items.size());
    for (const auto& g : page.items) ids.push_back(g.id);
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{10, 10, 5, 0}));
  for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(ids[i], 25 - i);
  EXPECT_EQ(code_of([&] { s.list(0, 10); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { s.list(1, 0); }), ErrorCode::kInvalidArgument);
}

TEST(Store, NewestFirstByTimestamp) {
  testing_support::TempDir dir("store");
  std::vector<std::string> stamps{"2026-01-01T00:00:05.000Z", "2026-01-01T00:00:01.000Z", "2026-01-01T00:00:09.000Z"};
  std::size_t next = 0;
  Store s(dir.file("log"), [&] { return stamps[next++ % stamps.size()]; });
  for (int i = 0; i < 3; ++i) s.save_generation(sample(i));
  const auto page = s.list(1, 10);
  EXPECT_EQ(page.items[0].id, 3u);
  EXPECT_EQ(page.items[1].id, 1u);
  EXPECT_EQ(page.items[2].id, 2u);
}

TEST(Store, DurableAcrossReopen) {
  testing_support::TempDir dir("store");
  std::vector<SavedGeneration> before;
  {
    Store s(dir.file("log"));
    for (int i = 0; i < 5; ++i) s.save_generation(sample(i));
    s.add_rating(2, 4);
    s.add_comment(3, "needs salt");
    for (std::uint64_t id = 1; id <= 5; ++id) before.push_back(s.get(id));
  }
  Store s(dir.file("log"));
  EXPECT_EQ(s.size(), 5u);
  EXPECT_EQ(s.recovered_tail_bytes(), 0u);
  for (const auto& g : before) EXPECT_EQ(s.get(g.id), g);
  EXPECT_EQ(s.save_generation(sample(9)).id, 6u);
}

TEST(Store, TornTailRecovered) {
  testing_support::TempDir dir("store");
  {
    Store s(dir.file("log"));
    s.save_generation(sample(1));
    s.save_generation(sample(2));
  }
  const auto full = std::filesystem::file_size(dir.file("log"));
  {
    Store s(dir.file("log"));
    s.add_comment(2, "this entry will be torn");
  }
  const auto with_comment = std::filesystem::file_size(dir.file("log"));
  std::filesystem::resize_file(dir.file("log"), with_comment - 5);
  {
    Store s(dir.file("log"));
    EXPECT_EQ(s.size(), 2u);
    EXPECT_TRUE(s.get(2).comments.empty());
    EXPECT_EQ(s.recovered_tail_bytes(), with_comment - 5 - full);
    s.add_comment(2, "after recovery");
  }
  Store s(dir.file("log"));
  ASSERT_EQ(s.get(2).comments.size(), 1u);
  EXPECT_EQ(s.get(2).comments[0].text, "after recovery");
}

TEST(Store, CorruptEntryRejected) {
  testing_support::TempDir dir("store");
  {
    Store s(dir.file("log"));
    s.save_generation(sample(1));
    s.save_generation(sample(2));
  }
  auto bytes = read_file(dir.file("log"));
  bytes[20] ^= 0x01;  // inside the first payload
  {
    std::ofstream out(dir.file("log"), std::ios::binary | std::ios::trunc);
    out << bytes;
  }
  EXPECT_EQ(code_of([&] { Store s(dir.file("log")); }), ErrorCode::kFormat);

  // the same damage in the final entry reads as a torn write
  bytes[20] ^= 0x01;
  bytes[bytes.size() - 3] ^= 0x01;
  {
    std::ofstream out(dir.file("log"), std::ios::binary | std::ios::trunc);
    out << bytes;
  }
  Store s(dir.file("log"));
  EXPECT_EQ(s.size(), 1u);
  EXPECT_GT(s.recovered_tail_bytes(), 0u);
}

TEST(Store, SchemaValidation) {
  testing_support::TempDir dir("store");
  Store s(dir.file("log"));
  auto g = sample(1);
  g.context[FieldKind::kInstructions] = "target present";
  EXPECT_EQ(code_of([&] { s.save_generation(g); }), ErrorCode::kInvalidRecord);
  g = sample(1);
  g.context.erase(FieldKind::kIngredients);
  EXPECT_EQ(code_of([&] { s.save_generation(g); }), ErrorCode::kInvalidRecord);
  g = sample(1);
  g.mode = metrics::Mode::kIngredients;
  EXPECT_EQ(code_of([&] { s.save_generation(g); }), ErrorCode::kInvalidRecord);
  g.context = {{FieldKind::kTitle, "T"}, {FieldKind::kInstructions, "Mix."}};
  EXPECT_NO_THROW(s.save_generation(g));
  EXPECT_EQ(code_of([] { new_generation_from_json(nlohmann::json{{"mode", "dessert"}}); }), ErrorCode::kInvalidRecord);
}

TEST(Store, JsonRoundTrip) {
  testing_support::TempDir dir("store");
  Store s(dir.file("log"));
  const auto saved = s.save_generation(sample(3));
  const auto j = to_json(saved);
  const auto back = new_generation_from_json(j);
  EXPECT_EQ(back.context, saved.context);
  EXPECT_EQ(back.output, saved.output);
  EXPECT_EQ(back.sampling, saved.sampling);
  EXPECT_EQ(back.report, saved.report);
  EXPECT_EQ(back.reference_id, saved.reference_id);
}

TEST(Store, ConcurrentWritersGetUniqueIds) {
  testing_support::TempDir dir("store");
  Store s(dir.file("log"));
  std::vector<std::thread> threads;
  std::vector<std::vector<std::uint64_t>> ids(4);
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 15; ++i) {
        const auto id = s.save_generation(sample(i)).id;
        ids[static_cast<std::size_t>(t)].push_back(id);
        s.add_rating(id, 1 + i % 5);
        (void)s.list(1, 5);
      }
    });
  }
  for (auto& th : threads) th.join();
  std::set<std::uint64_t> all;
  for (const auto& v : ids) {
    for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LT(v[i - 1], v[i]);
    all.insert(v.begin(), v.end());
  }
  EXPECT_EQ(all.size(), 60u);
  EXPECT_EQ(*all.rbegin(), 60u);
  Store reopened(dir.file("log"));
  EXPECT_EQ(reopened.size(), 60u);
  for (auto id : all) EXPECT_EQ(reopened.get(id).ratings.size(), 1u);
}
