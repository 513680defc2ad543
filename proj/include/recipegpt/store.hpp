#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "recipegpt/evaluation.hpp"
#include "recipegpt/fieldcodec.hpp"

namespace recipegpt::store {

struct SamplingSnapshot {
  int k = 3;
  int max_new_tokens = 384;
  std::uint64_t seed = 0;
  friend bool operator==(const SamplingSnapshot&, const SamplingSnapshot&) = default;
};

struct Rating {
  std::uint64_t generation_id = 0;
  int value = 0;
  std::string created_at;
  friend bool operator==(const Rating&, const Rating&) = default;
};

struct Comment {
  std::uint64_t generation_id = 0;
  std::string text;
  std::string created_at;
  friend bool operator==(const Comment&, const Comment&) = default;
};

/// What a client submits; the store assigns id and created_at.
struct NewGeneration {
  metrics::Mode mode = metrics::Mode::kInstructions;
  codec::FieldContext context;
  std::string output;
  SamplingSnapshot sampling;
  nlohmann::json report;  // EvaluationReport JSON object, or null
  std::optional<std::string> reference_id;
};

struct SavedGeneration {
  std::uint64_t id = 0;
  std::string created_at;
  metrics::Mode mode = metrics::Mode::kInstructions;
  codec::FieldContext context;
  std::string output;
  SamplingSnapshot sampling;
  nlohmann::json report;
  std::optional<std::string> reference_id;
  std::vector<Rating> ratings;
  std::vector<Comment> comments;

  friend bool operator==(const SavedGeneration&, const SavedGeneration&) = default;
};

nlohmann::json to_json(const SavedGeneration& g);
nlohmann::json to_json(const Rating& r);
nlohmann::json to_json(const Comment& c);
/// Throws kInvalidRecord on schema violations.
NewGeneration new_generation_from_json(const nlohmann::json& j);

/// Context must hold the title and the non-target field, never the target.
/// Throws kInvalidRecord.
void validate_mode_context(metrics::Mode mode, const codec::FieldContext& context);

inline constexpr std::size_t kMaxCommentCodePoints = 4000;

struct Page {
  std::vector<SavedGeneration> items;
  std::size_t page = 1;
  std::size_t page_size = 0;
  std::size_t total = 0;
};

enum class EntryType : std::uint8_t { kGeneration = 1, kRating = 2, kComment = 3 };

/// Append-only log of length-prefixed, checksummed JSON entries:
///   u32 payload length (LE) | u8 type | u32 crc32 of type+payload (LE) | payload
/// Opening replays the log into memory and cuts off a torn final entry; a bad
/// entry with data after it throws kFormat.
/// Each acknowledged write has been fsync'ed.
class Store {
 public:
  using Clock = std::function<std::string()>;

  explicit Store(std::string path, Clock clock = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Throws kInvalidRecord.
  SavedGeneration save_generation(const NewGeneration& generation);
  /// Throws kNotFound.
  SavedGeneration get(std::uint64_t id) const;
  /// 1-based pages, newest first by (created_at, id). Throws kInvalidArgument for page 0 or page_size 0.
  Page list(std::size_t page, std::size_t page_size) const;
  /// Throws kNotFound, kOutOfRange (value outside 1..5).
  Rating add_rating(std::uint64_t id, int value);
  /// Throws kNotFound, kEmptyComment, kOutOfRange (longer than 4000 code points).
  Comment add_comment(std::uint64_t id, const std::string& text);

  std::size_t size() const;
  /// Bytes dropped from the tail during recovery.
  std::size_t recovered_tail_bytes() const { return dropped_tail_; }
  const std::string& path() const { return path_; }

 private:
  void replay();
  void append(EntryType type, const std::string& payload);

  std::string path_;
  Clock clock_;
  int fd_ = -1;
  std::size_t dropped_tail_ = 0;
  std::uint64_t next_id_ = 1;
  std::map<std::uint64_t, SavedGeneration> generations_;
  mutable std::shared_mutex data_mu_;
  std::mutex write_mu_;
};

/// "2026-01-31T12:00:00.123Z"
std::string utc_now_iso();

}  // namespace recipegpt::store
