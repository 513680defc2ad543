#include "recipegpt/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstring>

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <zlib.h>

#include "recipegpt/error.hpp"

namespace recipegpt::store {
namespace {

constexpr std::size_t kHeaderSize = 9;
constexpr std::uint32_t kMaxPayload = 64u << 20;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint32_t entry_crc(std::uint8_t type, std::string_view payload) {
  uLong crc = crc32(0L, &type, 1);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size()));
  return static_cast<std::uint32_t>(crc);
}

std::size_t utf8_code_points(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

nlohmann::json context_to_json(const codec::FieldContext& ctx) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : ctx) j[std::string(codec::field_name(k))] = v;
  return j;
}

codec::FieldContext context_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidRecord, "context must be an object");
  codec::FieldContext ctx;
  for (const auto& [k, v] : j.items()) {
    auto kind = codec::parse_field_name(k);
    if (!kind) throw Error(ErrorCode::kInvalidRecord, "unknown context field '" + k + "'");
    if (!v.is_string()) throw Error(ErrorCode::kInvalidRecord, "context field '" + k + "' must be a string");
    ctx[*kind] = v.get<std::string>();
  }
  return ctx;
}

SavedGeneration generation_from_json(const nlohmann::json& j) {
  SavedGeneration g;
  g.id = j.at("id").get<std::uint64_t>();
  g.created_at = j.at("created_at").get<std::string>();
  const NewGeneration n = new_generation_from_json(j);
  g.mode = n.mode;
  g.context = n.context;
  g.output = n.output;
  g.sampling = n.sampling;
  g.report = n.report;
  g.reference_id = n.reference_id;
  return g;
}

}  // namespace

std::string utc_now_iso() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                     tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

void validate_mode_context(metrics::Mode mode, const codec::FieldContext& context) {
  const auto target = metrics::target_field(mode);
  if (context.count(target)) {
    throw Error(ErrorCode::kInvalidRecord, "mode '" + std::string(metrics::to_string(mode)) +
                                               "' must not include the '" + std::string(codec::field_name(target)) +
                                               "' field");
  }
  for (auto f : metrics::context_fields(mode)) {
    if (!context.count(f)) {
      throw Error(ErrorCode::kInvalidRecord, "mode '" + std::string(metrics::to_string(mode)) + "' requires the '" +
                                                 std::string(codec::field_name(f)) + "' field");
    }
  }
}

nlohmann::json to_json(const Rating& r) {
  return {{"generation_id", r.generation_id}, {"value", r.value}, {"created_at", r.created_at}};
}

nlohmann::json to_json(const Comment& c) {
  return {{"generation_id", c.generation_id}, {"text", c.text}, {"created_at", c.created_at}};
}

nlohmann::json to_json(const SavedGeneration& g) {
  nlohmann::json j;
  j["id"] = g.id;
  j["created_at"] = g.created_at;
  j["mode"] = std::string(metrics::to_string(g.mode));
  j["context"] = context_to_json(g.context);
  j["output"] = g.output;
  j["sampling"] = {{"k", g.sampling.k}, {"max_new_tokens", g.sampling.max_new_tokens}, {"seed", g.sampling.seed}};
  j["report"] = g.report;
  j["reference_id"] = g.reference_id ? nlohmann::json(*g.reference_id) : nlohmann::json(nullptr);
  j["ratings"] = nlohmann::json::array();
  for (const auto& r : g.ratings) j["ratings"].push_back(to_json(r));
  j["comments"] = nlohmann::json::array();
  for (const auto& c : g.comments) j["comments"].push_back(to_json(c));
  return j;
}

NewGeneration new_generation_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& m) { return Error(ErrorCode::kInvalidRecord, m); };
  if (!j.is_object()) throw fail("generation must be a JSON object");
  NewGeneration n;
  if (!j.contains("mode") || !j["mode"].is_string()) throw fail("'mode' must be a string");
  const auto mode = metrics::parse_mode(j["mode"].get<std::string>());
  if (!mode) throw fail("'mode' must be 'instructions' or 'ingredients'");
  n.mode = *mode;
  if (!j.contains("context")) throw fail("'context' is required");
  n.context = context_from_json(j["context"]);
  validate_mode_context(n.mode, n.context);
  if (!j.contains("output") || !j["output"].is_string()) throw fail("'output' must be a string");
  n.output = j["output"].get<std::string>();
  if (j.contains("sampling")) {
    const auto& s = j["sampling"];
    if (!s.is_object()) throw fail("'sampling' must be an object");
    auto int_field = [&](const char* name, auto& dst) {
      if (!s.contains(name)) return;
      if (!s[name].is_number_integer()) throw fail(std::string("'sampling.") + name + "' must be an integer");
      dst = s[name].get<std::remove_reference_t<decltype(dst)>>();
    };
    int_field("k", n.sampling.k);
    int_field("max_new_tokens", n.sampling.max_new_tokens);
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned() && !(s["seed"].is_number_integer() && s["seed"].get<std::int64_t>() >= 0)) {
        throw fail("'sampling.seed' must be a non-negative integer");
      }
      n.sampling.seed = s["seed"].get<std::uint64_t>();
    }
  }
  if (j.contains("report")) {
    if (!j["report"].is_object() && !j["report"].is_null()) throw fail("'report' must be an object or null");
    n.report = j["report"];
  }
  if (j.contains("reference_id") && !j["reference_id"].is_null()) {
    if (!j["reference_id"].is_string()) throw fail("'reference_id' must be a string");
    n.reference_id = j["reference_id"].get<std::string>();
  }
  return n;
}

Store::Store(std::string path, Clock clock) : path_(std::move(path)), clock_(std::move(clock)) {
  if (!clock_) clock_ = utc_now_iso;
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open store log " + path_ + ": " + std::strerror(errno));
  replay();
}

Store::~Store() {
  if (fd_ >= 0) ::close(fd_);
}

void Store::replay() {
  const std::string data = read_file(path_);
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  std::size_t pos = 0;
  while (pos < data.size()) {
    if (data.size() - pos < kHeaderSize) break;
    const std::uint32_t len = get_u32(bytes + pos);
    const std::uint8_t type = bytes[pos + 4];
    const std::uint32_t crc = get_u32(bytes + pos + 5);
    if (len > kMaxPayload || data.size() - pos - kHeaderSize < len) break;
    const std::string_view payload(data.data() + pos + kHeaderSize, len);
    if (entry_crc(type, payload) != crc) {
      // Only the last entry can be a torn write; anything after it means damage.
      if (pos + kHeaderSize + len < data.size()) {
        throw Error(ErrorCode::kFormat, fmt::format("{}: checksum mismatch at offset {}", path_, pos));
      }
      break;
    }
    try {
      const auto j = nlohmann::json::parse(payload);
      switch (static_cast<EntryType>(type)) {
        case EntryType::kGeneration: {
          SavedGeneration g = generation_from_json(j);
          next_id_ = std::max(next_id_, g.id + 1);
          generations_[g.id] = std::move(g);
          break;
        }
        case EntryType::kRating: {
          Rating r{j.at("generation_id").get<std::uint64_t>(), j.at("value").get<int>(),
                   j.at("created_at").get<std::string>()};
          generations_.at(r.generation_id).ratings.push_back(std::move(r));
          break;
        }
        case EntryType::kComment: {
          Comment c{j.at("generation_id").get<std::uint64_t>(), j.at("text").get<std::string>(),
                    j.at("created_at").get<std::string>()};
          generations_.at(c.generation_id).comments.push_back(std::move(c));
          break;
        }
        default:
          throw Error(ErrorCode::kFormat, "unknown entry type " + std::to_string(type));
      }
    } catch (const std::exception& e) {
      // A checksummed entry we cannot apply is a bug or tampering, not a torn write.
      throw Error(ErrorCode::kFormat, fmt::format("{}: bad entry at offset {}: {}", path_, pos, e.what()));
    }
    pos += kHeaderSize + len;
  }
  if (pos < data.size()) {
    dropped_tail_ = data.size() - pos;
    spdlog::warn("{}: dropping {} bytes of incomplete log tail", path_, dropped_tail_);
    if (::ftruncate(fd_, static_cast<off_t>(pos)) != 0 || ::fsync(fd_) != 0) {
      throw Error(ErrorCode::kIo, "cannot truncate " + path_ + ": " + std::strerror(errno));
    }
  }
  if (::lseek(fd_, 0, SEEK_END) < 0) throw Error(ErrorCode::kIo, "cannot seek " + path_);
}

void Store::append(EntryType type, const std::string& payload) {
  std::string buf;
  buf.reserve(kHeaderSize + payload.size());
  put_u32(buf, static_cast<std::uint32_t>(payload.size()));
  buf.push_back(static_cast<char>(type));
  put_u32(buf, entry_crc(static_cast<std::uint8_t>(type), payload));
  buf += payload;
  const off_t start = ::lseek(fd_, 0, SEEK_END);
  std::size_t written = 0;
  while (written < buf.size()) {
    const ssize_t n = ::write(fd_, buf.data() + written, buf.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string err = std::strerror(errno);
      if (start >= 0 && ::ftruncate(fd_, start) != 0) spdlog::error("{}: cannot roll back partial write", path_);
      throw Error(ErrorCode::kIo, "write to " + path_ + " failed: " + err);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw Error(ErrorCode::kIo, "fsync of " + path_ + " failed: " + std::strerror(errno));
}

SavedGeneration Store::save_generation(const NewGeneration& n) {
  validate_mode_context(n.mode, n.context);
  if (!n.report.is_null() && !n.report.is_object()) throw Error(ErrorCode::kInvalidRecord, "report must be an object");
  std::lock_guard wl(write_mu_);
  SavedGeneration g;
  {
    std::shared_lock rl(data_mu_);
    g.id = next_id_;
  }
  g.created_at = clock_();
  g.mode = n.mode;
  g.context = n.context;
  g.output = n.output;
  g.sampling = n.sampling;
  g.report = n.report;
  g.reference_id = n.reference_id;
  append(EntryType::kGeneration, to_json(g).dump());
  std::unique_lock ul(data_mu_);
  next_id_ = g.id + 1;
  generations_[g.id] = g;
  return g;
}

SavedGeneration Store::get(std::uint64_t id) const {
  std::shared_lock rl(data_mu_);
  auto it = generations_.find(id);
  if (it == generations_.end()) throw Error(ErrorCode::kNotFound, "generation " + std::to_string(id) + " not found");
  return it->second;
}

Page Store::list(std::size_t page, std::size_t page_size) const {
  if (page == 0 || page_size == 0) throw Error(ErrorCode::kInvalidArgument, "page and page_size start at 1");
  std::shared_lock rl(data_mu_);
  std::vector<const SavedGeneration*> all;
  for (const auto& [id, g] : generations_) all.push_back(&g);
  std::sort(all.begin(), all.end(), [](const SavedGeneration* a, const SavedGeneration* b) {
    return a->created_at != b->created_at ? a->created_at > b->created_at : a->id > b->id;
  });
  Page p;
  p.page = page;
  p.page_size = page_size;
  p.total = all.size();
  const std::size_t begin = (page - 1) * page_size;
  for (std::size_t i = begin; i < all.size() && i < begin + page_size; ++i) p.items.push_back(*all[i]);
  return p;
}

Rating Store::add_rating(std::uint64_t id, int value) {
  std::lock_guard wl(write_mu_);
  {
    std::shared_lock rl(data_mu_);
    if (!generations_.count(id)) throw Error(ErrorCode::kNotFound, "generation " + std::to_string(id) + " not found");
  }
  if (value < 1 || value > 5) throw Error(ErrorCode::kOutOfRange, "rating must be between 1 and 5");
  Rating r{id, value, clock_()};
  append(EntryType::kRating, to_json(r).dump());
  std::unique_lock ul(data_mu_);
  generations_[id].ratings.push_back(r);
  return r;
}

Comment Store::add_comment(std::uint64_t id, const std::string& text) {
  std::lock_guard wl(write_mu_);
  {
    std::shared_lock rl(data_mu_);
    if (!generations_.count(id)) throw Error(ErrorCode::kNotFound, "generation " + std::to_string(id) + " not found");
  }
  if (is_blank(text)) throw Error(ErrorCode::kEmptyComment, "comment is empty");
  if (utf8_code_points(text) > kMaxCommentCodePoints) {
    throw Error(ErrorCode::kOutOfRange, "comment exceeds 4000 characters");
  }
  Comment c{id, text, clock_()};
  append(EntryType::kComment, to_json(c).dump());
  std::unique_lock ul(data_mu_);
  generations_[id].comments.push_back(c);
  return c;
}

std::size_t Store::size() const {
  std::shared_lock rl(data_mu_);
  return generations_.size();
}

}  // namespace recipegpt::store
