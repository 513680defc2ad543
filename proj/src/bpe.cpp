#include "recipegpt/bpe.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "recipegpt/error.hpp"

namespace recipegpt::codec {
namespace {

constexpr std::string_view kHeader = "recipegpt-bpe 1";

std::string_view field_tag(FieldKind kind) {
  switch (kind) {
    case FieldKind::kTitle: return "title";
    case FieldKind::kIngredients: return "ingr";
    case FieldKind::kInstructions: return "instr";
  }
  return "?";
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_letter(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

int char_class(unsigned char c) {
  if (is_space(c)) return 0;
  if (is_letter(c)) return 1;
  if (is_digit(c)) return 2;
  return 3;
}

std::uint64_t pair_key(TokenId a, TokenId b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

std::string_view field_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::kTitle: return "title";
    case FieldKind::kIngredients: return "ingredients";
    case FieldKind::kInstructions: return "instructions";
  }
  return "?";
}

std::optional<FieldKind> parse_field_name(std::string_view name) {
  for (auto k : kAllFields) {
    if (field_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string start_surface(FieldKind kind) { return "<start-" + std::string(field_tag(kind)) + ">"; }
std::string end_surface(FieldKind kind) { return "<end-" + std::string(field_tag(kind)) + ">"; }

std::vector<std::string_view> pretokenize(std::string_view text) {
  std::vector<std::string_view> out;
  const std::size_t n = text.size();
  auto run_end = [&](std::size_t from, int cls) {
    while (from < n && char_class(static_cast<unsigned char>(text[from])) == cls) ++from;
    return from;
  };
  std::size_t i = 0;
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t j;
    if (c == ' ' && i + 1 < n && !is_space(static_cast<unsigned char>(text[i + 1]))) {
      j = run_end(i + 1, char_class(static_cast<unsigned char>(text[i + 1])));
    } else if (is_space(c)) {
      j = run_end(i, 0);
      // the last ' ' of a longer run prefixes the following word
      if (j < n && text[j - 1] == ' ' && j - 1 > i) --j;
    } else {
      j = run_end(i, char_class(c));
    }
    out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

BpeVocab::BpeVocab(std::vector<std::pair<TokenId, TokenId>> merges) : merges_(std::move(merges)) {
  bytes_.reserve(kByteCount + merges_.size());
  for (int b = 0; b < kByteCount; ++b) bytes_.emplace_back(1, static_cast<char>(b));
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    const auto [a, b] = merges_[r];
    const auto limit = static_cast<TokenId>(bytes_.size());
    if (a < 0 || b < 0 || a >= limit || b >= limit) {
      throw Error(ErrorCode::kFormat, "merge " + std::to_string(r) + " refers to an undefined token");
    }
    ranks_.emplace(pair_key(a, b), static_cast<std::int32_t>(r));
    bytes_.push_back(bytes_[static_cast<std::size_t>(a)] + bytes_[static_cast<std::size_t>(b)]);
  }
}

BpeVocab BpeVocab::train(std::span<const std::string> texts, std::size_t merge_count,
                         std::size_t min_pair_frequency) {
  if (texts.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot train BPE on an empty corpus");
  std::map<std::string, std::int64_t> chunk_counts;
  for (const auto& t : texts) {
    for (auto chunk : pretokenize(t)) ++chunk_counts[std::string(chunk)];
  }
  struct Word {
    std::vector<TokenId> symbols;
    std::int64_t count;
  };
  std::vector<Word> words;
  words.reserve(chunk_counts.size());
  for (const auto& [chunk, count] : chunk_counts) {
    Word w{{}, count};
    for (unsigned char c : chunk) w.symbols.push_back(c);
    words.push_back(std::move(w));
  }

  std::vector<std::string> token_bytes;
  for (int b = 0; b < kByteCount; ++b) token_bytes.emplace_back(1, static_cast<char>(b));
  std::vector<std::pair<TokenId, TokenId>> merges;
  std::unordered_map<std::uint64_t, std::int64_t> pair_counts;

  for (std::size_t m = 0; m < merge_count; ++m) {
    pair_counts.clear();
    for (const auto& w : words) {
      for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) pair_counts[pair_key(w.symbols[i], w.symbols[i + 1])] += w.count;
    }
    std::uint64_t best = 0;
    std::int64_t best_count = 0;
    for (const auto& [key, count] : pair_counts) {
      if (count < best_count) continue;
      if (count == best_count) {
        const auto a = static_cast<TokenId>(key >> 32), b = static_cast<TokenId>(key & 0xffffffffu);
        const auto ba = static_cast<TokenId>(best >> 32), bb = static_cast<TokenId>(best & 0xffffffffu);
        const auto& la = token_bytes[static_cast<std::size_t>(a)];
        const auto& lb = token_bytes[static_cast<std::size_t>(ba)];
        if (la > lb || (la == lb && token_bytes[static_cast<std::size_t>(b)] >= token_bytes[static_cast<std::size_t>(bb)])) continue;
      }
      best = key;
      best_count = count;
    }
    if (best_count < static_cast<std::int64_t>(std::max<std::size_t>(1, min_pair_frequency))) break;

    const auto a = static_cast<TokenId>(best >> 32), b = static_cast<TokenId>(best & 0xffffffffu);
    const auto merged = static_cast<TokenId>(token_bytes.size());
    merges.emplace_back(a, b);
    token_bytes.push_back(token_bytes[static_cast<std::size_t>(a)] + token_bytes[static_cast<std::size_t>(b)]);
    for (auto& w : words) {
      auto& s = w.symbols;
      std::size_t out = 0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i] == a && s[i + 1] == b) {
          s[out++] = merged;
          ++i;
        } else {
          s[out++] = s[i];
        }
      }
      s.resize(out);
    }
  }
  return BpeVocab(std::move(merges));
}

void BpeVocab::encode_chunk(std::string_view chunk, std::vector<TokenId>& out) const {
  std::vector<TokenId> s;
  s.reserve(chunk.size());
  for (unsigned char c : chunk) s.push_back(c);
  while (s.size() > 1) {
    std::int32_t best_rank = -1;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      auto it = ranks_.find(pair_key(s[i], s[i + 1]));
      if (it != ranks_.end() && (best_rank < 0 || it->second < best_rank)) best_rank = it->second;
    }
    if (best_rank < 0) break;
    const auto [a, b] = merges_[static_cast<std::size_t>(best_rank)];
    const TokenId merged = kByteCount + best_rank;
    std::size_t w = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i + 1 < s.size() && s[i] == a && s[i + 1] == b) {
        s[w++] = merged;
        ++i;
      } else {
        s[w++] = s[i];
      }
    }
    s.resize(w);
  }
  out.insert(out.end(), s.begin(), s.end());
}

std::vector<TokenId> BpeVocab::encode(std::string_view text) const {
  std::vector<TokenId> out;
  out.reserve(text.size() / 3 + 1);
  for (auto chunk : pretokenize(text)) encode_chunk(chunk, out);
  return out;
}

std::optional<FieldKind> BpeVocab::start_field(TokenId id) const {
  for (auto k : kAllFields) {
    if (start_id(k) == id) return k;
  }
  return std::nullopt;
}

std::optional<FieldKind> BpeVocab::end_field(TokenId id) const {
  for (auto k : kAllFields) {
    if (end_id(k) == id) return k;
  }
  return std::nullopt;
}

std::string BpeVocab::token_text(TokenId id) const {
  if (id >= 0 && id < special_base()) return bytes_[static_cast<std::size_t>(id)];
  if (id == pad_id()) return std::string(kPadSurface);
  if (auto f = start_field(id)) return start_surface(*f);
  if (auto f = end_field(id)) return end_surface(*f);
  throw Error(ErrorCode::kUnknownId, "token id " + std::to_string(id) + " is outside the vocabulary of " +
                                         std::to_string(size()));
}

std::string BpeVocab::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id >= 0 && id < special_base()) {
      out += bytes_[static_cast<std::size_t>(id)];
    } else {
      out += token_text(id);
    }
  }
  return out;
}

std::string BpeVocab::serialize() const {
  std::ostringstream os;
  os << kHeader << "\n";
  os << "alphabet bytes " << kByteCount << "\n";
  os << "merges " << merges_.size() << "\n";
  for (const auto& [a, b] : merges_) os << a << ' ' << b << "\n";
  os << "special " << kSpecialCount << "\n";
  for (auto k : kAllFields) {
    os << start_id(k) << ' ' << start_surface(k) << "\n";
    os << end_id(k) << ' ' << end_surface(k) << "\n";
  }
  os << pad_id() << ' ' << kPadSurface << "\n";
  return os.str();
}

BpeVocab BpeVocab::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto fail = [](const std::string& why) { return Error(ErrorCode::kFormat, "bad vocabulary file: " + why); };
  if (!std::getline(in, line) || line != kHeader) throw fail("missing header '" + std::string(kHeader) + "'");
  std::string word;
  int alphabet = 0;
  if (!(in >> word) || word != "alphabet" || !(in >> word) || word != "bytes" || !(in >> alphabet) || alphabet != kByteCount) {
    throw fail("expected 'alphabet bytes 256'");
  }
  std::size_t n = 0;
  if (!(in >> word) || word != "merges" || !(in >> n)) throw fail("expected merge count");
  std::vector<std::pair<TokenId, TokenId>> merges(n);
  for (auto& [a, b] : merges) {
    if (!(in >> a >> b)) throw fail("truncated merge list");
  }
  BpeVocab vocab(std::move(merges));
  std::size_t n_special = 0;
  if (!(in >> word) || word != "special" || !(in >> n_special) || n_special != kSpecialCount) throw fail("expected 7 special tokens");
  for (std::size_t i = 0; i < n_special; ++i) {
    TokenId id = 0;
    std::string surface;
    if (!(in >> id >> surface)) throw fail("truncated special token list");
    if (vocab.token_text(id) != surface) throw fail("special token " + surface + " has unexpected id " + std::to_string(id));
  }
  return vocab;
}

void BpeVocab::save(const std::string& path) const { write_file_atomic(path, serialize()); }

BpeVocab BpeVocab::load(const std::string& path) { return parse(read_file(path)); }

std::string BpeVocab::hash() const { return hex64(fnv1a64(serialize())); }

}  // namespace recipegpt::codec
