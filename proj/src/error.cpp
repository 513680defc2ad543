#include "recipegpt/error.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace recipegpt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kMalformedRecord: return "malformed_record";
    case ErrorCode::kEmptyAfterStripping: return "empty_after_stripping";
    case ErrorCode::kInsufficientCorpus: return "insufficient_corpus";
    case ErrorCode::kEmptyPhrase: return "empty_phrase";
    case ErrorCode::kInvalidDictionary: return "invalid_dictionary";
    case ErrorCode::kEmptyCorpus: return "empty_corpus";
    case ErrorCode::kUnknownId: return "unknown_id";
    case ErrorCode::kTargetInContext: return "target_in_context";
    case ErrorCode::kEmptyContext: return "empty_context";
    case ErrorCode::kSequenceTooLong: return "sequence_too_long";
    case ErrorCode::kVocabMismatch: return "vocab_mismatch";
    case ErrorCode::kBothTreesEmpty: return "both_trees_empty";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kEmptyQuery: return "empty_query";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kEmptyComment: return "empty_comment";
    case ErrorCode::kInvalidRecord: return "invalid_record";
  }
  return "unknown";
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp + ": " + ec.message());
}

}  // namespace recipegpt
