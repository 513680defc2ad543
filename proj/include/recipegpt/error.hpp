#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace recipegpt {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kFormat,
  kMalformedRecord,
  kEmptyAfterStripping,
  kInsufficientCorpus,
  kEmptyPhrase,
  kInvalidDictionary,
  kEmptyCorpus,
  kUnknownId,
  kTargetInContext,
  kEmptyContext,
  kSequenceTooLong,
  kVocabMismatch,
  kBothTreesEmpty,
  kDuplicateId,
  kEmptyQuery,
  kNotFound,
  kOutOfRange,
  kEmptyComment,
  kInvalidRecord,
};

std::string_view to_string(ErrorCode code);

// Every failure the library reports is an Error carrying a stable code, so
// the service layer can map it onto an HTTP status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class MalformedRecordError : public Error {
 public:
  MalformedRecordError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// 64-bit FNV-1a. Used for artifact content hashes (vocab, corpus), not for security.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace recipegpt
