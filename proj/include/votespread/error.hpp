#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace votespread {

enum class ErrorCode {
  ParseError,
  SelfEdge,
  DuplicateVoter,
  SubmitterMismatch,
  UnknownStory,
  EmptyCorpus,
  EmptyDataset,
  EmptyTestset,
  TooFewExamples,
  NoPromotedStories,
  MissingFinalVotes,
  InfeasibleDegreeSequence,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code);

// Every failure surfaced by the library. Input errors carry the 1-based line
// number of the offending record when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace votespread
