#include "votespread/error.hpp"

namespace votespread {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SelfEdge: return "SelfEdge";
    case ErrorCode::DuplicateVoter: return "DuplicateVoter";
    case ErrorCode::SubmitterMismatch: return "SubmitterMismatch";
    case ErrorCode::UnknownStory: return "UnknownStory";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyTestset: return "EmptyTestset";
    case ErrorCode::TooFewExamples: return "TooFewExamples";
    case ErrorCode::NoPromotedStories: return "NoPromotedStories";
    case ErrorCode::MissingFinalVotes: return "MissingFinalVotes";
    case ErrorCode::InfeasibleDegreeSequence: return "InfeasibleDegreeSequence";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           std::optional<std::size_t> line) {
  std::string out = to_string(code);
  if (line) out += " at line " + std::to_string(*line);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(format_message(code, message, line)),
      code_(code),
      line_(line) {}

}  // namespace votespread
