#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace votespread {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitFindings = 1,
  kExitInputError = 2,
  kExitInternalError = 3,
};

// Runs the command-line tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// `graph_sha256=... stories_sha256=... votes_sha256=...`, the provenance
// recorded in every metrics table header.
std::string input_digests(const std::filesystem::path& graph, const std::filesystem::path& stories,
                          const std::filesystem::path& votes);

}  // namespace votespread
