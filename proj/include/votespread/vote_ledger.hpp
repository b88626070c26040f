#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "votespread/social_graph.hpp"
#include "votespread/stats.hpp"

namespace votespread {

// Lowest vote count ever observed on a front-page story.
inline constexpr std::size_t kPromotionThreshold = 43;

// A submitted story and the ordered list of users who voted on it. voters[0]
// is the submitter. The list may be a prefix of the full history, in which
// case final_votes exceeds voters.size().
struct StoryRecord {
  std::string story_id;
  UserId submitter;
  std::vector<UserId> voters;
  std::optional<std::size_t> final_votes;
  bool promoted = false;
  std::optional<std::size_t> promotion_index;
  std::optional<double> submit_time;
  std::optional<std::vector<double>> vote_times;

  bool operator==(const StoryRecord&) const = default;
};

struct Corpus {
  std::vector<StoryRecord> stories;

  const StoryRecord* find(const std::string& story_id) const;
  bool operator==(const Corpus&) const = default;
};

// Structural problems throw Error; data-level rule breaks are left for
// validate() so a corpus can be inspected before it is rejected.
Corpus read_corpus(std::istream& stories_jsonl, std::istream& votes_csv);
Corpus load_corpus(const std::filesystem::path& stories_path,
                   const std::filesystem::path& votes_path);

void write_stories(std::ostream& out, const Corpus& corpus);
void write_votes(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& stories_path,
                 const std::filesystem::path& votes_path, const Corpus& corpus);

enum class Severity { Error, Warning };

struct Violation {
  std::string story_id;
  std::string rule;
  std::string detail;
  Severity severity = Severity::Error;
};

// Empty iff every StoryRecord invariant holds. Promotions below
// `promotion_threshold` are reported as warnings only.
std::vector<Violation> validate(const Corpus& corpus,
                                std::size_t promotion_threshold = kPromotionThreshold);

std::size_t error_count(const std::vector<Violation>& violations);

struct CorpusStats {
  std::size_t story_count = 0;
  std::size_t user_count = 0;
  Histogram vote_counts;          // final_votes per story (|voters| when unknown)
  Histogram submissions_per_user; // stories submitted, bin width 1
  Histogram votes_per_user;       // stories voted on (submissions excluded), bin width 1
  // (threshold, fraction of stories strictly below it)
  std::vector<std::pair<double, double>> fraction_below;
  // (threshold, fraction of stories strictly above it)
  std::vector<std::pair<double, double>> fraction_above;
};

CorpusStats corpus_stats(const Corpus& corpus, double vote_bin_width = 100.0,
                         const std::vector<double>& below = {500.0},
                         const std::vector<double>& above = {1500.0});

// Final vote count, falling back to the recorded voters.
std::size_t vote_total(const StoryRecord& story);

}  // namespace votespread
