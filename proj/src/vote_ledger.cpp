#include "votespread/vote_ledger.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "votespread/error.hpp"
#include "votespread/format.hpp"

namespace votespread {

namespace {

using nlohmann::ordered_json;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& text, T& value) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

std::optional<std::size_t> count_field(const ordered_json& obj, const char* key,
                                       std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw Error(ErrorCode::ParseError, std::string("'") + key + "' must be a non-negative integer",
                line);
  }
  return it->get<std::size_t>();
}

struct PendingVote {
  std::size_t position;
  UserId user;
  std::optional<double> time;
  std::size_t line;
};

}  // namespace

const StoryRecord* Corpus::find(const std::string& story_id) const {
  for (const auto& s : stories) {
    if (s.story_id == story_id) return &s;
  }
  return nullptr;
}

std::size_t vote_total(const StoryRecord& story) {
  return story.final_votes.value_or(story.voters.size());
}

Corpus read_corpus(std::istream& stories_jsonl, std::istream& votes_csv) {
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> slot;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stories_jsonl, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw Error(ErrorCode::ParseError, "expected a JSON object", line_no);
    StoryRecord story;
    auto string_field = [&](const char* key) {
      auto it = obj.find(key);
      if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw Error(ErrorCode::ParseError, std::string("missing string field '") + key + "'",
                    line_no);
      }
      return it->get<std::string>();
    };
    story.story_id = string_field("story_id");
    story.submitter = string_field("submitter");
    story.final_votes = count_field(obj, "final_votes", line_no);
    story.promotion_index = count_field(obj, "promotion_index", line_no);
    if (auto it = obj.find("promoted"); it != obj.end()) {
      if (!it->is_boolean()) throw Error(ErrorCode::ParseError, "'promoted' must be boolean", line_no);
      story.promoted = it->get<bool>();
    }
    if (auto it = obj.find("submit_time"); it != obj.end() && !it->is_null()) {
      if (!it->is_number()) throw Error(ErrorCode::ParseError, "'submit_time' must be a number", line_no);
      story.submit_time = it->get<double>();
    }
    if (!slot.emplace(story.story_id, corpus.stories.size()).second) {
      throw Error(ErrorCode::ParseError, "duplicate story_id '" + story.story_id + "'", line_no);
    }
    corpus.stories.push_back(std::move(story));
  }

  std::vector<std::vector<PendingVote>> pending(corpus.stories.size());
  line_no = 0;
  bool has_time_column = false;
  bool saw_header = false;
  while (std::getline(votes_csv, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    for (auto& f : fields) f = trim(f);
    if (!saw_header) {
      saw_header = true;
      if (fields.size() >= 3 && fields[0] == "story_id" && fields[1] == "position" &&
          fields[2] == "user_id" && (fields.size() == 3 || (fields.size() == 4 && fields[3] == "time"))) {
        has_time_column = fields.size() == 4;
        continue;
      }
      throw Error(ErrorCode::ParseError, "expected header 'story_id,position,user_id[,time]'",
                  line_no);
    }
    const std::size_t expected = has_time_column ? 4 : 3;
    if (fields.size() != expected) {
      throw Error(ErrorCode::ParseError,
                  "expected " + std::to_string(expected) + " columns, got " +
                      std::to_string(fields.size()),
                  line_no);
    }
    PendingVote vote;
    vote.line = line_no;
    if (!parse_number(fields[1], vote.position)) {
      throw Error(ErrorCode::ParseError, "bad position '" + fields[1] + "'", line_no);
    }
    if (fields[2].empty() || fields[2].find_first_of(" \t") != std::string::npos) {
      throw Error(ErrorCode::ParseError, "bad user_id '" + fields[2] + "'", line_no);
    }
    vote.user = fields[2];
    if (has_time_column && !fields[3].empty()) {
      double t;
      if (!parse_number(fields[3], t)) {
        throw Error(ErrorCode::ParseError, "bad time '" + fields[3] + "'", line_no);
      }
      vote.time = t;
    }
    auto it = slot.find(fields[0]);
    if (it == slot.end()) {
      throw Error(ErrorCode::UnknownStory, "vote references undeclared story '" + fields[0] + "'",
                  line_no);
    }
    pending[it->second].push_back(std::move(vote));
  }

  for (std::size_t s = 0; s < corpus.stories.size(); ++s) {
    auto& story = corpus.stories[s];
    auto& votes = pending[s];
    std::stable_sort(votes.begin(), votes.end(),
                     [](const PendingVote& a, const PendingVote& b) { return a.position < b.position; });
    std::unordered_set<std::string> seen;
    std::size_t timed = 0;
    for (std::size_t i = 0; i < votes.size(); ++i) {
      const auto& v = votes[i];
      if (v.position != i) {
        throw Error(ErrorCode::ParseError,
                    "positions for story '" + story.story_id + "' must be 0..n-1 contiguous",
                    v.line);
      }
      if (i == 0 && v.user != story.submitter) {
        throw Error(ErrorCode::SubmitterMismatch,
                    "story '" + story.story_id + "' first voter '" + v.user +
                        "' is not submitter '" + story.submitter + "'",
                    v.line);
      }
      if (!seen.insert(v.user).second) {
        throw Error(ErrorCode::DuplicateVoter,
                    "user '" + v.user + "' votes twice on story '" + story.story_id + "'", v.line);
      }
      story.voters.push_back(v.user);
      if (v.time) ++timed;
    }
    if (timed > 0) {
      if (timed != votes.size()) {
        throw Error(ErrorCode::ParseError,
                    "story '" + story.story_id + "' has times on some votes but not all",
                    votes.front().line);
      }
      std::vector<double> times;
      times.reserve(votes.size());
      for (const auto& v : votes) times.push_back(*v.time);
      story.vote_times = std::move(times);
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& stories_path,
                   const std::filesystem::path& votes_path) {
  std::ifstream stories(stories_path);
  if (!stories) throw Error(ErrorCode::IoError, "cannot open " + stories_path.string());
  std::ifstream votes(votes_path);
  if (!votes) throw Error(ErrorCode::IoError, "cannot open " + votes_path.string());
  return read_corpus(stories, votes);
}

void write_stories(std::ostream& out, const Corpus& corpus) {
  for (const auto& s : corpus.stories) {
    ordered_json obj;
    obj["story_id"] = s.story_id;
    obj["submitter"] = s.submitter;
    obj["final_votes"] = s.final_votes ? ordered_json(*s.final_votes) : ordered_json(nullptr);
    obj["promoted"] = s.promoted;
    if (s.promotion_index) obj["promotion_index"] = *s.promotion_index;
    if (s.submit_time) obj["submit_time"] = *s.submit_time;
    out << obj.dump() << '\n';
  }
}

void write_votes(std::ostream& out, const Corpus& corpus) {
  const bool timed = std::any_of(corpus.stories.begin(), corpus.stories.end(),
                                 [](const StoryRecord& s) { return s.vote_times.has_value(); });
  out << (timed ? "story_id,position,user_id,time\n" : "story_id,position,user_id\n");
  for (const auto& s : corpus.stories) {
    for (std::size_t i = 0; i < s.voters.size(); ++i) {
      out << s.story_id << ',' << i << ',' << s.voters[i];
      if (timed) {
        out << ',';
        if (s.vote_times && i < s.vote_times->size()) out << format_double((*s.vote_times)[i]);
      }
      out << '\n';
    }
  }
}

void save_corpus(const std::filesystem::path& stories_path,
                 const std::filesystem::path& votes_path, const Corpus& corpus) {
  std::ofstream stories(stories_path, std::ios::binary);
  std::ofstream votes(votes_path, std::ios::binary);
  if (!stories || !votes) throw Error(ErrorCode::IoError, "cannot write corpus files");
  write_stories(stories, corpus);
  write_votes(votes, corpus);
}

std::vector<Violation> validate(const Corpus& corpus, std::size_t promotion_threshold) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (const auto& s : corpus.stories) {
    auto add = [&](std::string rule, std::string detail, Severity sev = Severity::Error) {
      out.push_back({s.story_id, std::move(rule), std::move(detail), sev});
    };
    if (!ids.insert(s.story_id).second) add("unique-story-id", "story_id appears more than once");
    if (s.voters.empty()) {
      add("submitter-first", "no votes recorded; the submitter must appear first");
    } else if (s.voters.front() != s.submitter) {
      add("submitter-first", "first voter '" + s.voters.front() + "' is not the submitter");
    }
    {
      std::unordered_set<std::string> seen;
      for (const auto& v : s.voters) {
        if (!seen.insert(v).second) {
          add("unique-voters", "user '" + v + "' appears more than once");
          break;
        }
      }
    }
    if (s.final_votes && *s.final_votes < s.voters.size()) {
      add("final-votes",
          "final_votes " + std::to_string(*s.final_votes) + " < recorded voters " +
              std::to_string(s.voters.size()));
    }
    if (s.vote_times) {
      if (s.vote_times->size() != s.voters.size()) {
        add("vote-times-length", "vote_times length differs from voters");
      } else if (!std::is_sorted(s.vote_times->begin(), s.vote_times->end())) {
        add("vote-times-order", "vote_times are not nondecreasing");
      }
    }
    if (s.promotion_index && !s.promoted) {
      add("promotion-index", "promotion_index set on an unpromoted story");
    }
    if (s.promoted && s.promotion_index && *s.promotion_index < promotion_threshold) {
      add("promotion-threshold",
          "promoted at " + std::to_string(*s.promotion_index) + " votes, below " +
              std::to_string(promotion_threshold),
          Severity::Warning);
    }
  }
  return out;
}

std::size_t error_count(const std::vector<Violation>& violations) {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(),
      [](const Violation& v) { return v.severity == Severity::Error; }));
}

CorpusStats corpus_stats(const Corpus& corpus, double vote_bin_width,
                         const std::vector<double>& below, const std::vector<double>& above) {
  if (corpus.stories.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no stories");
  CorpusStats stats;
  stats.story_count = corpus.stories.size();
  stats.vote_counts.bin_width = vote_bin_width;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_user;  // submitted, voted
  std::vector<double> totals;
  for (const auto& s : corpus.stories) {
    totals.push_back(static_cast<double>(vote_total(s)));
    stats.vote_counts.add(totals.back());
    ++per_user[s.submitter].first;
    for (std::size_t i = 1; i < s.voters.size(); ++i) ++per_user[s.voters[i]].second;
  }
  stats.user_count = per_user.size();
  for (const auto& [user, counts] : per_user) {
    if (counts.first > 0) stats.submissions_per_user.add(static_cast<double>(counts.first));
    if (counts.second > 0) stats.votes_per_user.add(static_cast<double>(counts.second));
  }
  const double n = static_cast<double>(totals.size());
  for (double t : below) {
    const auto c = std::count_if(totals.begin(), totals.end(), [t](double v) { return v < t; });
    stats.fraction_below.emplace_back(t, static_cast<double>(c) / n);
  }
  for (double t : above) {
    const auto c = std::count_if(totals.begin(), totals.end(), [t](double v) { return v > t; });
    stats.fraction_above.emplace_back(t, static_cast<double>(c) / n);
  }
  return stats;
}

}  // namespace votespread
