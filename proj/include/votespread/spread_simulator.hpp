#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "votespread/social_graph.hpp"
#include "votespread/vote_ledger.hpp"

namespace votespread {

struct FanDegreeDistribution {
  enum class Kind { PowerLaw, Fixed };
  Kind kind = Kind::PowerLaw;
  // PowerLaw: fan count k = floor(x) - 1 with x ~ Pareto(scale, exponent), so
  // the tail falls off as k^-exponent and most users have no fans.
  double exponent = 3.0;
  double scale = 1.0;
  std::size_t fixed = 0;

  std::string to_string() const;
  bool operator==(const FanDegreeDistribution&) const = default;
};

// r = min(1, exp(N(mu, sigma))).
struct InterestDistribution {
  double mu = -2.0;
  double sigma = 0.8;

  std::string to_string() const;
  bool operator==(const InterestDistribution&) const = default;
};

enum class CorpusScope {
  FrontPage,  // keep only promoted stories, like a front-page scrape
  All,        // keep every submission
};

// Durations are in ticks. Defaults are the calibrated values committed in
// config/default.cfg; none of them is a measured quantity.
struct SimulationConfig {
  std::size_t n_users = 50000;
  FanDegreeDistribution fan_degree;
  std::size_t n_stories = 500;
  InterestDistribution interest;
  double p_discover = 7.0e-6;     // per user per tick, upcoming queue
  double p_front = 6.0e-5;         // per user per tick, front page
  double p_fan_view = 0.012;      // per exposed fan per tick
  std::size_t fan_view_window = 288;  // ticks a friend's vote stays visible
  std::size_t promotion_threshold = kPromotionThreshold;
  std::size_t promotion_window = 144;
  std::size_t queue_lifetime = 144;
  double decay_half_life = 144.0;
  double tick_length = 600.0;  // seconds
  double submission_interval = 45.0;  // seconds between submissions
  std::size_t max_ticks = 1440;
  std::size_t patience = 144;
  CorpusScope scope = CorpusScope::FrontPage;
  std::size_t max_submissions = 20000;
  std::size_t threads = 0;  // 0 = hardware concurrency; never changes output
  std::uint64_t seed = 42;

  void check() const;  // throws ConfigError naming the offending key
  bool operator==(const SimulationConfig&) const = default;
};

// Flat `key = value` text, `#` comments.
SimulationConfig read_config(std::istream& in);
SimulationConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const SimulationConfig& config);

enum class Channel { Queue, Front, Fan };
const char* to_string(Channel channel);

struct TraceEvent {
  std::size_t tick = 0;
  NodeId user = 0;
  Channel channel = Channel::Queue;
};

// Votes after the submission, in ledger order.
struct SimTrace {
  std::string story_id;
  NodeId submitter = 0;
  double interest = 0.0;
  std::vector<TraceEvent> events;
  std::optional<std::size_t> promotion_tick;
};

struct SimulatedStory {
  StoryRecord record;
  SimTrace trace;
};

// User names are `u` followed by the zero-padded node id.
std::string user_name(NodeId id, std::size_t n_users);

// In-degree (fan count) sequence drawn from the configured distribution, then
// fans assigned by matching each in-stub to a uniformly drawn watcher;
// self-edges and duplicate edges are redrawn.
FanGraph generate_graph(const SimulationConfig& config, std::uint64_t seed);

struct StorySetup {
  std::string story_id;
  NodeId submitter = 0;
  double interest = 0.0;
  double submit_time = 0.0;
};

SimulatedStory simulate_story(const FanGraph& graph, const StorySetup& setup,
                              const SimulationConfig& config, std::uint64_t seed);

struct SimulatedCorpus {
  FanGraph graph;
  Corpus corpus;
  std::vector<SimTrace> traces;
  std::size_t submissions = 0;
};

SimulatedCorpus simulate_corpus(const SimulationConfig& config);

void write_traces(std::ostream& out, const FanGraph& graph, const std::vector<SimTrace>& traces);

struct TraceLine {
  std::string story_id;
  std::size_t tick = 0;
  UserId user;
  Channel channel = Channel::Queue;
};

std::vector<TraceLine> read_traces(std::istream& in);

// Writes graph.tsv, stories.jsonl, votes.csv and traces.jsonl into `dir`.
struct CorpusFiles {
  std::filesystem::path graph, stories, votes, traces;
};
CorpusFiles corpus_files(const std::filesystem::path& dir);
void save_simulation(const std::filesystem::path& dir, const SimulatedCorpus& sim);

}  // namespace votespread
