#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "votespread/social_graph.hpp"
#include "votespread/stats.hpp"
#include "votespread/vote_ledger.hpp"

namespace votespread {

// Whether the submitter's own entry counts toward the k-vote prefix. The
// submitter always seeds visibility and is never itself an in-network vote.
struct PrefixConvention {
  bool include_submitter = false;

  const char* name() const { return include_submitter ? "include-submitter" : "exclude-submitter"; }
  bool operator==(const PrefixConvention&) const = default;
};

PrefixConvention parse_convention(const std::string& text);

// Who counts toward a story's influence. AllWatchers counts every fan of a
// prefix voter, including fans who have since voted themselves, and grows
// monotonically with the prefix. ExcludePrefixVoters drops prefix voters from
// the audience, which can shrink the count when a watcher votes.
enum class AudienceRule { AllWatchers, ExcludePrefixVoters };

const char* to_string(AudienceRule rule);
AudienceRule parse_audience_rule(const std::string& text);

// A count computed over a story prefix. `short_prefix` is set when the story
// has fewer recorded votes than the prefix asked for; the count then covers
// what is available.
struct PrefixCount {
  std::size_t value = 0;
  bool short_prefix = false;
};

// Number of voters in the prefix that are fans of at least one strictly
// earlier voter (submitter included as an earlier voter).
PrefixCount in_network_votes(const StoryRecord& story, const FanGraph& graph, std::size_t k,
                             PrefixConvention convention = {});

// Distinct users watching at least one prefix voter, filtered by `rule`.
PrefixCount influence(const StoryRecord& story, const FanGraph& graph, std::size_t k,
                      PrefixConvention convention = {},
                      AudienceRule rule = AudienceRule::AllWatchers);

struct CascadeProfile {
  std::string story_id;
  std::size_t k = 0;
  std::size_t influence_k = 0;
  std::size_t in_network_k = 0;
  double fraction_k = 0.0;  // in_network_k over the prefix votes eligible to count
  bool short_prefix = false;
};

CascadeProfile cascade_profile(const StoryRecord& story, const FanGraph& graph, std::size_t k,
                               PrefixConvention convention = {},
                               AudienceRule rule = AudienceRule::AllWatchers);

struct CascadeHistograms {
  std::size_t k = 0;
  PrefixConvention convention;
  AudienceRule audience = AudienceRule::AllWatchers;
  std::vector<CascadeProfile> profiles;
  Histogram influence;
  Histogram in_network;  // bin width 1
  double share_half_in_network = 0.0;  // in_network_k >= k/2
  double share_ten_in_network = 0.0;   // in_network_k >= 10
};

CascadeHistograms cascade_histograms(const Corpus& corpus, const FanGraph& graph, std::size_t k,
                                     PrefixConvention convention = {},
                                     double influence_bin_width = 10.0,
                                     AudienceRule rule = AudienceRule::AllWatchers);

struct ProfileRow {
  std::size_t in_network = 0;
  std::size_t stories = 0;
  double median_votes = 0.0;
  // Range of final votes after dropping the single highest and lowest value;
  // the full range when the bin holds fewer than three stories.
  double lower = 0.0;
  double upper = 0.0;
};

struct InterestingnessProfile {
  std::size_t k = 0;
  PrefixConvention convention;
  std::vector<ProfileRow> rows;
  PermutationTest correlation;  // Spearman rho(in_network_k, final votes)
};

InterestingnessProfile interestingness_profile(const Corpus& corpus, const FanGraph& graph,
                                               std::size_t k, PrefixConvention convention = {},
                                               std::size_t permutations = 1000,
                                               std::uint64_t seed = 0);

// Provenance line written as the first row of every table, e.g.
// `# k=10 convention=exclude-submitter influence=all-watchers ...`.
struct TableHeader {
  std::size_t k = 0;
  PrefixConvention convention;
  AudienceRule audience = AudienceRule::AllWatchers;
  std::string inputs;  // free-form digests of the corpus and graph files
};

void write_profiles_csv(std::ostream& out, const TableHeader& header,
                        const std::vector<CascadeProfile>& profiles);
void write_histogram_csv(std::ostream& out, const TableHeader& header, const Histogram& hist,
                         const std::string& quantity);
void write_interestingness_csv(std::ostream& out, const TableHeader& header,
                               const InterestingnessProfile& profile);

}  // namespace votespread
