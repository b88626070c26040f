#include "votespread/cascade_metrics.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <unordered_set>

#include "votespread/error.hpp"
#include "votespread/format.hpp"

namespace votespread {

PrefixConvention parse_convention(const std::string& text) {
  if (text == "exclude" || text == "exclude-submitter") return {false};
  if (text == "include" || text == "include-submitter") return {true};
  throw Error(ErrorCode::ConfigError, "unknown prefix convention '" + text + "'");
}

const char* to_string(AudienceRule rule) {
  return rule == AudienceRule::AllWatchers ? "all-watchers" : "excludes-prefix-voters";
}

AudienceRule parse_audience_rule(const std::string& text) {
  if (text == "all" || text == "all-watchers") return AudienceRule::AllWatchers;
  if (text == "exclude-voters" || text == "excludes-prefix-voters") {
    return AudienceRule::ExcludePrefixVoters;
  }
  throw Error(ErrorCode::ConfigError, "unknown influence rule '" + text + "'");
}

namespace {

struct PrefixWalk {
  std::size_t entries = 0;   // voter entries examined, submitter included
  std::size_t eligible = 0;  // entries that could count as in-network votes
  bool short_prefix = false;
  std::size_t in_network = 0;
  std::unordered_set<NodeId> exposed;
  std::unordered_set<NodeId> voted;
};

PrefixWalk walk_prefix(const StoryRecord& story, const FanGraph& graph, std::size_t k,
                       PrefixConvention convention) {
  PrefixWalk walk;
  const std::size_t wanted = convention.include_submitter ? k : k + 1;
  walk.entries = std::min(wanted, story.voters.size());
  walk.short_prefix = story.voters.size() < wanted;
  walk.eligible = walk.entries > 0 ? walk.entries - 1 : 0;
  for (std::size_t i = 0; i < walk.entries; ++i) {
    const auto id = graph.find(story.voters[i]);
    if (!id) continue;
    if (i > 0 && walk.exposed.contains(*id)) ++walk.in_network;
    walk.voted.insert(*id);
    for (NodeId fan : graph.fans_of(*id)) walk.exposed.insert(fan);
  }
  return walk;
}

std::size_t audience(const PrefixWalk& walk, AudienceRule rule) {
  if (rule == AudienceRule::AllWatchers) return walk.exposed.size();
  std::size_t n = 0;
  for (NodeId u : walk.exposed) {
    if (!walk.voted.contains(u)) ++n;
  }
  return n;
}

void write_header(std::ostream& out, const TableHeader& header) {
  out << "# k=" << header.k << " convention=" << header.convention.name()
      << " influence=" << to_string(header.audience);
  if (!header.inputs.empty()) out << ' ' << header.inputs;
  out << '\n';
}

}  // namespace

PrefixCount in_network_votes(const StoryRecord& story, const FanGraph& graph, std::size_t k,
                             PrefixConvention convention) {
  const auto walk = walk_prefix(story, graph, k, convention);
  return {walk.in_network, walk.short_prefix};
}

PrefixCount influence(const StoryRecord& story, const FanGraph& graph, std::size_t k,
                      PrefixConvention convention, AudienceRule rule) {
  const auto walk = walk_prefix(story, graph, k, convention);
  return {audience(walk, rule), walk.short_prefix};
}

CascadeProfile cascade_profile(const StoryRecord& story, const FanGraph& graph, std::size_t k,
                               PrefixConvention convention, AudienceRule rule) {
  const auto walk = walk_prefix(story, graph, k, convention);
  CascadeProfile p;
  p.story_id = story.story_id;
  p.k = k;
  p.influence_k = audience(walk, rule);
  p.in_network_k = walk.in_network;
  p.fraction_k = walk.eligible > 0
                     ? static_cast<double>(walk.in_network) / static_cast<double>(walk.eligible)
                     : 0.0;
  p.short_prefix = walk.short_prefix;
  return p;
}

CascadeHistograms cascade_histograms(const Corpus& corpus, const FanGraph& graph, std::size_t k,
                                     PrefixConvention convention, double influence_bin_width,
                                     AudienceRule rule) {
  if (corpus.stories.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no stories");
  CascadeHistograms out;
  out.k = k;
  out.convention = convention;
  out.audience = rule;
  out.influence.bin_width = influence_bin_width;
  out.in_network.bin_width = 1.0;
  std::size_t half = 0, ten = 0;
  for (const auto& story : corpus.stories) {
    auto p = cascade_profile(story, graph, k, convention, rule);
    out.influence.add(static_cast<double>(p.influence_k));
    out.in_network.add(static_cast<double>(p.in_network_k));
    if (2 * p.in_network_k >= k) ++half;
    if (p.in_network_k >= 10) ++ten;
    out.profiles.push_back(std::move(p));
  }
  const double n = static_cast<double>(corpus.stories.size());
  out.share_half_in_network = static_cast<double>(half) / n;
  out.share_ten_in_network = static_cast<double>(ten) / n;
  return out;
}

InterestingnessProfile interestingness_profile(const Corpus& corpus, const FanGraph& graph,
                                               std::size_t k, PrefixConvention convention,
                                               std::size_t permutations, std::uint64_t seed) {
  if (corpus.stories.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no stories");
  InterestingnessProfile out;
  out.k = k;
  out.convention = convention;
  std::map<std::size_t, std::vector<double>> bins;
  std::vector<double> cascade, votes;
  for (const auto& story : corpus.stories) {
    const auto c = in_network_votes(story, graph, k, convention).value;
    const auto v = static_cast<double>(vote_total(story));
    bins[c].push_back(v);
    cascade.push_back(static_cast<double>(c));
    votes.push_back(v);
  }
  for (auto& [c, values] : bins) {
    std::sort(values.begin(), values.end());
    ProfileRow row;
    row.in_network = c;
    row.stories = values.size();
    row.median_votes = median(values);
    if (values.size() >= 3) {
      row.lower = values[1];
      row.upper = values[values.size() - 2];
    } else {
      row.lower = values.front();
      row.upper = values.back();
    }
    out.rows.push_back(row);
  }
  out.correlation = spearman_permutation_test(cascade, votes, permutations, seed);
  return out;
}

void write_profiles_csv(std::ostream& out, const TableHeader& header,
                        const std::vector<CascadeProfile>& profiles) {
  write_header(out, header);
  out << "story_id,k,influence,in_network,fraction,short_prefix\n";
  for (const auto& p : profiles) {
    out << p.story_id << ',' << p.k << ',' << p.influence_k << ',' << p.in_network_k << ','
        << format_double(p.fraction_k) << ',' << (p.short_prefix ? 1 : 0) << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const TableHeader& header, const Histogram& hist,
                         const std::string& quantity) {
  write_header(out, header);
  out << "quantity,bin_start,bin_end,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << quantity << ',' << format_double(static_cast<double>(i) * hist.bin_width) << ','
        << format_double(static_cast<double>(i + 1) * hist.bin_width) << ',' << hist.counts[i]
        << '\n';
  }
}

void write_interestingness_csv(std::ostream& out, const TableHeader& header,
                               const InterestingnessProfile& profile) {
  write_header(out, header);
  out << "# spearman_rho=" << format_double(profile.correlation.rho)
      << " permutation_p=" << format_double(profile.correlation.p_value)
      << " permutations=" << profile.correlation.permutations << '\n';
  out << "in_network,stories,median_final_votes,lower,upper\n";
  for (const auto& r : profile.rows) {
    out << r.in_network << ',' << r.stories << ',' << format_double(r.median_votes) << ','
        << format_double(r.lower) << ',' << format_double(r.upper) << '\n';
  }
}

}  // namespace votespread
