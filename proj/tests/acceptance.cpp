// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "votespread/cascade_metrics.hpp"
#include "votespread/cli.hpp"
#include "votespread/digest.hpp"
#include "votespread/interest_predictor.hpp"
#include "votespread/social_graph.hpp"
#include "votespread/spread_simulator.hpp"
#include "votespread/stats.hpp"
#include "votespread/vote_dynamics.hpp"

using namespace votespread;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char timing[64];
  if (limit_s > 0) {
    std::snprintf(timing, sizeof timing, "%.2f s, limit %.0f s", secs, limit_s);
    if (secs >= limit_s) {
      o.pass = false;
      o.detail += "; over time limit";
    }
  } else {
    std::snprintf(timing, sizeof timing, "%.2f s", secs);
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), timing);
  std::fflush(stdout);
}

std::string fmt(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

SimulationConfig default_config() { return load_config(VOTESPREAD_DEFAULT_CONFIG); }

// Default corpus at seed 42, shared by several criteria.
const SimulatedCorpus& default_corpus() {
  static const SimulatedCorpus sim = [] {
    auto config = default_config();
    config.seed = 42;
    config.n_stories = 500;
    return simulate_corpus(config);
  }();
  return sim;
}

Outcome cascade_oracles() {
  Rng rng = derive_rng(2024, 1);
  std::size_t checks = 0, mismatches = 0;
  const int instances = 1000;
  for (int i = 0; i < instances; ++i) {
    const auto inst = oracle::random_instance(rng, 30, 15);
    const auto g = oracle::build(inst);
    for (bool include : {false, true}) {
      const PrefixConvention conv{include};
      for (std::size_t k = 1; k <= 15; ++k) {
        checks += 3;
        if (in_network_votes(inst.story, g, k, conv).value !=
            oracle::in_network_scan(inst.edges, inst.story, k, include)) {
          ++mismatches;
        }
        if (influence(inst.story, g, k, conv).value !=
            oracle::influence_union(inst.edges, inst.story, k, include, false)) {
          ++mismatches;
        }
        if (influence(inst.story, g, k, conv, AudienceRule::ExcludePrefixVoters).value !=
            oracle::influence_union(inst.edges, inst.story, k, include, true)) {
          ++mismatches;
        }
      }
    }
  }
  return {mismatches == 0, std::to_string(instances) + " instances, " + std::to_string(checks) +
                               " comparisons, " + std::to_string(mismatches) + " mismatches"};
}

Outcome duality_monotonicity() {
  std::size_t graphs = 0, duality_errors = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b) pairs.emplace_back(a, b);
      }
    }
    for (std::uint64_t mask = 0; mask < (1ULL << pairs.size()); ++mask) {
      ++graphs;
      FanGraph g;
      oracle::EdgeList edges;
      for (std::size_t u = 0; u < n; ++u) g.add_user("n" + std::to_string(u));
      for (std::size_t e = 0; e < pairs.size(); ++e) {
        if (!(mask >> e & 1)) continue;
        const auto fan = "n" + std::to_string(pairs[e].first);
        const auto watched = "n" + std::to_string(pairs[e].second);
        g.add_edge(fan, watched);
        edges.emplace_back(fan, watched);
      }
      for (std::size_t u = 0; u < n; ++u) {
        const auto un = "n" + std::to_string(u);
        if (g.fans(un) != oracle::fans_scan(edges, un)) ++duality_errors;
        if (g.friends(un) != oracle::friends_scan(edges, un)) ++duality_errors;
        if (g.fan_count(un) != g.fans(un).size()) ++duality_errors;
        for (std::size_t v = 0; v < n; ++v) {
          const auto vn = "n" + std::to_string(v);
          if (g.fans(un).contains(vn) != g.friends(vn).contains(un)) ++duality_errors;
        }
      }
    }
  }

  Rng rng = derive_rng(2024, 2);
  std::size_t monotone_errors = 0;
  const int cases = 500;
  for (int i = 0; i < cases; ++i) {
    const auto inst = oracle::random_instance(rng, 30, 15);
    auto g = oracle::build(inst);
    for (bool include : {false, true}) {
      const PrefixConvention conv{include};
      std::size_t prev_net = 0, prev_inf = 0;
      for (std::size_t k = 1; k <= 16; ++k) {
        const auto net = in_network_votes(inst.story, g, k, conv).value;
        const auto inf = influence(inst.story, g, k, conv).value;
        if (net < prev_net || inf < prev_inf) ++monotone_errors;
        prev_net = net;
        prev_inf = inf;
      }
    }
    if (inst.users.size() < 2) continue;
    std::vector<std::array<std::size_t, 2>> before;
    for (std::size_t k = 1; k <= 15; ++k) {
      before.push_back({in_network_votes(inst.story, g, k).value, influence(inst.story, g, k).value});
    }
    for (int added = 0; added < 3; ++added) {
      const auto& a = inst.users[uniform_index(rng, inst.users.size())];
      const auto& b = inst.users[uniform_index(rng, inst.users.size())];
      if (a != b) g.add_edge(a, b);
    }
    for (std::size_t k = 1; k <= 15; ++k) {
      if (in_network_votes(inst.story, g, k).value < before[k - 1][0] ||
          influence(inst.story, g, k).value < before[k - 1][1]) {
        ++monotone_errors;
      }
    }
  }
  return {duality_errors == 0 && monotone_errors == 0,
          std::to_string(graphs) + " exhaustive graphs (n<=4), " + std::to_string(duality_errors) +
              " duality errors; " + std::to_string(cases) + " randomized cases, " +
              std::to_string(monotone_errors) + " monotonicity violations"};
}

double root_gain_ratio(const DecisionTree& tree, const Dataset& data) {
  const auto& root = tree.nodes.front();
  if (root.leaf) return 0.0;
  double l[2] = {0, 0}, r[2] = {0, 0};
  for (const auto& ex : data) {
    (ex.features.value(root.attribute) <= root.threshold ? l : r)[ex.label.interesting ? 1 : 0] += 1;
  }
  auto h = [](double a, double b) {
    double out = 0;
    for (double c : {a, b}) {
      if (c > 0) out -= c / (a + b) * std::log2(c / (a + b));
    }
    return out;
  };
  const double nl = l[0] + l[1], nr = r[0] + r[1], n = nl + nr;
  const double gain = h(l[0] + r[0], l[1] + r[1]) - nl / n * h(l[0], l[1]) - nr / n * h(r[0], r[1]);
  return gain / h(nl, nr);
}

Outcome tree_oracle() {
  // Every multiset of 1..6 points over v10, fans1 in {0,1,2} and both labels.
  std::vector<Example> kinds;
  for (std::size_t v = 0; v < 3; ++v) {
    for (std::size_t f = 0; f < 3; ++f) {
      for (bool y : {false, true}) kinds.push_back({FeatureVector{v, f, false}, Label{y}});
    }
  }
  const TreeParams params{1, 8, true};
  std::size_t datasets = 0, mismatches = 0;
  double worst = 0.0;
  Dataset data;
  std::function<void(std::size_t)> grow = [&](std::size_t from) {
    if (!data.empty()) {
      ++datasets;
      const auto tree = train_tree(data, params);
      const double got = root_gain_ratio(tree, data);
      const double best = oracle::best_root_score(data, true, 1);
      const double diff = std::abs(got - best);
      worst = std::max(worst, diff);
      if (diff > 1e-9) ++mismatches;
    }
    if (data.size() == 6) return;
    for (std::size_t i = from; i < kinds.size(); ++i) {
      data.push_back(kinds[i]);
      grow(i);
      data.pop_back();
    }
  };
  grow(0);
  return {mismatches == 0, std::to_string(datasets) + " datasets, " + std::to_string(mismatches) +
                               " root splits off the optimum, max |diff| " + fmt(worst, 12)};
}

Outcome inverse_relationship() {
  const auto& sim = default_corpus();
  const auto profile = interestingness_profile(sim.corpus, sim.graph, 10, {}, 1000, 42);
  const auto& c = profile.correlation;
  return {c.rho <= -0.3 && c.p_value < 0.01,
          std::to_string(sim.corpus.stories.size()) + " stories, spearman rho " + fmt(c.rho) +
              " (need <= -0.3), permutation p " + fmt(c.p_value, 4) + " over " +
              std::to_string(c.permutations) + " permutations (need < 0.01)"};
}

Outcome promotion_boundary() {
  std::vector<SimulationConfig> configs;
  configs.push_back(default_config());
  configs.back().seed = 42;
  configs.back().n_stories = 500;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto c = default_config();
    c.seed = seed;
    c.scope = CorpusScope::All;
    c.max_submissions = 400;
    c.n_stories = 400;
    configs.push_back(c);
  }
  std::size_t promoted = 0, violations = 0, stories = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto sim = i == 0 ? default_corpus() : simulate_corpus(configs[i]);
    const std::size_t threshold = configs[i].promotion_threshold;
    for (std::size_t s = 0; s < sim.corpus.stories.size(); ++s) {
      const auto& rec = sim.corpus.stories[s];
      const auto& trace = sim.traces[s];
      ++stories;
      if (rec.promoted != trace.promotion_tick.has_value()) {
        ++violations;
        continue;
      }
      if (!rec.promoted) {
        // Never crossed the threshold inside the window.
        std::size_t count = 1;
        for (const auto& e : trace.events) {
          if (e.tick > configs[i].promotion_window) break;
          ++count;
        }
        if (count >= threshold) ++violations;
        continue;
      }
      ++promoted;
      const std::size_t t = *trace.promotion_tick;
      std::size_t at = 1, before = 1;  // the submitter's entry
      for (const auto& e : trace.events) {
        if (e.tick <= t) ++at;
        if (e.tick < t) ++before;
      }
      if (!rec.promotion_index || *rec.promotion_index < threshold || *rec.promotion_index != at ||
          at < threshold || before >= threshold) {
        ++violations;
      }
    }
  }
  return {violations == 0 && promoted > 0,
          std::to_string(configs.size()) + " corpora, " + std::to_string(stories) + " stories, " +
              std::to_string(promoted) + " promoted, " + std::to_string(violations) +
              " boundary or replay violations"};
}

Outcome vote_dynamics() {
  const auto& sim = default_corpus();
  const auto config = default_config();
  std::vector<double> ratios;
  for (const auto& rec : sim.corpus.stories) {
    const auto rates = promotion_rates(rec, config.tick_length, config.promotion_window);
    if (!rates || rates->pre_rate <= 0) continue;
    ratios.push_back(rates->post_rate / rates->pre_rate);
  }
  const double med = median(ratios);
  const auto span = static_cast<std::size_t>(3 * config.decay_half_life);
  const auto fit = fit_front_decay(sim.traces, sim.graph.user_count(), span, 12);
  const double err = std::abs(fit.half_life - config.decay_half_life) / config.decay_half_life;
  return {ratios.size() >= 100 && med >= 3.0 && err <= 0.25,
          std::to_string(ratios.size()) + " promoted stories, median post/pre rate ratio " +
              fmt(med, 2) + " (need >= 3); fitted half-life " + fmt(fit.half_life, 1) +
              " ticks vs configured " + fmt(config.decay_half_life, 1) + " (error " +
              fmt(100 * err, 1) + "%, need <= 25%)"};
}

Outcome predictor_vs_baseline() {
  auto config = default_config();
  config.seed = 42;
  config.n_stories = 300;
  const auto sim = simulate_corpus(config);
  Corpus train_corpus, test_corpus;
  for (std::size_t i = 0; i < sim.corpus.stories.size(); ++i) {
    (i < 200 ? train_corpus : test_corpus).stories.push_back(sim.corpus.stories[i]);
  }
  const auto train = build_dataset(train_corpus, sim.graph);
  const auto test = build_dataset(test_corpus, sim.graph);
  const auto tree = train_tree(train);
  const auto report = evaluate(tree, test);
  const auto cmp = baseline_compare(test_corpus, report);
  const auto cv = cross_validate(train, 10, 42);
  std::size_t positives = 0;
  for (const auto& ex : train) positives += ex.label.interesting ? 1 : 0;
  const double majority =
      static_cast<double>(std::max(positives, train.size() - positives)) / train.size();
  const double acc = cv.aggregate.accuracy();
  const bool precision_ok = cmp.predictor_precision && *cmp.predictor_precision > cmp.baseline_precision;
  return {precision_ok && acc >= majority + 0.05,
          "train 200 / test 100; predictor precision " +
              (cmp.predictor_precision ? fmt(*cmp.predictor_precision) : std::string("absent")) +
              " vs promotion baseline " + fmt(cmp.baseline_precision) + "; 10-fold accuracy " +
              fmt(acc) + " vs majority " + fmt(majority) + " (need >= +0.05)"};
}

std::map<std::string, std::string> digest_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = sha256_file(e.path());
  }
  return out;
}

// Runs the whole pipeline with relative paths from inside `dir`.
bool pipeline(const fs::path& dir, std::string& why) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto cwd = fs::current_path();
  fs::current_path(dir);
  auto config = default_config();
  config.n_stories = 150;
  {
    std::ofstream out("run.cfg");
    write_config(out, config);
  }
  const std::vector<std::string> inputs{"--graph", "sim/graph.tsv", "--stories",
                                        "sim/stories.jsonl", "--votes", "sim/votes.csv"};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), inputs.begin(), inputs.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  const std::vector<std::vector<std::string>> steps{
      {"simulate", "--config", "run.cfg", "--seed", "42", "--out", "sim"},
      with({"ingest"}, {}),
      with({"metrics"}, {"--k", "6,10,20", "--seed", "42", "--out", "metrics"}),
      with({"train"}, {"--seed", "42", "--out", "model"}),
      with({"eval"}, {"--tree", "model/tree.json", "--out", "eval"}),
  };
  bool ok = true;
  for (const auto& args : steps) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (code != kExitOk) {
      why = args.front() + " exited " + std::to_string(code) + ": " + err.str();
      ok = false;
      break;
    }
    std::ofstream log("stdout_" + args.front() + ".txt");
    log << out.str();
  }
  fs::current_path(cwd);
  return ok;
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "votespread_acceptance";
  std::string why;
  if (!pipeline(base / "a", why) || !pipeline(base / "b", why)) return {false, why};
  const auto a = digest_tree(base / "a");
  const auto b = digest_tree(base / "b");
  std::size_t differing = 0;
  for (const auto& [file, digest] : a) {
    const auto it = b.find(file);
    if (it == b.end() || it->second != digest) ++differing;
  }
  if (a.size() != b.size()) ++differing;
  fs::remove_all(base);
  return {differing == 0 && a.size() > 10,
          std::to_string(a.size()) + " output files per run, " + std::to_string(differing) +
              " differing digests"};
}

Outcome calibration() {
  const auto& sim = default_corpus();
  const auto stats = corpus_stats(sim.corpus, 100.0, {500.0}, {1500.0});
  const double below = stats.fraction_below.at(0).second;
  const double above = stats.fraction_above.at(0).second;
  auto inside = [](double x) { return x >= 0.10 && x <= 0.30; };
  return {inside(below) && inside(above),
          std::to_string(stats.story_count) + " stories, " + fmt(100 * below, 1) +
              "% below 500 votes, " + fmt(100 * above, 1) + "% above 1500 (each need 10-30%)"};
}

}  // namespace

int main() {
  report(1, "oracle equivalence (cascade metrics)", 5, cascade_oracles);
  report(2, "duality and monotonicity", 5, duality_monotonicity);
  report(3, "tree induction root split oracle", 10, tree_oracle);
  report(4, "inverse relationship on the default corpus", 60, inverse_relationship);
  report(5, "promotion boundary", 0, promotion_boundary);
  report(6, "vote dynamics shape", 0, vote_dynamics);
  report(7, "predictor beats promotion baseline", 60, predictor_vs_baseline);
  report(8, "determinism", 0, determinism);
  report(9, "final vote calibration", 0, calibration);
  std::printf("%s: %d of 9 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
