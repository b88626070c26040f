#include "votespread/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "votespread/cascade_metrics.hpp"
#include "votespread/digest.hpp"
#include "votespread/error.hpp"
#include "votespread/format.hpp"
#include "votespread/interest_predictor.hpp"
#include "votespread/social_graph.hpp"
#include "votespread/spread_simulator.hpp"
#include "votespread/vote_dynamics.hpp"
#include "votespread/vote_ledger.hpp"

namespace votespread {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string input_digests(const fs::path& graph, const fs::path& stories, const fs::path& votes) {
  return "graph_sha256=" + sha256_file(graph) + " stories_sha256=" + sha256_file(stories) +
         " votes_sha256=" + sha256_file(votes);
}

namespace {

struct Inputs {
  std::string graph, stories, votes;
};

// Collects the files a command writes and emits manifest.json last.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    const auto path = dir_ / name;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    files_.push_back(name);
    return out;
  }

  // Registers a file written by other means.
  void add(const std::string& name) { files_.push_back(name); }

  void write_manifest(const std::vector<std::string>& args, std::optional<std::uint64_t> seed,
                      const std::vector<std::pair<std::string, std::string>>& inputs,
                      const std::optional<std::string>& config_digest) const {
    ordered_json m;
    m["tool"] = "votespread";
    m["version"] = kToolVersion;
    m["command"] = args;
    m["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
    m["config_sha256"] = config_digest ? ordered_json(*config_digest) : ordered_json(nullptr);
    ordered_json in = ordered_json::object();
    for (const auto& [role, path] : inputs) {
      in[role] = {{"path", path}, {"sha256", sha256_file(path)}};
    }
    m["inputs"] = in;
    ordered_json outs = ordered_json::array();
    auto sorted = files_;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& f : sorted) outs.push_back({{"file", f}, {"sha256", sha256_file(dir_ / f)}});
    m["outputs"] = outs;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

std::vector<std::pair<std::string, std::string>> input_list(const Inputs& in) {
  return {{"graph", in.graph}, {"stories", in.stories}, {"votes", in.votes}};
}

void add_inputs(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--graph", in.graph, "fan edge list (fan<TAB>watched)")->required();
  cmd->add_option("--stories", in.stories, "stories JSON Lines")->required();
  cmd->add_option("--votes", in.votes, "votes CSV")->required();
}

std::string suffix(std::size_t k) { return "_k" + std::to_string(k) + ".csv"; }

std::string optional_text(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("absent");
}

int cmd_ingest(const Inputs& in, std::ostream& out) {
  const auto graph = load_graph(in.graph);
  const auto corpus = load_corpus(in.stories, in.votes);
  const auto violations = validate(corpus);
  const auto errors = error_count(violations);
  for (const auto& v : violations) {
    out << (v.severity == Severity::Error ? "violation" : "warning") << ": story " << v.story_id
        << " [" << v.rule << "] " << v.detail << '\n';
  }
  out << "users: " << graph.user_count() << '\n'
      << "edges: " << graph.edge_count() << '\n'
      << "stories: " << corpus.stories.size() << '\n'
      << errors << " violations\n";
  return errors == 0 ? kExitOk : kExitFindings;
}

struct MetricsOptions {
  std::vector<std::size_t> ks{10};
  std::string convention = "exclude";
  std::size_t permutations = 1000;
  std::uint64_t seed = 0;
  double influence_bin = 10.0;
  std::string influence = "all";
  std::string out_dir;
};

int cmd_metrics(const Inputs& in, const MetricsOptions& opt, const std::vector<std::string>& args,
                std::ostream& out) {
  const auto graph = load_graph(in.graph);
  const auto corpus = load_corpus(in.stories, in.votes);
  const auto convention = parse_convention(opt.convention);
  const auto rule = parse_audience_rule(opt.influence);
  const auto digests = input_digests(in.graph, in.stories, in.votes);
  OutputSet files(opt.out_dir);
  auto summary = files.open("summary.txt");
  summary << "convention: " << convention.name() << '\n'
          << "influence: " << to_string(rule) << '\n'
          << "permutation_seed: " << opt.seed << '\n';
  for (std::size_t k : opt.ks) {
    const TableHeader header{k, convention, rule, digests};
    const auto hist = cascade_histograms(corpus, graph, k, convention, opt.influence_bin, rule);
    const auto profile =
        interestingness_profile(corpus, graph, k, convention, opt.permutations, opt.seed);
    {
      auto f = files.open("profiles" + suffix(k));
      write_profiles_csv(f, header, hist.profiles);
    }
    {
      auto f = files.open("influence_hist" + suffix(k));
      write_histogram_csv(f, header, hist.influence, "influence");
    }
    {
      auto f = files.open("in_network_hist" + suffix(k));
      write_histogram_csv(f, header, hist.in_network, "in_network");
    }
    {
      auto f = files.open("interestingness" + suffix(k));
      write_interestingness_csv(f, header, profile);
    }
    std::ostringstream line;
    line << "k=" << k << " share_half_in_network=" << format_double(hist.share_half_in_network)
         << " share_ten_in_network=" << format_double(hist.share_ten_in_network)
         << " spearman_rho=" << format_double(profile.correlation.rho)
         << " permutation_p=" << format_double(profile.correlation.p_value) << '\n';
    summary << line.str();
    out << line.str();
  }
  summary.close();
  files.write_manifest(args, opt.seed, input_list(in), std::nullopt);
  return kExitOk;
}

struct TrainOptions {
  std::size_t threshold = kInterestingThreshold;
  std::size_t folds = 10;
  std::optional<std::uint64_t> seed;
  TreeParams params;
  bool plain_gain = false;
  std::string convention = "exclude";
  std::string out_dir;
};

int cmd_train(const Inputs& in, TrainOptions opt, const std::vector<std::string>& args,
              std::ostream& out, std::ostream& err) {
  if (!opt.seed) {
    err << "train: --seed is required (cross-validation shuffles folds)\n";
    return kExitInputError;
  }
  opt.params.use_gain_ratio = !opt.plain_gain;
  const auto graph = load_graph(in.graph);
  const auto corpus = load_corpus(in.stories, in.votes);
  const auto convention = parse_convention(opt.convention);
  const auto dataset = build_dataset(corpus, graph, opt.threshold, convention);
  const auto tree = train_tree(dataset, opt.params);
  const auto cv = cross_validate(dataset, opt.folds, *opt.seed, opt.params);

  OutputSet files(opt.out_dir);
  {
    auto f = files.open("tree.txt");
    write_tree_text(f, tree);
  }
  {
    ordered_json j;
    j["threshold_votes"] = opt.threshold;
    j["convention"] = convention.name();
    j["min_leaf"] = opt.params.min_leaf;
    j["max_depth"] = opt.params.max_depth;
    j["criterion"] = opt.params.use_gain_ratio ? "gain_ratio" : "gain";
    j["seed"] = *opt.seed;
    j["tree"] = tree_to_json(tree);
    auto f = files.open("tree.json");
    f << j.dump(2) << '\n';
  }
  {
    auto f = files.open("cv_report.txt");
    f << "folds: " << cv.folds << '\n' << "seed: " << cv.seed << '\n';
    write_report_text(f, cv.aggregate);
  }
  {
    auto f = files.open("cv_folds.csv");
    write_report_csv_header(f);
    for (std::size_t i = 0; i < cv.per_fold.size(); ++i) {
      write_report_csv_row(f, "fold" + std::to_string(i), cv.per_fold[i]);
    }
    write_report_csv_row(f, "aggregate", cv.aggregate);
  }
  files.write_manifest(args, opt.seed, input_list(in), std::nullopt);
  out << "trained on " << dataset.size() << " stories, depth " << tree.depth() << ", "
      << tree.leaf_count() << " leaves\n"
      << opt.folds << "-fold accuracy: " << format_double(cv.aggregate.accuracy()) << " ("
      << cv.aggregate.tp + cv.aggregate.tn << " correct, " << cv.aggregate.fp + cv.aggregate.fn
      << " wrong)\n";
  return kExitOk;
}

struct LoadedTree {
  DecisionTree tree;
  std::size_t threshold = kInterestingThreshold;
  PrefixConvention convention;
};

LoadedTree load_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("tree file: ") + e.what());
  }
  LoadedTree t;
  if (!j.is_object() || !j.contains("tree")) throw Error(ErrorCode::ParseError, "tree file lacks 'tree'");
  t.tree = tree_from_json(j["tree"]);
  t.threshold = j.value("threshold_votes", kInterestingThreshold);
  t.convention = parse_convention(j.value("convention", std::string("exclude-submitter")));
  return t;
}

int cmd_predict(const Inputs& in, const std::string& tree_path, const std::string& out_dir,
                const std::vector<std::string>& args, std::ostream& out) {
  const auto model = load_tree(tree_path);
  const auto graph = load_graph(in.graph);
  const auto corpus = load_corpus(in.stories, in.votes);
  OutputSet files(out_dir);
  std::size_t positives = 0;
  {
    auto f = files.open("predictions.csv");
    f << "story_id,v10,fans1,short_prefix,predicted\n";
    for (const auto& story : corpus.stories) {
      const auto features = extract_features(story, graph, model.convention);
      const auto label = predict(model.tree, features);
      positives += label.interesting ? 1 : 0;
      f << story.story_id << ',' << features.v10 << ',' << features.fans1 << ','
        << (features.short_prefix ? 1 : 0) << ','
        << (label.interesting ? "interesting" : "not-interesting") << '\n';
    }
  }
  auto inputs = input_list(in);
  inputs.emplace_back("tree", tree_path);
  files.write_manifest(args, std::nullopt, inputs, std::nullopt);
  out << corpus.stories.size() << " predictions, " << positives << " interesting\n";
  return kExitOk;
}

int cmd_eval(const Inputs& in, const std::string& tree_path, std::optional<std::size_t> threshold,
             const std::string& out_dir, const std::vector<std::string>& args, std::ostream& out) {
  const auto model = load_tree(tree_path);
  const std::size_t votes_threshold = threshold.value_or(model.threshold);
  const auto graph = load_graph(in.graph);
  const auto corpus = load_corpus(in.stories, in.votes);
  const auto testset = build_dataset(corpus, graph, votes_threshold, model.convention);
  const auto report = evaluate(model.tree, testset);

  OutputSet files(out_dir);
  std::ostringstream text;
  text << "threshold_votes: " << votes_threshold << '\n'
       << "convention: " << model.convention.name() << '\n';
  write_report_text(text, report);
  if (std::any_of(corpus.stories.begin(), corpus.stories.end(),
                  [](const StoryRecord& s) { return s.promoted; })) {
    const auto cmp = baseline_compare(corpus, report, votes_threshold);
    text << "promoted: " << cmp.promoted << '\n'
         << "promoted_interesting: " << cmp.promoted_interesting << '\n'
         << "baseline_precision: " << format_double(cmp.baseline_precision) << '\n'
         << "predictor_precision: " << optional_text(cmp.predictor_precision) << '\n';
  } else {
    text << "baseline_precision: absent\n";
  }
  {
    auto f = files.open("eval_report.txt");
    f << text.str();
  }
  {
    auto f = files.open("eval_report.csv");
    write_report_csv_header(f);
    write_report_csv_row(f, "test", report);
  }
  auto inputs = input_list(in);
  inputs.emplace_back("tree", tree_path);
  files.write_manifest(args, std::nullopt, inputs, std::nullopt);
  out << text.str();
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_dir, const std::vector<std::string>& args,
                 std::ostream& out, std::ostream& err) {
  if (!seed) {
    err << "simulate: --seed is required\n";
    return kExitInputError;
  }
  auto config = config_path.empty() ? SimulationConfig{} : load_config(config_path);
  config.seed = *seed;
  const auto sim = simulate_corpus(config);
  save_simulation(out_dir, sim);
  std::ostringstream effective;
  write_config(effective, config);
  {
    std::ofstream f(fs::path(out_dir) / "config.cfg", std::ios::binary);
    f << effective.str();
  }
  OutputSet files(out_dir);
  for (const char* name : {"graph.tsv", "stories.jsonl", "votes.csv", "traces.jsonl", "config.cfg"}) {
    files.add(name);
  }
  std::vector<std::pair<std::string, std::string>> inputs;
  if (!config_path.empty()) inputs.emplace_back("config", config_path);
  files.write_manifest(args, seed, inputs, sha256_hex(effective.str()));
  out << "simulated " << sim.submissions << " submissions, kept " << sim.corpus.stories.size()
      << " stories over " << sim.graph.user_count() << " users and " << sim.graph.edge_count()
      << " fan links\n";
  return kExitOk;
}

struct ReportOptions {
  double bin_width = 100.0;
  double tick_length = 600.0;
  std::size_t post_window = 144;
  std::vector<std::size_t> ks{6, 10, 20};
  std::string convention = "exclude";
  std::string influence = "all";
  std::string out_dir;
};

int cmd_report(const Inputs& in, const ReportOptions& opt, const std::vector<std::string>& args,
               std::ostream& out) {
  const auto graph = load_graph(in.graph);
  const auto corpus = load_corpus(in.stories, in.votes);
  const auto convention = parse_convention(opt.convention);
  const auto rule = parse_audience_rule(opt.influence);
  const auto stats = corpus_stats(corpus, opt.bin_width);
  OutputSet files(opt.out_dir);

  for (const auto& story : corpus.stories) {
    auto f = files.open("timeseries/" + story.story_id + ".csv");
    f << "position,seconds_since_submit,cumulative_votes\n";
    for (std::size_t i = 0; i < story.voters.size(); ++i) {
      f << i << ',';
      if (story.vote_times) f << format_double((*story.vote_times)[i] - story.vote_times->front());
      f << ',' << i + 1 << '\n';
    }
  }
  auto write_hist = [&](const std::string& name, const Histogram& h) {
    auto f = files.open(name);
    f << "bin_start,bin_end,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      f << format_double(static_cast<double>(i) * h.bin_width) << ','
        << format_double(static_cast<double>(i + 1) * h.bin_width) << ',' << h.counts[i] << '\n';
    }
  };
  write_hist("vote_count_hist.csv", stats.vote_counts);
  write_hist("submissions_per_user_hist.csv", stats.submissions_per_user);
  write_hist("votes_per_user_hist.csv", stats.votes_per_user);
  {
    auto f = files.open("quantiles.csv");
    f << "relation,threshold,fraction\n";
    for (const auto& [t, frac] : stats.fraction_below) {
      f << "below," << format_double(t) << ',' << format_double(frac) << '\n';
    }
    for (const auto& [t, frac] : stats.fraction_above) {
      f << "above," << format_double(t) << ',' << format_double(frac) << '\n';
    }
  }
  {
    auto f = files.open("promotion_rates.csv");
    f << "story_id,promotion_tick,pre_rate,post_rate\n";
    for (const auto& story : corpus.stories) {
      if (auto r = promotion_rates(story, opt.tick_length, opt.post_window)) {
        f << story.story_id << ',' << r->promotion_tick << ',' << format_double(r->pre_rate) << ','
          << format_double(r->post_rate) << '\n';
      }
    }
  }
  const auto digests = input_digests(in.graph, in.stories, in.votes);
  for (std::size_t k : opt.ks) {
    const TableHeader header{k, convention, rule, digests};
    const auto hist = cascade_histograms(corpus, graph, k, convention, 10.0, rule);
    auto f = files.open("in_network_hist" + suffix(k));
    write_histogram_csv(f, header, hist.in_network, "in_network");
    auto g = files.open("influence_hist" + suffix(k));
    write_histogram_csv(g, header, hist.influence, "influence");
    auto p = files.open("interestingness" + suffix(k));
    write_interestingness_csv(p, header, interestingness_profile(corpus, graph, k, convention, 0, 0));
  }
  files.write_manifest(args, std::nullopt, input_list(in), std::nullopt);
  out << "report for " << stats.story_count << " stories written to " << opt.out_dir << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cascade metrics, early popularity prediction and vote simulation", "votespread"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  Inputs in;
  auto* ingest = app.add_subcommand("ingest", "load and validate a graph and corpus");
  add_inputs(ingest, in);

  MetricsOptions mopt;
  auto* metrics = app.add_subcommand("metrics", "cascade tables and interestingness profile");
  add_inputs(metrics, in);
  metrics->add_option("--k", mopt.ks, "prefix lengths, e.g. 6,10,20")->delimiter(',');
  metrics->add_option("--convention", mopt.convention, "exclude | include (submitter in prefix)");
  metrics->add_option("--permutations", mopt.permutations, "Spearman permutation count");
  metrics->add_option("--seed", mopt.seed, "permutation test seed");
  metrics->add_option("--influence-bin", mopt.influence_bin, "influence histogram bin width");
  metrics->add_option("--influence", mopt.influence, "all | exclude-voters (prefix voters in the audience)");
  metrics->add_option("--out", mopt.out_dir)->required();

  TrainOptions topt;
  std::uint64_t train_seed = 0;
  auto* train = app.add_subcommand("train", "fit the decision tree and cross-validate");
  add_inputs(train, in);
  train->add_option("--threshold", topt.threshold, "interesting at >= this many final votes");
  train->add_option("--folds", topt.folds);
  auto* train_seed_opt = train->add_option("--seed", train_seed);
  train->add_option("--min-leaf", topt.params.min_leaf);
  train->add_option("--max-depth", topt.params.max_depth);
  train->add_flag("--plain-gain", topt.plain_gain, "split on information gain, not gain ratio");
  train->add_option("--convention", topt.convention);
  train->add_option("--out", topt.out_dir)->required();

  std::string tree_path, pred_out;
  auto* predict_cmd = app.add_subcommand("predict", "label stories with a trained tree");
  add_inputs(predict_cmd, in);
  predict_cmd->add_option("--tree", tree_path)->required();
  predict_cmd->add_option("--out", pred_out)->required();

  std::size_t eval_threshold = kInterestingThreshold;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "confusion counts and promotion-baseline comparison");
  add_inputs(eval, in);
  eval->add_option("--tree", tree_path)->required();
  auto* eval_threshold_opt = eval->add_option("--threshold", eval_threshold);
  eval->add_option("--out", eval_out)->required();

  std::string config_path, sim_out;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic graph and vote corpus");
  simulate->add_option("--config", config_path, "flat key = value config file");
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed);
  simulate->add_option("--out", sim_out)->required();

  ReportOptions ropt;
  auto* report = app.add_subcommand("report", "plot-ready series and tables");
  add_inputs(report, in);
  report->add_option("--bin-width", ropt.bin_width);
  report->add_option("--tick-length", ropt.tick_length, "seconds per tick for rate tables");
  report->add_option("--post-window", ropt.post_window, "ticks after promotion for the post rate");
  report->add_option("--k", ropt.ks)->delimiter(',');
  report->add_option("--convention", ropt.convention);
  report->add_option("--influence", ropt.influence);
  report->add_option("--out", ropt.out_dir)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitInputError;
  }

  std::vector<std::string> full{"votespread"};
  full.insert(full.end(), args.begin(), args.end());
  try {
    if (ingest->parsed()) return cmd_ingest(in, out);
    if (metrics->parsed()) return cmd_metrics(in, mopt, full, out);
    if (train->parsed()) {
      if (train_seed_opt->count() > 0) topt.seed = train_seed;
      return cmd_train(in, topt, full, out, err);
    }
    if (predict_cmd->parsed()) return cmd_predict(in, tree_path, pred_out, full, out);
    if (eval->parsed()) {
      std::optional<std::size_t> t;
      if (eval_threshold_opt->count() > 0) t = eval_threshold;
      return cmd_eval(in, tree_path, t, eval_out, full, out);
    }
    if (simulate->parsed()) {
      std::optional<std::uint64_t> seed;
      if (sim_seed_opt->count() > 0) seed = sim_seed;
      return cmd_simulate(config_path, seed, sim_out, full, out, err);
    }
    if (report->parsed()) return cmd_report(in, ropt, full, out);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternalError;
  }
  return kExitInternalError;
}

}  // namespace votespread
