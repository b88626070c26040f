#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "votespread/cascade_metrics.hpp"
#include "votespread/cli.hpp"
#include "votespread/social_graph.hpp"
#include "votespread/spread_simulator.hpp"
#include "votespread/vote_ledger.hpp"

using namespace votespread;
namespace fs = std::filesystem;

namespace {

const fs::path kStar = fs::path(VOTESPREAD_FIXTURES) / "star";

struct Run {
  int code = 0;
  std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "votespread_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> inputs(const fs::path& dir) {
  return {"--graph", (dir / "graph.tsv").string(), "--stories", (dir / "stories.jsonl").string(),
          "--votes", (dir / "votes.csv").string()};
}

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

// Submitters with many fans post dull stories; fanless submitters post hits.
fs::path separable_corpus(const std::string& name, bool all_dull = false) {
  const auto dir = scratch(name);
  FanGraph g;
  Corpus c;
  for (int i = 0; i < 20; ++i) {
    const bool hub = i % 2 == 0;
    const std::string submitter = "sub" + std::to_string(i);
    g.add_user(submitter);
    const int fans = hub ? 6 + i : 0;
    for (int f = 0; f < fans; ++f) g.add_edge("w" + std::to_string(i) + "_" + std::to_string(f), submitter);
    StoryRecord s;
    s.story_id = "t" + std::to_string(i);
    s.submitter = submitter;
    s.voters = {submitter, "v" + std::to_string(i) + "a", "v" + std::to_string(i) + "b"};
    s.final_votes = hub || all_dull ? 100 : 900;
    s.promoted = hub;
    if (hub) s.promotion_index = 43;
    c.stories.push_back(s);
  }
  save_graph(dir / "graph.tsv", g);
  save_corpus(dir / "stories.jsonl", dir / "votes.csv", c);
  return dir;
}

}  // namespace

TEST_CASE("ingest") {
  const auto ok = cli(with({"ingest"}, inputs(kStar)));
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find("0 violations") != std::string::npos);

  const auto dir = scratch("ingest_bad");
  fs::copy(kStar / "graph.tsv", dir / "graph.tsv");
  fs::copy(kStar / "stories.jsonl", dir / "stories.jsonl");
  std::string votes = slurp(kStar / "votes.csv");
  const auto second_row = votes.find('\n', votes.find('\n') + 1) + 1;
  votes.insert(second_row, "star,1\n");
  std::ofstream(dir / "votes.csv", std::ios::binary) << votes;
  const auto bad = cli(with({"ingest"}, inputs(dir)));
  CHECK(bad.code == kExitInputError);
  CHECK(bad.err.find("line 3") != std::string::npos);

  SUBCASE("validation findings exit 1") {
    std::string stories = slurp(kStar / "stories.jsonl");
    stories.replace(stories.find("\"final_votes\":120"), 17, "\"final_votes\":2");
    std::ofstream(dir / "stories.jsonl", std::ios::binary) << stories;
    fs::copy(kStar / "votes.csv", dir / "votes.csv", fs::copy_options::overwrite_existing);
    const auto found = cli(with({"ingest"}, inputs(dir)));
    CHECK(found.code == kExitFindings);
    CHECK(found.out.find("final-votes") != std::string::npos);
  }
}

TEST_CASE("argument and input errors exit 2") {
  CHECK(cli({"frobnicate"}).code == kExitInputError);
  CHECK(cli({"metrics", "--out", "x"}).code == kExitInputError);
  const auto missing = cli({"ingest", "--graph", "/nonexistent/g.tsv", "--stories",
                            (kStar / "stories.jsonl").string(), "--votes",
                            (kStar / "votes.csv").string()});
  CHECK(missing.code == kExitInputError);
  CHECK(cli({"metrics", "--convention", "sideways", "--out", scratch("conv").string(), "--graph",
             (kStar / "graph.tsv").string(), "--stories", (kStar / "stories.jsonl").string(),
             "--votes", (kStar / "votes.csv").string()})
            .code == kExitInputError);
}

TEST_CASE("metrics on the star fixture") {
  const auto out = scratch("metrics");
  const auto run = cli(with({"metrics", "--k", "10", "--seed", "3", "--out", out.string()}, inputs(kStar)));
  REQUIRE(run.code == kExitOk);

  const auto graph = load_graph(kStar / "graph.tsv");
  const auto corpus = load_corpus(kStar / "stories.jsonl", kStar / "votes.csv");
  const auto star = cascade_profile(*corpus.find("star"), graph, 10);
  CHECK(star.in_network_k == 10);
  CHECK(star.fraction_k == 1.0);
  CHECK(cascade_profile(*corpus.find("scattered"), graph, 10).in_network_k == 0);

  // The CLI table is byte-identical to the library writer's output.
  const TableHeader header{
      10, {}, AudienceRule::AllWatchers,
      input_digests(kStar / "graph.tsv", kStar / "stories.jsonl", kStar / "votes.csv")};
  std::ostringstream expected;
  write_profiles_csv(expected, header, cascade_histograms(corpus, graph, 10).profiles);
  CHECK(slurp(out / "profiles_k10.csv") == expected.str());
  CHECK(slurp(out / "profiles_k10.csv").find("star,10,13,10,1,0") != std::string::npos);

  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["outputs"].size() == 5);
}

TEST_CASE("train, predict and eval") {
  const auto data = separable_corpus("separable");
  const auto model = scratch("model");
  CHECK(cli(with({"train", "--out", model.string()}, inputs(data))).code == kExitInputError);
  const auto trained = cli(with({"train", "--seed", "5", "--out", model.string()}, inputs(data)));
  REQUIRE(trained.code == kExitOk);
  const auto tree = nlohmann::json::parse(slurp(model / "tree.json"));
  CHECK(tree["tree"]["attribute"] == "fans1");
  CHECK(tree["tree"]["left"]["leaf"] == true);
  CHECK(tree["tree"]["right"]["leaf"] == true);
  CHECK(slurp(model / "cv_report.txt").find("accuracy: 1") != std::string::npos);

  const auto pred = scratch("predict");
  REQUIRE(cli(with({"predict", "--tree", (model / "tree.json").string(), "--out", pred.string()},
                   inputs(data)))
              .code == kExitOk);
  const auto predictions = slurp(pred / "predictions.csv");
  CHECK(predictions.find("t0,0,6,1,not-interesting\n") != std::string::npos);
  CHECK(predictions.find("t1,0,0,1,interesting\n") != std::string::npos);

  const auto eval = scratch("eval");
  REQUIRE(cli(with({"eval", "--tree", (model / "tree.json").string(), "--out", eval.string()},
                   inputs(data)))
              .code == kExitOk);
  const auto text = slurp(eval / "eval_report.txt");
  CHECK(text.find("accuracy: 1") != std::string::npos);
  CHECK(text.find("baseline") != std::string::npos);

  SUBCASE("no positive predictions leaves precision absent") {
    const auto dull = separable_corpus("dull", true);
    const auto dull_model = scratch("dull_model");
    REQUIRE(cli(with({"train", "--seed", "5", "--out", dull_model.string()}, inputs(dull))).code ==
            kExitOk);
    const auto dull_eval = scratch("dull_eval");
    REQUIRE(cli(with({"eval", "--tree", (dull_model / "tree.json").string(), "--out",
                      dull_eval.string()},
                     inputs(dull)))
                .code == kExitOk);
    CHECK(slurp(dull_eval / "eval_report.txt").find("precision: absent") != std::string::npos);
  }
}

TEST_CASE("simulate") {
  const auto dir = scratch("simulate");
  const auto cfg = dir / "small.cfg";
  {
    SimulationConfig c;
    c.n_users = 2000;
    c.n_stories = 5;
    std::ofstream out(cfg);
    write_config(out, c);
  }
  CHECK(cli({"simulate", "--config", cfg.string(), "--out", (dir / "x").string()}).code ==
        kExitInputError);

  const auto a = cli({"simulate", "--config", cfg.string(), "--seed", "8", "--out", (dir / "a").string()});
  const auto b = cli({"simulate", "--config", cfg.string(), "--seed", "8", "--out", (dir / "b").string()});
  REQUIRE(a.code == kExitOk);
  REQUIRE(b.code == kExitOk);
  const auto ma = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  const auto mb = nlohmann::json::parse(slurp(dir / "b" / "manifest.json"));
  CHECK(ma["outputs"] == mb["outputs"]);
  CHECK(ma["seed"] == 8);
  const auto corpus = load_corpus(dir / "a" / "stories.jsonl", dir / "a" / "votes.csv");
  CHECK(corpus.stories.size() == 5);
  CHECK(validate(corpus).empty());
  // The seed flag wins over the config file's seed.
  CHECK(load_config(dir / "a" / "config.cfg").seed == 8);

  const auto c = cli({"simulate", "--config", cfg.string(), "--seed", "9", "--out", (dir / "c").string()});
  REQUIRE(c.code == kExitOk);
  CHECK(slurp(dir / "c" / "votes.csv") != slurp(dir / "a" / "votes.csv"));

  SUBCASE("zero stories gives header-only files") {
    {
      std::ofstream out(cfg);
      SimulationConfig z;
      z.n_users = 100;
      z.n_stories = 0;
      write_config(out, z);
    }
    REQUIRE(cli({"simulate", "--config", cfg.string(), "--seed", "1", "--out", (dir / "z").string()})
                .code == kExitOk);
    CHECK(slurp(dir / "z" / "stories.jsonl").empty());
    CHECK(slurp(dir / "z" / "votes.csv") == "story_id,position,user_id\n");
    CHECK(slurp(dir / "z" / "traces.jsonl").empty());
  }
  SUBCASE("a bad config key is an input error") {
    std::ofstream(cfg) << "n_userz = 5\n";
    const auto bad = cli({"simulate", "--config", cfg.string(), "--seed", "1", "--out", (dir / "q").string()});
    CHECK(bad.code == kExitInputError);
    CHECK(bad.err.find("n_userz") != std::string::npos);
  }
}

TEST_CASE("report") {
  const auto dir = scratch("report_in");
  const auto graph = load_graph(kStar / "graph.tsv");
  auto corpus = load_corpus(kStar / "stories.jsonl", kStar / "votes.csv");
  corpus.stories.resize(1);
  save_graph(dir / "graph.tsv", graph);
  save_corpus(dir / "stories.jsonl", dir / "votes.csv", corpus);

  const auto out = scratch("report_out");
  const auto run = cli(with({"report", "--out", out.string()}, inputs(dir)));
  REQUIRE(run.code == kExitOk);
  std::size_t series = 0;
  for (const auto& e : fs::directory_iterator(out / "timeseries")) {
    ++series;
    CHECK(e.path().filename() == "star.csv");
  }
  CHECK(series == 1);
  const auto star = slurp(out / "timeseries" / "star.csv");
  CHECK(star.find("position,seconds_since_submit,cumulative_votes\n") == 0);
  CHECK(star.find("10,600,11\n") != std::string::npos);
  CHECK(fs::exists(out / "vote_count_hist.csv"));
  CHECK(fs::exists(out / "manifest.json"));
}
