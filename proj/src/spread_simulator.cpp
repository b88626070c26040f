#include "votespread/spread_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "votespread/error.hpp"
#include "votespread/format.hpp"
#include "votespread/random.hpp"

namespace votespread {

namespace {

constexpr std::uint64_t kGraphStream = 0xfa9e5ULL;
constexpr std::size_t kBatch = 64;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            std::optional<std::size_t> line = std::nullopt) {
  throw Error(ErrorCode::ConfigError, "invalid value '" + value + "' for key '" + key + "'", line);
}

double parse_real(const std::string& key, const std::string& value, std::optional<std::size_t> line) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value, line);
  }
  if (used != value.size() || !std::isfinite(out)) bad_value(key, value, line);
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& value,
                        std::optional<std::size_t> line) {
  if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
    bad_value(key, value, line);
  }
  try {
    return static_cast<std::size_t>(std::stoull(value));
  } catch (const std::exception&) {
    bad_value(key, value, line);
  }
}

// name(a, b, ...) -> {a, b, ...}
std::vector<std::string> call_args(const std::string& key, const std::string& value,
                                   const std::string& name, std::optional<std::size_t> line) {
  if (value.size() < name.size() + 2 || value.compare(0, name.size() + 1, name + "(") != 0 ||
      value.back() != ')') {
    return {};
  }
  std::vector<std::string> args;
  std::stringstream inner(value.substr(name.size() + 1, value.size() - name.size() - 2));
  std::string arg;
  while (std::getline(inner, arg, ',')) args.push_back(trim(arg));
  if (args.empty()) bad_value(key, value, line);
  return args;
}

void check_probability(const char* key, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::ConfigError,
                std::string("'") + key + "' must be a probability in [0,1], got " + format_double(p));
  }
}

double decay_factor(std::size_t ticks_since, double half_life) {
  return std::exp2(-static_cast<double>(ticks_since) / half_life);
}

// Calls visit(i) for every index in [0, n) that succeeds an independent
// Bernoulli(p) trial, jumping over the failures.
template <typename Visit>
void bernoulli_scan(Rng& rng, std::size_t n, double p, Visit&& visit) {
  if (n == 0 || !(p > 0.0)) return;
  if (p >= 1.0) {
    for (std::size_t i = 0; i < n; ++i) visit(i);
    return;
  }
  std::uint64_t i = geometric_skip(rng, p);
  while (i < n) {
    visit(static_cast<std::size_t>(i));
    const auto skip = geometric_skip(rng, p);
    if (skip >= n) break;
    i += skip + 1;
  }
}

std::size_t sample_fan_count(const FanDegreeDistribution& dist, std::size_t n_users, Rng& rng) {
  if (dist.kind == FanDegreeDistribution::Kind::Fixed) return dist.fixed;
  const double u = uniform01_open_left(rng);
  const double x = dist.scale * std::pow(u, -1.0 / (dist.exponent - 1.0));
  const double k = std::floor(x) - 1.0;
  const double cap = static_cast<double>(n_users > 0 ? n_users - 1 : 0);
  if (!(k < cap)) return static_cast<std::size_t>(cap);
  return k <= 0 ? 0 : static_cast<std::size_t>(k);
}

}  // namespace

std::string FanDegreeDistribution::to_string() const {
  if (kind == Kind::Fixed) return "fixed(" + std::to_string(fixed) + ")";
  if (scale == 1.0) return "power_law(" + format_double(exponent) + ")";
  return "power_law(" + format_double(exponent) + "," + format_double(scale) + ")";
}

std::string InterestDistribution::to_string() const {
  return "log_normal(" + format_double(mu) + "," + format_double(sigma) + ")";
}

void SimulationConfig::check() const {
  if (n_users < 1) throw Error(ErrorCode::ConfigError, "'n_users' must be at least 1");
  if (fan_degree.kind == FanDegreeDistribution::Kind::PowerLaw &&
      !(fan_degree.exponent > 1.0 && fan_degree.scale > 0.0)) {
    throw Error(ErrorCode::ConfigError,
                "'fan_degree_distribution' power_law needs exponent > 1 and scale > 0");
  }
  if (!(interest.sigma >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "'interestingness_distribution' sigma must be >= 0");
  }
  check_probability("p_discover", p_discover);
  check_probability("p_front", p_front);
  check_probability("p_fan_view", p_fan_view);
  if (promotion_threshold < 1) {
    throw Error(ErrorCode::ConfigError, "'promotion_threshold' must be at least 1");
  }
  if (!(decay_half_life > 0.0)) throw Error(ErrorCode::ConfigError, "'decay_half_life' must be > 0");
  if (!(tick_length > 0.0)) throw Error(ErrorCode::ConfigError, "'tick_length' must be > 0");
  if (!(submission_interval >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "'submission_interval' must be >= 0");
  }
  if (max_ticks < 1) throw Error(ErrorCode::ConfigError, "'max_ticks' must be at least 1");
  if (patience < 1) throw Error(ErrorCode::ConfigError, "'patience' must be at least 1");
}

SimulationConfig read_config(std::istream& in) {
  SimulationConfig c;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "expected 'key = value'", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::optional<std::size_t> at = line_no;
    if (key == "n_users") {
      c.n_users = parse_count(key, value, at);
    } else if (key == "fan_degree_distribution") {
      if (auto a = call_args(key, value, "power_law", at); !a.empty()) {
        if (a.size() > 2) bad_value(key, value, at);
        c.fan_degree.kind = FanDegreeDistribution::Kind::PowerLaw;
        c.fan_degree.exponent = parse_real(key, a[0], at);
        c.fan_degree.scale = a.size() == 2 ? parse_real(key, a[1], at) : 1.0;
      } else if (auto f = call_args(key, value, "fixed", at); f.size() == 1) {
        c.fan_degree.kind = FanDegreeDistribution::Kind::Fixed;
        c.fan_degree.fixed = parse_count(key, f[0], at);
      } else {
        bad_value(key, value, at);
      }
    } else if (key == "n_stories") {
      c.n_stories = parse_count(key, value, at);
    } else if (key == "interestingness_distribution") {
      auto a = call_args(key, value, "log_normal", at);
      if (a.size() != 2) bad_value(key, value, at);
      c.interest.mu = parse_real(key, a[0], at);
      c.interest.sigma = parse_real(key, a[1], at);
    } else if (key == "p_discover") {
      c.p_discover = parse_real(key, value, at);
    } else if (key == "p_front") {
      c.p_front = parse_real(key, value, at);
    } else if (key == "p_fan_view") {
      c.p_fan_view = parse_real(key, value, at);
    } else if (key == "fan_view_window") {
      c.fan_view_window = parse_count(key, value, at);
    } else if (key == "promotion_threshold") {
      c.promotion_threshold = parse_count(key, value, at);
    } else if (key == "promotion_window") {
      c.promotion_window = parse_count(key, value, at);
    } else if (key == "queue_lifetime") {
      c.queue_lifetime = parse_count(key, value, at);
    } else if (key == "decay_half_life") {
      c.decay_half_life = parse_real(key, value, at);
    } else if (key == "tick_length") {
      c.tick_length = parse_real(key, value, at);
    } else if (key == "submission_interval") {
      c.submission_interval = parse_real(key, value, at);
    } else if (key == "max_ticks") {
      c.max_ticks = parse_count(key, value, at);
    } else if (key == "patience") {
      c.patience = parse_count(key, value, at);
    } else if (key == "corpus_scope") {
      if (value == "front_page") {
        c.scope = CorpusScope::FrontPage;
      } else if (value == "all") {
        c.scope = CorpusScope::All;
      } else {
        bad_value(key, value, at);
      }
    } else if (key == "max_submissions") {
      c.max_submissions = parse_count(key, value, at);
    } else if (key == "threads") {
      c.threads = parse_count(key, value, at);
    } else if (key == "seed") {
      c.seed = parse_count(key, value, at);
    } else {
      throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'", line_no);
    }
  }
  c.check();
  return c;
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_config(in);
}

void write_config(std::ostream& out, const SimulationConfig& c) {
  out << "n_users = " << c.n_users << '\n'
      << "fan_degree_distribution = " << c.fan_degree.to_string() << '\n'
      << "n_stories = " << c.n_stories << '\n'
      << "interestingness_distribution = " << c.interest.to_string() << '\n'
      << "p_discover = " << format_double(c.p_discover) << '\n'
      << "p_front = " << format_double(c.p_front) << '\n'
      << "p_fan_view = " << format_double(c.p_fan_view) << '\n'
      << "fan_view_window = " << c.fan_view_window << '\n'
      << "promotion_threshold = " << c.promotion_threshold << '\n'
      << "promotion_window = " << c.promotion_window << '\n'
      << "queue_lifetime = " << c.queue_lifetime << '\n'
      << "decay_half_life = " << format_double(c.decay_half_life) << '\n'
      << "tick_length = " << format_double(c.tick_length) << '\n'
      << "submission_interval = " << format_double(c.submission_interval) << '\n'
      << "max_ticks = " << c.max_ticks << '\n'
      << "patience = " << c.patience << '\n'
      << "corpus_scope = " << (c.scope == CorpusScope::FrontPage ? "front_page" : "all") << '\n'
      << "max_submissions = " << c.max_submissions << '\n'
      << "threads = " << c.threads << '\n'
      << "seed = " << c.seed << '\n';
}

const char* to_string(Channel channel) {
  switch (channel) {
    case Channel::Queue: return "queue";
    case Channel::Front: return "front";
    case Channel::Fan: return "fan";
  }
  return "?";
}

std::string user_name(NodeId id, std::size_t n_users) {
  const std::size_t width = std::to_string(n_users > 0 ? n_users - 1 : 0).size();
  std::string digits = std::to_string(id);
  return "u" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

FanGraph generate_graph(const SimulationConfig& config, std::uint64_t seed) {
  config.check();
  const std::size_t n = config.n_users;
  FanGraph graph;
  for (std::size_t u = 0; u < n; ++u) graph.add_user(user_name(static_cast<NodeId>(u), n));

  Rng rng = derive_rng(seed, kGraphStream);
  std::vector<std::size_t> degree(n);
  for (auto& d : degree) d = sample_fan_count(config.fan_degree, n, rng);

  std::vector<NodeId> others;
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t d = degree[u];
    if (d == 0) continue;
    if (d > n - 1) {
      throw Error(ErrorCode::InfeasibleDegreeSequence,
                  "user " + std::to_string(u) + " needs " + std::to_string(d) + " fans but only " +
                      std::to_string(n - 1) + " other users exist");
    }
    const auto watched = static_cast<NodeId>(u);
    if (4 * d >= n) {
      // Dense row: partial shuffle of every other user.
      others.clear();
      for (std::size_t v = 0; v < n; ++v) {
        if (v != u) others.push_back(static_cast<NodeId>(v));
      }
      for (std::size_t i = 0; i < d; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_index(rng, others.size() - i));
        std::swap(others[i], others[j]);
        graph.add_edge(others[i], watched);
      }
      continue;
    }
    std::size_t placed = 0;
    std::size_t attempts = 0;
    const std::size_t budget = 100 * d + 100;
    while (placed < d) {
      if (++attempts > budget) {
        throw Error(ErrorCode::InfeasibleDegreeSequence,
                    "could not place fans for user " + std::to_string(u));
      }
      const auto fan = static_cast<NodeId>(uniform_index(rng, n));
      if (fan == watched) continue;
      if (graph.add_edge(fan, watched)) ++placed;
    }
  }
  return graph;
}

SimulatedStory simulate_story(const FanGraph& graph, const StorySetup& setup,
                              const SimulationConfig& config, std::uint64_t seed) {
  const std::size_t n = graph.user_count();
  const double r = std::clamp(setup.interest, 0.0, 1.0);
  Rng rng = derive_rng(seed, 0);

  SimulatedStory out;
  auto& rec = out.record;
  auto& trace = out.trace;
  rec.story_id = setup.story_id;
  rec.submitter = graph.name(setup.submitter);
  rec.submit_time = setup.submit_time;
  trace.story_id = setup.story_id;
  trace.submitter = setup.submitter;
  trace.interest = r;

  std::vector<char> voted(n, 0);
  std::vector<char> chosen(n, 0);
  // A fan may be exposed several times; only the most recent entry is live.
  struct Exposure {
    NodeId user;
    std::size_t expires;
  };
  std::vector<Exposure> exposures;
  std::vector<std::size_t> exposed_until(n, 0);
  std::size_t head = 0;

  std::vector<double> times;
  std::size_t vote_count = 0;
  auto cast = [&](NodeId user, std::size_t tick) {
    voted[user] = 1;
    rec.voters.push_back(graph.name(user));
    times.push_back(setup.submit_time + static_cast<double>(tick) * config.tick_length);
    ++vote_count;
    const std::size_t expires = tick + config.fan_view_window;
    for (NodeId fan : graph.fans_of(user)) {
      if (voted[fan]) continue;
      exposed_until[fan] = expires;
      exposures.push_back({fan, expires});
    }
  };
  cast(setup.submitter, 0);

  std::size_t last_vote_tick = 0;
  std::optional<std::size_t> promoted_at;
  std::vector<std::pair<NodeId, Channel>> fresh;

  for (std::size_t t = 1; t <= config.max_ticks && vote_count < n; ++t) {
    fresh.clear();

    while (head < exposures.size() && exposures[head].expires < t) ++head;
    const std::size_t live_end = exposures.size();
    bernoulli_scan(rng, live_end - head, config.p_fan_view * r, [&](std::size_t i) {
      const auto& e = exposures[head + i];
      if (voted[e.user] || chosen[e.user] || exposed_until[e.user] != e.expires) return;
      chosen[e.user] = 1;
      fresh.emplace_back(e.user, Channel::Fan);
    });

    double p_interest = 0.0;
    Channel channel = Channel::Queue;
    if (promoted_at) {
      channel = Channel::Front;
      p_interest = config.p_front * r * decay_factor(t - *promoted_at - 1, config.decay_half_life);
    } else if (t <= config.queue_lifetime) {
      p_interest = config.p_discover * r;
    }
    bernoulli_scan(rng, n, p_interest, [&](std::size_t i) {
      const auto user = static_cast<NodeId>(i);
      if (voted[user] || chosen[user]) return;
      chosen[user] = 1;
      fresh.emplace_back(user, channel);
    });

    if (!fresh.empty()) {
      shuffle(std::span<std::pair<NodeId, Channel>>(fresh), rng);
      for (const auto& [user, ch] : fresh) {
        chosen[user] = 0;
        cast(user, t);
        trace.events.push_back({t, user, ch});
      }
      last_vote_tick = t;
    }

    if (!promoted_at && vote_count >= config.promotion_threshold && t <= config.promotion_window) {
      promoted_at = t;
      rec.promoted = true;
      rec.promotion_index = vote_count;
      trace.promotion_tick = t;
    }

    const bool settled = promoted_at || t >= config.queue_lifetime;
    if (settled && t - last_vote_tick >= config.patience) break;
  }

  rec.final_votes = rec.voters.size();
  rec.vote_times = std::move(times);
  return out;
}

SimulatedCorpus simulate_corpus(const SimulationConfig& config) {
  config.check();
  SimulatedCorpus out;
  out.graph = generate_graph(config, config.seed);
  const std::size_t n = out.graph.user_count();

  std::vector<double> cumulative(n);
  double total = 0.0;
  for (NodeId u = 0; u < n; ++u) {
    total += 1.0 + static_cast<double>(out.graph.fans_of(u).size());
    cumulative[u] = total;
  }

  const std::size_t width = std::to_string(config.max_submissions).size();
  auto run_one = [&](std::size_t index) {
    Rng rng = derive_rng(config.seed, index + 1);
    StorySetup setup;
    const double pick = uniform01(rng) * total;
    setup.submitter = static_cast<NodeId>(
        std::min<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                  cumulative.begin(),
                              n - 1));
    setup.interest =
        std::min(1.0, std::exp(config.interest.mu + config.interest.sigma * standard_normal(rng)));
    std::string digits = std::to_string(index);
    setup.story_id = "s" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
    setup.submit_time = static_cast<double>(index) * config.submission_interval;
    return simulate_story(out.graph, setup, config, rng());
  };

  const std::size_t threads =
      config.threads > 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());

  std::size_t next = 0;
  while (out.corpus.stories.size() < config.n_stories && next < config.max_submissions) {
    const std::size_t batch = std::min(kBatch * threads, config.max_submissions - next);
    std::vector<SimulatedStory> results(batch);
    std::vector<std::future<void>> workers;
    for (std::size_t w = 0; w < threads; ++w) {
      workers.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < batch; i += threads) results[i] = run_one(next + i);
      }));
    }
    for (auto& f : workers) f.get();
    for (std::size_t i = 0; i < batch && out.corpus.stories.size() < config.n_stories; ++i) {
      ++out.submissions;
      if (config.scope == CorpusScope::FrontPage && !results[i].record.promoted) continue;
      out.corpus.stories.push_back(std::move(results[i].record));
      out.traces.push_back(std::move(results[i].trace));
    }
    next += batch;
  }
  if (out.corpus.stories.size() < config.n_stories) {
    throw Error(ErrorCode::ConfigError,
                "only " + std::to_string(out.corpus.stories.size()) + " of " +
                    std::to_string(config.n_stories) + " stories reached the front page within " +
                    "max_submissions = " + std::to_string(config.max_submissions));
  }
  return out;
}

void write_traces(std::ostream& out, const FanGraph& graph, const std::vector<SimTrace>& traces) {
  for (const auto& trace : traces) {
    for (const auto& e : trace.events) {
      nlohmann::ordered_json j;
      j["story_id"] = trace.story_id;
      j["tick"] = e.tick;
      j["user_id"] = graph.name(e.user);
      j["channel"] = to_string(e.channel);
      out << j.dump() << '\n';
    }
  }
}

std::vector<TraceLine> read_traces(std::istream& in) {
  std::vector<TraceLine> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TraceLine t;
      t.story_id = j.at("story_id").get<std::string>();
      t.tick = j.at("tick").get<std::size_t>();
      t.user = j.at("user_id").get<std::string>();
      const auto ch = j.at("channel").get<std::string>();
      if (ch == "queue") {
        t.channel = Channel::Queue;
      } else if (ch == "front") {
        t.channel = Channel::Front;
      } else if (ch == "fan") {
        t.channel = Channel::Fan;
      } else {
        throw Error(ErrorCode::ParseError, "unknown channel '" + ch + "'", line_no);
      }
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("bad trace line: ") + e.what(), line_no);
    }
  }
  return out;
}

CorpusFiles corpus_files(const std::filesystem::path& dir) {
  return {dir / "graph.tsv", dir / "stories.jsonl", dir / "votes.csv", dir / "traces.jsonl"};
}

void save_simulation(const std::filesystem::path& dir, const SimulatedCorpus& sim) {
  std::filesystem::create_directories(dir);
  const auto files = corpus_files(dir);
  save_graph(files.graph, sim.graph);
  save_corpus(files.stories, files.votes, sim.corpus);
  std::ofstream traces(files.traces, std::ios::binary);
  if (!traces) throw Error(ErrorCode::IoError, "cannot write " + files.traces.string());
  write_traces(traces, sim.graph, sim.traces);
}

}  // namespace votespread
