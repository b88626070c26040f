#include "votespread/interest_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "votespread/error.hpp"
#include "votespread/format.hpp"
#include "votespread/random.hpp"

namespace votespread {

using nlohmann::ordered_json;

const char* to_string(Attribute attribute) {
  return attribute == Attribute::V10 ? "v10" : "fans1";
}

Attribute parse_attribute(const std::string& name) {
  if (name == "v10") return Attribute::V10;
  if (name == "fans1") return Attribute::Fans1;
  throw Error(ErrorCode::ParseError, "unknown attribute '" + name + "'");
}

FeatureVector extract_features(const StoryRecord& story, const FanGraph& graph,
                               PrefixConvention convention) {
  const auto cascade = in_network_votes(story, graph, kFeaturePrefix, convention);
  FeatureVector f;
  f.v10 = cascade.value;
  f.short_prefix = cascade.short_prefix;
  f.fans1 = graph.fan_count(story.submitter);
  return f;
}

Label label_story(const StoryRecord& story, std::size_t threshold) {
  if (!story.final_votes) {
    throw Error(ErrorCode::MissingFinalVotes, "story '" + story.story_id + "' has no final_votes");
  }
  return Label{*story.final_votes >= threshold};
}

Dataset build_dataset(const Corpus& corpus, const FanGraph& graph, std::size_t threshold,
                      PrefixConvention convention) {
  Dataset out;
  out.reserve(corpus.stories.size());
  for (const auto& story : corpus.stories) {
    out.push_back({extract_features(story, graph, convention), label_story(story, threshold)});
  }
  return out;
}

double entropy(std::size_t negatives, std::size_t positives) {
  const double n = static_cast<double>(negatives + positives);
  if (n == 0) return 0.0;
  double h = 0.0;
  for (std::size_t c : {negatives, positives}) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

SplitScore score_split(std::array<std::size_t, 2> left, std::array<std::size_t, 2> right) {
  const double nl = static_cast<double>(left[0] + left[1]);
  const double nr = static_cast<double>(right[0] + right[1]);
  const double n = nl + nr;
  SplitScore s;
  if (nl == 0 || nr == 0) return s;
  const double parent = entropy(left[0] + right[0], left[1] + right[1]);
  s.gain = parent - (nl / n) * entropy(left[0], left[1]) - (nr / n) * entropy(right[0], right[1]);
  const double split_info = entropy(left[0] + left[1], right[0] + right[1]);
  s.ratio = split_info > 0 ? s.gain / split_info : 0.0;
  return s;
}

namespace {

constexpr double kMinGain = 1e-12;

struct Candidate {
  Attribute attribute = Attribute::Fans1;
  double threshold = 0.0;
  double score = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& params) : data_(data), params_(params) {}

  DecisionTree build() {
    std::vector<std::size_t> all(data_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> rows, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::array<std::size_t, 2> counts{};
    for (auto r : rows) ++counts[data_[r].label.interesting ? 1 : 0];
    tree_.nodes[id].counts = counts;

    const bool pure = counts[0] == 0 || counts[1] == 0;
    if (pure || depth >= params_.max_depth || rows.size() < 2 * std::max<std::size_t>(params_.min_leaf, 1)) {
      return id;
    }
    const auto best = best_split(rows);
    if (!best) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (data_[r].features.value(best->attribute) <= best->threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[id];
    node.leaf = false;
    node.attribute = best->attribute;
    node.threshold = best->threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  std::optional<Candidate> best_split(const std::vector<std::size_t>& rows) const {
    std::optional<Candidate> best;
    const std::size_t min_leaf = std::max<std::size_t>(params_.min_leaf, 1);
    for (Attribute attribute : kAttributes) {
      std::vector<std::pair<double, bool>> sorted;
      sorted.reserve(rows.size());
      for (auto r : rows) sorted.emplace_back(data_[r].features.value(attribute), data_[r].label.interesting);
      std::sort(sorted.begin(), sorted.end());
      std::array<std::size_t, 2> total{};
      for (const auto& [v, pos] : sorted) ++total[pos ? 1 : 0];
      std::array<std::size_t, 2> left{};
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        ++left[sorted[i].second ? 1 : 0];
        if (sorted[i].first == sorted[i + 1].first) continue;
        const std::size_t nl = i + 1;
        if (nl < min_leaf || sorted.size() - nl < min_leaf) continue;
        const std::array<std::size_t, 2> right{total[0] - left[0], total[1] - left[1]};
        const auto s = score_split(left, right);
        if (s.gain <= kMinGain) continue;
        const double score = params_.use_gain_ratio ? s.ratio : s.gain;
        if (!best || score > best->score + kMinGain) {
          best = Candidate{attribute, 0.5 * (sorted[i].first + sorted[i + 1].first), score};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const TreeParams& params_;
  DecisionTree tree_;
};

std::size_t depth_from(const DecisionTree& tree, int id) {
  const auto& n = tree.nodes[id];
  if (n.leaf) return 0;
  return 1 + std::max(depth_from(tree, n.left), depth_from(tree, n.right));
}

std::string counts_text(const TreeNode& n) {
  return "counts=" + std::to_string(n.counts[0]) + "/" + std::to_string(n.counts[1]);
}

void write_node(std::ostream& out, const DecisionTree& tree, int id, std::size_t indent) {
  const auto& n = tree.nodes[id];
  out << std::string(2 * indent, ' ');
  if (n.leaf) {
    out << "leaf " << (n.majority().interesting ? "interesting" : "not-interesting") << ' '
        << counts_text(n) << '\n';
    return;
  }
  out << to_string(n.attribute) << " <= " << format_double(n.threshold) << ' ' << counts_text(n)
      << '\n';
  write_node(out, tree, n.left, indent + 1);
  write_node(out, tree, n.right, indent + 1);
}

ordered_json node_to_json(const DecisionTree& tree, int id) {
  const auto& n = tree.nodes[id];
  ordered_json j;
  if (n.leaf) {
    j["leaf"] = true;
    j["label"] = n.majority().interesting ? "interesting" : "not-interesting";
    j["counts"] = {n.counts[0], n.counts[1]};
    return j;
  }
  j["attribute"] = to_string(n.attribute);
  j["threshold"] = n.threshold;
  j["counts"] = {n.counts[0], n.counts[1]};
  j["left"] = node_to_json(tree, n.left);
  j["right"] = node_to_json(tree, n.right);
  return j;
}

int node_from_json(DecisionTree& tree, const ordered_json& j) {
  if (!j.is_object() || !j.contains("counts") || !j["counts"].is_array() || j["counts"].size() != 2) {
    throw Error(ErrorCode::ParseError, "malformed tree node");
  }
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.nodes[id].counts = {j["counts"][0].get<std::size_t>(), j["counts"][1].get<std::size_t>()};
  if (j.value("leaf", false)) return id;
  const auto attribute = parse_attribute(j.at("attribute").get<std::string>());
  const double threshold = j.at("threshold").get<double>();
  const int l = node_from_json(tree, j.at("left"));
  const int r = node_from_json(tree, j.at("right"));
  auto& n = tree.nodes[id];
  n.leaf = false;
  n.attribute = attribute;
  n.threshold = threshold;
  n.left = l;
  n.right = r;
  return id;
}

}  // namespace

DecisionTree train_tree(const Dataset& dataset, const TreeParams& params) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "cannot train on an empty dataset");
  return TreeBuilder(dataset, params).build();
}

std::size_t DecisionTree::depth() const { return nodes.empty() ? 0 : depth_from(*this, 0); }

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

Label predict(const DecisionTree& tree, const FeatureVector& features) {
  int id = 0;
  while (!tree.nodes[id].leaf) {
    const auto& n = tree.nodes[id];
    id = features.value(n.attribute) <= n.threshold ? n.left : n.right;
  }
  return tree.nodes[id].majority();
}

std::optional<double> EvalReport::precision() const {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double EvalReport::accuracy() const {
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

void EvalReport::add(Label predicted, Label actual) {
  if (predicted.interesting) {
    ++(actual.interesting ? tp : fp);
  } else {
    ++(actual.interesting ? fn : tn);
  }
}

EvalReport& EvalReport::operator+=(const EvalReport& other) {
  tp += other.tp;
  tn += other.tn;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

EvalReport evaluate(const DecisionTree& tree, const Dataset& testset) {
  if (testset.empty()) throw Error(ErrorCode::EmptyTestset, "test set is empty");
  EvalReport report;
  for (const auto& ex : testset) report.add(predict(tree, ex.features), ex.label);
  return report;
}

CrossValidation cross_validate(const Dataset& dataset, std::size_t folds, std::uint64_t seed,
                               const TreeParams& params) {
  if (folds < 2 || dataset.size() < folds) {
    throw Error(ErrorCode::TooFewExamples,
                "need at least " + std::to_string(std::max<std::size_t>(folds, 2)) +
                    " examples and 2 folds, got " + std::to_string(dataset.size()) + " examples");
  }
  CrossValidation cv;
  cv.folds = folds;
  cv.seed = seed;
  cv.fold_of.assign(dataset.size(), 0);

  Rng rng = derive_rng(seed, 0);
  std::size_t dealt = 0;
  for (bool cls : {false, true}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset[i].label.interesting == cls) members.push_back(i);
    }
    shuffle(std::span<std::size_t>(members), rng);
    for (auto i : members) cv.fold_of[i] = dealt++ % folds;
  }

  for (std::size_t f = 0; f < folds; ++f) {
    Dataset train, test;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      (cv.fold_of[i] == f ? test : train).push_back(dataset[i]);
    }
    const auto tree = train_tree(train, params);
    cv.per_fold.push_back(evaluate(tree, test));
    cv.aggregate += cv.per_fold.back();
  }
  return cv;
}

BaselineComparison baseline_compare(const Corpus& corpus, const EvalReport& predictor,
                                    std::size_t threshold) {
  BaselineComparison out;
  for (const auto& story : corpus.stories) {
    if (!story.promoted) continue;
    ++out.promoted;
    if (label_story(story, threshold).interesting) ++out.promoted_interesting;
  }
  if (out.promoted == 0) throw Error(ErrorCode::NoPromotedStories, "no promoted stories to compare");
  out.baseline_precision =
      static_cast<double>(out.promoted_interesting) / static_cast<double>(out.promoted);
  out.predictor_precision = predictor.precision();
  return out;
}

void write_tree_text(std::ostream& out, const DecisionTree& tree) {
  if (!tree.nodes.empty()) write_node(out, tree, 0, 0);
}

ordered_json tree_to_json(const DecisionTree& tree) {
  return tree.nodes.empty() ? ordered_json(nullptr) : node_to_json(tree, 0);
}

DecisionTree tree_from_json(const ordered_json& json) {
  DecisionTree tree;
  try {
    node_from_json(tree, json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed tree: ") + e.what());
  }
  return tree;
}

void write_report_text(std::ostream& out, const EvalReport& report) {
  const auto p = report.precision();
  out << "tp: " << report.tp << '\n'
      << "tn: " << report.tn << '\n'
      << "fp: " << report.fp << '\n'
      << "fn: " << report.fn << '\n'
      << "total: " << report.total() << '\n'
      << "precision: " << (p ? format_double(*p) : std::string("absent")) << '\n'
      << "accuracy: " << format_double(report.accuracy()) << '\n';
}

void write_report_csv_header(std::ostream& out) {
  out << "name,tp,tn,fp,fn,total,precision,accuracy\n";
}

void write_report_csv_row(std::ostream& out, const std::string& name, const EvalReport& report) {
  const auto p = report.precision();
  out << name << ',' << report.tp << ',' << report.tn << ',' << report.fp << ',' << report.fn
      << ',' << report.total() << ',' << (p ? format_double(*p) : std::string()) << ','
      << format_double(report.accuracy()) << '\n';
}

}  // namespace votespread
