#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "votespread/cascade_metrics.hpp"
#include "votespread/social_graph.hpp"
#include "votespread/vote_ledger.hpp"

namespace votespread {

inline constexpr std::size_t kInterestingThreshold = 520;
inline constexpr std::size_t kFeaturePrefix = 10;

// Attributes in name order; ties between equally good splits go to the
// smaller enumerator.
enum class Attribute : std::uint8_t { Fans1 = 0, V10 = 1 };
inline constexpr std::array<Attribute, 2> kAttributes{Attribute::Fans1, Attribute::V10};

const char* to_string(Attribute attribute);
Attribute parse_attribute(const std::string& name);

struct FeatureVector {
  std::size_t v10 = 0;    // in-network votes among the first ten
  std::size_t fans1 = 0;  // fans of the submitter
  bool short_prefix = false;

  double value(Attribute attribute) const {
    return static_cast<double>(attribute == Attribute::V10 ? v10 : fans1);
  }
};

struct Label {
  bool interesting = false;
  bool operator==(const Label&) const = default;
};

struct Example {
  FeatureVector features;
  Label label;
};

using Dataset = std::vector<Example>;

FeatureVector extract_features(const StoryRecord& story, const FanGraph& graph,
                               PrefixConvention convention = {});

// interesting <=> final_votes >= threshold. Throws MissingFinalVotes.
Label label_story(const StoryRecord& story, std::size_t threshold = kInterestingThreshold);

Dataset build_dataset(const Corpus& corpus, const FanGraph& graph,
                      std::size_t threshold = kInterestingThreshold,
                      PrefixConvention convention = {});

struct TreeParams {
  std::size_t min_leaf = 2;
  std::size_t max_depth = 8;
  bool use_gain_ratio = true;
};

// Binary tree stored flat; node 0 is the root. Values <= threshold go left.
struct TreeNode {
  bool leaf = true;
  Attribute attribute = Attribute::Fans1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<std::size_t, 2> counts{};  // {not interesting, interesting}

  Label majority() const { return Label{counts[1] > counts[0]}; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  std::size_t depth() const;
  std::size_t leaf_count() const;
  bool operator==(const DecisionTree&) const = default;
};

// Greedy top-down induction on (gain ratio | information gain) over midpoint
// thresholds. No post-pruning; min_leaf and max_depth bound growth.
DecisionTree train_tree(const Dataset& dataset, const TreeParams& params = {});

Label predict(const DecisionTree& tree, const FeatureVector& features);

// Node-level statistics shared with the tests' enumeration oracle.
double entropy(std::size_t negatives, std::size_t positives);

struct SplitScore {
  double gain = 0.0;
  double ratio = 0.0;
};

SplitScore score_split(std::array<std::size_t, 2> left, std::array<std::size_t, 2> right);

struct EvalReport {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  std::optional<double> precision() const;
  double accuracy() const;
  void add(Label predicted, Label actual);
  EvalReport& operator+=(const EvalReport& other);
  bool operator==(const EvalReport&) const = default;
};

EvalReport evaluate(const DecisionTree& tree, const Dataset& testset);

struct CrossValidation {
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold_of;  // fold index per example
  std::vector<EvalReport> per_fold;
  EvalReport aggregate;
};

// Stratified k-fold: each class is shuffled with the seed and dealt round-robin
// across folds. Folds are trained and merged in fold order.
CrossValidation cross_validate(const Dataset& dataset, std::size_t folds, std::uint64_t seed,
                               const TreeParams& params = {});

struct BaselineComparison {
  std::size_t promoted = 0;
  std::size_t promoted_interesting = 0;
  double baseline_precision = 0.0;
  std::optional<double> predictor_precision;
};

BaselineComparison baseline_compare(const Corpus& corpus, const EvalReport& predictor,
                                    std::size_t threshold = kInterestingThreshold);

// One node per line, two spaces of indent per level:
//   v10 <= 3.5 counts=12/40
//     leaf interesting counts=2/38
void write_tree_text(std::ostream& out, const DecisionTree& tree);
nlohmann::ordered_json tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::ordered_json& json);

// `key: value` lines; precision prints as `absent` when undefined.
void write_report_text(std::ostream& out, const EvalReport& report);
void write_report_csv_header(std::ostream& out);
void write_report_csv_row(std::ostream& out, const std::string& name, const EvalReport& report);

}  // namespace votespread
