#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace votespread {

// Fixed-width bins [i*w, (i+1)*w) starting at zero.
struct Histogram {
  double bin_width = 1.0;
  std::vector<std::size_t> counts;

  void add(double value);
  std::size_t total() const;
};

Histogram make_histogram(std::span<const double> values, double bin_width);

// Median of a copy; NaN for empty input.
double median(std::vector<double> values);

// 1-based ranks with ties given their average rank.
std::vector<double> average_ranks(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);

// Spearman rank correlation with tie-corrected (average) ranks. NaN when
// either side is constant or the inputs have fewer than two points.
double spearman(std::span<const double> x, std::span<const double> y);

struct PermutationTest {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t permutations = 0;
};

// Two-sided permutation test of Spearman's rho: y's ranks are shuffled
// `permutations` times; p = (1 + #{|rho_perm| >= |rho|}) / (1 + permutations).
PermutationTest spearman_permutation_test(std::span<const double> x,
                                          std::span<const double> y,
                                          std::size_t permutations,
                                          std::uint64_t seed);

}  // namespace votespread
