#include "votespread/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "votespread/random.hpp"

namespace votespread {

void Histogram::add(double value) {
  const auto bin = static_cast<std::size_t>(std::floor(std::max(value, 0.0) / bin_width));
  if (bin >= counts.size()) counts.resize(bin + 1, 0);
  ++counts[bin];
}

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

Histogram make_histogram(std::span<const double> values, double bin_width) {
  Histogram h;
  h.bin_width = bin_width;
  for (double v : values) h.add(v);
  return h;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::numeric_limits<double>::quiet_NaN();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

PermutationTest spearman_permutation_test(std::span<const double> x,
                                          std::span<const double> y,
                                          std::size_t permutations,
                                          std::uint64_t seed) {
  PermutationTest out;
  out.permutations = permutations;
  const auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  out.rho = pearson(rx, ry);
  if (std::isnan(out.rho)) {
    out.p_value = 1.0;
    return out;
  }
  Rng rng = derive_rng(seed, 0);
  const double observed = std::abs(out.rho) - 1e-12;
  std::size_t extreme = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    shuffle(std::span<double>(ry), rng);
    if (std::abs(pearson(rx, ry)) >= observed) ++extreme;
  }
  out.p_value = static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
  return out;
}

}  // namespace votespread
