#include <doctest.h>

#include <cmath>
#include <vector>

#include "votespread/random.hpp"
#include "votespread/stats.hpp"

using namespace votespread;

TEST_CASE("average ranks share ties") {
  const std::vector<double> v{10, 20, 20, 5};
  CHECK(average_ranks(v) == std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("spearman on monotone and constant data") {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i % 7);
    y.push_back(1000.0 - 50.0 * (i % 7));
  }
  CHECK(spearman(x, y) == doctest::Approx(-1.0));
  std::vector<double> flat(20, 3.0);
  CHECK(std::isnan(spearman(x, flat)));
}

TEST_CASE("spearman matches the textbook formula without ties") {
  // rho = 1 - 6 sum d^2 / (n (n^2 - 1)) holds when all ranks are distinct.
  Rng rng = derive_rng(3, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + uniform_index(rng, 30);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(i);
      y[i] = static_cast<double>(i);
    }
    shuffle(std::span<double>(x), rng);
    shuffle(std::span<double>(y), rng);
    double d2 = 0;
    for (std::size_t i = 0; i < n; ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    const double nn = static_cast<double>(n);
    CHECK(spearman(x, y) == doctest::Approx(1.0 - 6.0 * d2 / (nn * (nn * nn - 1))).epsilon(1e-12));
  }
}

TEST_CASE("permutation test separates signal from noise") {
  Rng rng = derive_rng(5, 0);
  std::vector<double> x, y_dep, y_ind;
  for (int i = 0; i < 200; ++i) {
    const double c = static_cast<double>(uniform_index(rng, 10));
    x.push_back(c);
    y_dep.push_back(1000.0 - 50.0 * c);
    y_ind.push_back(uniform01(rng) * 3000.0);
  }
  const auto dep = spearman_permutation_test(x, y_dep, 500, 1);
  CHECK(dep.rho == doctest::Approx(-1.0));
  CHECK(dep.p_value == doctest::Approx(1.0 / 501.0));
  const auto ind = spearman_permutation_test(x, y_ind, 500, 1);
  CHECK(ind.p_value > 0.05);
}

TEST_CASE("histogram bins") {
  const std::vector<double> v{0, 0.5, 1, 2.9, 3};
  const auto h = make_histogram(v, 1.0);
  CHECK(h.counts == std::vector<std::size_t>{2, 1, 1, 1});
  CHECK(h.total() == v.size());
}

TEST_CASE("median") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(std::isnan(median({})));
}
