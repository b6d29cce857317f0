#include <cmath>

#include "doctest.h"

#include "blockent/entropy.hpp"
#include "blockent/error.hpp"
#include "oracles.hpp"

using namespace blockent;

namespace {

const double kLn2 = std::log(2.0);

BlockDistribution pi(const std::string& x, int k) { return empirical_block_measure(SamplePath::from_string(2, x), k); }

}  // namespace

TEST_CASE("shannon block entropy") {
  CHECK(shannon_block_entropy(BlockDistribution::uniform(2, 3)) == doctest::Approx(3 * kLn2).epsilon(1e-14));
  CHECK(shannon_block_entropy(BlockDistribution::point_mass(2, 3, 5)) == 0.0);
  CHECK(shannon_block_entropy(pi("0110", 2)) == doctest::Approx(2 * kLn2).epsilon(1e-14));
}

TEST_CASE("conditional block entropy") {
  CHECK(conditional_block_entropy(pi("0101", 2)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(conditional_block_entropy(pi("0101", 2))) < 1e-15);
  CHECK(conditional_block_entropy(BlockDistribution::uniform(2, 4)) == doctest::Approx(kLn2).epsilon(1e-14));
  CHECK(conditional_block_entropy(pi("0110", 2)) == doctest::Approx(kLn2).epsilon(1e-14));
  CHECK(conditional_block_entropy(BlockDistribution::uniform(3, 1)) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("conditional entropy against the counting oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int a = 2 + trial % 2, k = 1 + trial % 3;
    std::vector<int> digits(static_cast<std::size_t>(20 + trial));
    std::vector<std::uint8_t> symbols;
    for (int& d : digits) {
      d = static_cast<int>(rng() % static_cast<unsigned>(a));
      symbols.push_back(static_cast<std::uint8_t>(d));
    }
    const auto nu = empirical_block_measure(SamplePath(a, symbols), k);
    CHECK(conditional_block_entropy(nu) ==
          doctest::Approx(oracle::conditional_entropy_of_counts(oracle::cyclic_counts(digits, a, k), a)).epsilon(1e-12));
  }
}

TEST_CASE("relative block entropy") {
  const auto u = BlockDistribution::uniform(2, 3);
  CHECK(relative_block_entropy(u, u) == 0.0);
  CHECK(relative_block_entropy(BlockDistribution::point_mass(2, 3, 1), u) == doctest::Approx(3 * kLn2));
  const BlockDistribution nu(2, 1, {0.5, 0.5}), rho(2, 1, {0.25, 0.75});
  CHECK(relative_block_entropy(nu, rho) == doctest::Approx(0.5 * kLn2 + 0.5 * std::log(2.0 / 3.0)).epsilon(1e-14));
  CHECK(relative_block_entropy(nu, rho) == doctest::Approx(0.143841).epsilon(1e-5));
  CHECK(std::isinf(relative_block_entropy(nu, BlockDistribution::point_mass(2, 1, 0))));
  CHECK_THROWS_AS(relative_block_entropy(nu, u), Error);
}

TEST_CASE("conditional relative entropy") {
  const BlockDistribution rho(2, 1, {0.3, 0.7}), nu(2, 1, {0.6, 0.4});
  CHECK(conditional_relative_entropy(nu, rho) == relative_block_entropy(nu, rho));
  const auto u2 = BlockDistribution::uniform(2, 2);
  CHECK(conditional_relative_entropy(u2, u2) == 0.0);
  const auto x = pi("0011", 2);
  const double expected = (2 * kLn2 - shannon_block_entropy(x)) - (kLn2 - shannon_block_entropy(marginal(x, 1)));
  CHECK(conditional_relative_entropy(x, u2) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("plug-in estimates") {
  const auto r = plug_in_estimates(SamplePath::from_string(2, "0101"), 2);
  CHECK(std::abs(r.h_k) < 1e-15);
  CHECK(r.H_k == doctest::Approx(kLn2));
  CHECK_FALSE(r.D_k.has_value());
  const auto s = plug_in_estimates(SamplePath::from_string(2, "0110"), 2);
  CHECK(s.H_k == doctest::Approx(2 * kLn2));
  CHECK(s.h_k == doctest::Approx(kLn2));
  const auto x = SamplePath::from_string(2, "0010111011001");
  const auto self = plug_in_estimates(x, 1, empirical_block_measure(x, 1));
  CHECK(*self.D_k == 0.0);
  CHECK(*self.Delta_k == 0.0);
  CHECK_THROWS_AS(plug_in_estimates(x, 1, BlockDistribution::point_mass(2, 1, 0)), Error);
  CHECK(EntropyRecord::csv_header() == "n,k,H_k,h_k,D_k,Delta_k");
}

TEST_CASE("continuity bound") {
  CHECK(continuity_bound(0.0, 1, 2) == 0.0);
  CHECK(continuity_bound(std::exp(-1.0), 1, 2) == doctest::Approx(2 * std::exp(-1.0) * (1 + kLn2)).epsilon(1e-14));
  CHECK(continuity_bound(std::exp(-1.0), 1, 2) == doctest::Approx(1.24575).epsilon(1e-5));
  CHECK(continuity_bound(0.01, 2, 2) == doctest::Approx(0.119829).epsilon(1e-5));
  CHECK_THROWS_AS(continuity_bound(0.5, 1, 2), Error);
}

TEST_CASE("continuity bound holds on random pairs") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int a = 2 + trial % 2, k = 1 + trial % 3;
    auto nu = oracle::random_stationary(rng, a, k);
    auto other = oracle::random_stationary(rng, a, k);
    const double s = 0.2 * unit(rng);
    std::vector<double> mu(nu.size());
    for (std::size_t w = 0; w < nu.size(); ++w) mu[w] = (1 - s) * nu[w] + s * other[w];
    const BlockDistribution bn(a, k, nu), bm(a, k, mu);
    const double delta = tv_distance(bn, bm);
    if (delta > std::exp(-1.0) || delta == 0.0) continue;
    CHECK(std::abs(conditional_block_entropy(bn) - conditional_block_entropy(bm)) <=
          continuity_bound(delta, k, a) + 1e-12);
  }
}
