#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "blockent/measures.hpp"

namespace blockent {

/// H_k, in nats, with 0 ln 0 = 0.
double shannon_block_entropy(const BlockDistribution& nu);

/// h_k = -sum nu(w) ln nu(a_k | a_1^{k-1}), conditioning on the right marginal.
/// For k = 1 this is H_1.
double conditional_block_entropy(const BlockDistribution& nu);

/// D_k(nu | rho). Returns +infinity when nu charges a word rho does not;
/// finite inputs never overflow, so an infinite result always means a
/// support violation.
double relative_block_entropy(const BlockDistribution& nu, const BlockDistribution& rho);

/// Delta_k = D_k - D_{k-1} on right marginals, Delta_1 = D_1.
double conditional_relative_entropy(const BlockDistribution& nu, const BlockDistribution& rho);

struct EntropyRecord {
  std::int64_t n = 0;
  int k = 0;
  double H_k = 0.0;
  double h_k = 0.0;
  std::optional<double> D_k;
  std::optional<double> Delta_k;

  static std::string csv_header();
  std::string csv_row() const;
};

EntropyRecord plug_in_estimates(const SamplePath& x, int k,
                                const std::optional<BlockDistribution>& reference = std::nullopt);

/// Upper bound -2 delta ln(delta / |A|^k) on |h_k(nu) - h_k(mu)| for tv <= delta.
double continuity_bound(double delta, int k, int alphabet_size);

}  // namespace blockent
