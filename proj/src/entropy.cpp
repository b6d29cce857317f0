#include "blockent/entropy.hpp"

#include <cmath>
#include <limits>

#include "blockent/error.hpp"
#include "blockent/format.hpp"

namespace blockent {

namespace {

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

void require_same_shape(const BlockDistribution& nu, const BlockDistribution& rho) {
  if (nu.k() != rho.k() || nu.alphabet_size() != rho.alphabet_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "distributions must share k and alphabet");
  }
}

}  // namespace

double shannon_block_entropy(const BlockDistribution& nu) {
  double h = 0.0;
  for (double p : nu.weights()) h -= xlogx(p);
  return h < 0.0 ? 0.0 : h;
}

double conditional_block_entropy(const BlockDistribution& nu) {
  if (nu.k() == 1) return shannon_block_entropy(nu);
  const std::size_t a = static_cast<std::size_t>(nu.alphabet_size());
  const std::size_t contexts = nu.size() / a;
  double h = 0.0;
  for (std::size_t c = 0; c < contexts; ++c) {
    double mass = 0.0;
    for (std::size_t b = 0; b < a; ++b) mass += nu[c * a + b];
    if (mass <= 0.0) continue;
    for (std::size_t b = 0; b < a; ++b) {
      const double p = nu[c * a + b];
      if (p > 0.0) h -= p * std::log(p / mass);
    }
  }
  return h < 0.0 ? 0.0 : h;
}

double relative_block_entropy(const BlockDistribution& nu, const BlockDistribution& rho) {
  require_same_shape(nu, rho);
  double d = 0.0;
  for (std::size_t w = 0; w < nu.size(); ++w) {
    const double p = nu[w];
    if (p == 0.0) continue;
    if (rho[w] == 0.0) return std::numeric_limits<double>::infinity();
    d += p * std::log(p / rho[w]);
  }
  return d;
}

double conditional_relative_entropy(const BlockDistribution& nu, const BlockDistribution& rho) {
  require_same_shape(nu, rho);
  if (nu.k() == 1) return relative_block_entropy(nu, rho);
  const double dk = relative_block_entropy(nu, rho);
  if (std::isinf(dk)) return dk;
  return dk - relative_block_entropy(marginalize(nu, Side::kRight), marginalize(rho, Side::kRight));
}

std::string EntropyRecord::csv_header() { return "n,k,H_k,h_k,D_k,Delta_k"; }

std::string EntropyRecord::csv_row() const {
  std::string row = std::to_string(n) + "," + std::to_string(k) + "," + format_real(H_k) + "," +
                    format_real(h_k) + ",";
  if (D_k) row += format_real(*D_k);
  row += ",";
  if (Delta_k) row += format_real(*Delta_k);
  return row;
}

EntropyRecord plug_in_estimates(const SamplePath& x, int k,
                                const std::optional<BlockDistribution>& reference) {
  const auto pi = empirical_block_measure(x, k);
  EntropyRecord record;
  record.n = static_cast<std::int64_t>(x.size());
  record.k = k;
  record.H_k = shannon_block_entropy(pi);
  record.h_k = conditional_block_entropy(pi);
  if (reference) {
    if (reference->k() != k || reference->alphabet_size() != x.alphabet_size()) {
      throw Error(ErrorCode::kDimensionMismatch, "reference must be a k-block distribution on the same alphabet");
    }
    record.D_k = relative_block_entropy(pi, *reference);
    record.Delta_k = conditional_relative_entropy(pi, *reference);
    if (std::isinf(*record.D_k)) {
      throw Error(ErrorCode::kSupport, "reference does not charge an observed block");
    }
  }
  return record;
}

double continuity_bound(double delta, int k, int alphabet_size) {
  if (delta < 0.0) throw Error(ErrorCode::kOutOfValidity, "delta must be non-negative");
  if (delta > std::exp(-1.0) * (1.0 + 1e-15)) {
    throw Error(ErrorCode::kOutOfValidity, "continuity bound requires delta <= 1/e");
  }
  if (delta == 0.0) return 0.0;
  const double words = std::pow(static_cast<double>(alphabet_size), k);
  return -2.0 * delta * std::log(delta / words);
}

}  // namespace blockent
