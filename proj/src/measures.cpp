#include "blockent/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blockent/error.hpp"

namespace blockent {

std::size_t word_count(int alphabet_size, int k) {
  if (alphabet_size < 1 || k < 0) {
    throw Error(ErrorCode::kInvalidConfig, "alphabet size and block length must be positive");
  }
  constexpr std::size_t kMaxWords = std::size_t{1} << 30;
  std::size_t count = 1;
  for (int i = 0; i < k; ++i) {
    count *= static_cast<std::size_t>(alphabet_size);
    if (count > kMaxWords) {
      throw Error(ErrorCode::kTooLarge, "|A|^k exceeds 2^30 words");
    }
  }
  return count;
}

std::vector<int> word_digits(Word w, int alphabet_size, int k) {
  std::vector<int> digits(static_cast<std::size_t>(k));
  for (int i = k - 1; i >= 0; --i) {
    digits[static_cast<std::size_t>(i)] = static_cast<int>(w % static_cast<Word>(alphabet_size));
    w /= static_cast<Word>(alphabet_size);
  }
  return digits;
}

std::string word_to_string(Word w, int alphabet_size, int k) {
  std::string s;
  for (int d : word_digits(w, alphabet_size, k)) s.push_back(static_cast<char>('0' + d));
  return s;
}

SamplePath::SamplePath(int alphabet_size, std::vector<std::uint8_t> symbols)
    : alphabet_size_(alphabet_size), symbols_(std::move(symbols)) {
  if (alphabet_size < 1 || alphabet_size > 256) {
    throw Error(ErrorCode::kInvalidConfig, "alphabet size must be in [1, 256]");
  }
  if (symbols_.empty()) {
    throw Error(ErrorCode::kInvalidBlockLength, "sample path must have length >= 1");
  }
  for (auto s : symbols_) {
    if (s >= alphabet_size) {
      throw Error(ErrorCode::kInvalidConfig, "symbol index outside the alphabet");
    }
  }
}

SamplePath SamplePath::from_string(int alphabet_size, const std::string& digits) {
  std::vector<std::uint8_t> symbols;
  symbols.reserve(digits.size());
  for (char c : digits) {
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::kInvalidConfig, std::string("non-digit symbol '") + c + "'");
    }
    symbols.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return SamplePath(alphabet_size, std::move(symbols));
}

std::string SamplePath::to_string() const {
  std::string s;
  s.reserve(symbols_.size());
  for (auto c : symbols_) s.push_back(static_cast<char>('0' + c));
  return s;
}

namespace {

double balance_defect(int alphabet_size, int k, std::span<const double> weights) {
  if (k < 2) return 0.0;
  const std::size_t a = static_cast<std::size_t>(alphabet_size);
  const std::size_t vertices = weights.size() / a;
  std::vector<double> out(vertices, 0.0), in(vertices, 0.0);
  for (std::size_t w = 0; w < weights.size(); ++w) {
    out[w / a] += weights[w];
    in[w % vertices] += weights[w];
  }
  double defect = 0.0;
  for (std::size_t v = 0; v < vertices; ++v) defect = std::max(defect, std::abs(out[v] - in[v]));
  return defect;
}

}  // namespace

BlockDistribution::BlockDistribution(int alphabet_size, int k, std::vector<double> weights)
    : alphabet_size_(alphabet_size), k_(k), weights_(std::move(weights)) {
  if (k < 1) throw Error(ErrorCode::kInvalidBlockLength, "block length must be >= 1");
  if (weights_.size() != word_count(alphabet_size, k)) {
    throw Error(ErrorCode::kDimensionMismatch, "weights must have |A|^k entries");
  }
  double total = 0.0;
  for (double p : weights_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::kInvalidConfig, "weights must be finite and non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kTolerance * std::max<double>(1.0, static_cast<double>(weights_.size()) / 64.0)) {
    throw Error(ErrorCode::kInvalidConfig, "weights must sum to 1");
  }
  stationary_ = balance_defect(alphabet_size_, k_, weights_) <= kTolerance;
}

BlockDistribution BlockDistribution::uniform(int alphabet_size, int k) {
  const std::size_t count = word_count(alphabet_size, k);
  return BlockDistribution(alphabet_size, k, std::vector<double>(count, 1.0 / static_cast<double>(count)));
}

BlockDistribution BlockDistribution::point_mass(int alphabet_size, int k, Word w) {
  std::vector<double> weights(word_count(alphabet_size, k), 0.0);
  weights.at(w) = 1.0;
  return BlockDistribution(alphabet_size, k, std::move(weights));
}

std::vector<std::int64_t> cyclic_block_counts(const SamplePath& x, int k) {
  const std::size_t n = x.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorCode::kInvalidBlockLength, "need 1 <= k <= n");
  }
  const std::size_t count = word_count(x.alphabet_size(), k);
  const Word a = static_cast<Word>(x.alphabet_size());
  std::vector<std::int64_t> counts(count, 0);
  Word w = 0;
  for (int i = 0; i < k; ++i) w = w * a + x[static_cast<std::size_t>(i)];
  for (std::size_t i = 0; i < n; ++i) {
    ++counts[w];
    w = (w * a + x[(i + static_cast<std::size_t>(k)) % n]) % count;
  }
  return counts;
}

BlockDistribution empirical_block_measure(const SamplePath& x, int k) {
  const auto counts = cyclic_block_counts(x, k);
  const double n = static_cast<double>(x.size());
  std::vector<double> weights(counts.size());
  for (std::size_t w = 0; w < counts.size(); ++w) weights[w] = static_cast<double>(counts[w]) / n;
  return BlockDistribution(x.alphabet_size(), k, std::move(weights));
}

BlockDistribution marginalize(const BlockDistribution& nu, Side side) {
  if (nu.k() < 2) throw Error(ErrorCode::kCannotMarginalize, "k = 1 has no (k-1)-marginal");
  const std::size_t a = static_cast<std::size_t>(nu.alphabet_size());
  const std::size_t vertices = nu.size() / a;
  std::vector<double> weights(vertices, 0.0);
  for (std::size_t w = 0; w < nu.size(); ++w) {
    weights[side == Side::kRight ? w / a : w % vertices] += nu[w];
  }
  return BlockDistribution(nu.alphabet_size(), nu.k() - 1, std::move(weights));
}

BlockDistribution marginal(const BlockDistribution& nu, int j) {
  if (j < 1 || j > nu.k()) throw Error(ErrorCode::kInvalidBlockLength, "marginal order out of range");
  BlockDistribution out = nu;
  while (out.k() > j) out = marginalize(out, Side::kRight);
  return out;
}

double stationarity_defect(const BlockDistribution& nu) {
  return balance_defect(nu.alphabet_size(), nu.k(), nu.weights());
}

int block_schedule(std::int64_t n, int alphabet_size, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "epsilon must lie in (0, 1)");
  }
  if (n < 2 || alphabet_size < 2) {
    throw Error(ErrorCode::kInvalidConfig, "block schedule needs n >= 2 and |A| >= 2");
  }
  const double raw = (1.0 - epsilon) * std::log(static_cast<double>(n)) /
                     std::log(static_cast<double>(alphabet_size));
  // Guard against ln rounding pushing an exact integer just below itself.
  const double k = std::floor(raw + 1e-12);
  return std::max(1, static_cast<int>(k));
}

double tv_distance(const BlockDistribution& nu, const BlockDistribution& mu) {
  if (nu.k() != mu.k() || nu.alphabet_size() != mu.alphabet_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "tv distance needs equal k and alphabet");
  }
  double total = 0.0;
  for (std::size_t w = 0; w < nu.size(); ++w) total += std::abs(nu[w] - mu[w]);
  return total;
}

BlockDistribution markov_extend(const BlockDistribution& nu, int k) {
  if (k <= nu.k()) return marginal(nu, k);
  const std::size_t a = static_cast<std::size_t>(nu.alphabet_size());
  const int j = nu.k();
  const std::size_t contexts = nu.size() / a;  // (j-1)-words
  // Forward kernel P(b | c) over (j-1)-word contexts c.
  std::vector<double> row_mass(contexts, 0.0);
  for (std::size_t w = 0; w < nu.size(); ++w) row_mass[w / a] += nu[w];

  std::vector<double> current(nu.weights().begin(), nu.weights().end());
  for (int m = j; m < k; ++m) {
    std::vector<double> next(current.size() * a, 0.0);
    for (std::size_t w = 0; w < current.size(); ++w) {
      if (current[w] == 0.0) continue;
      const std::size_t c = w % contexts;
      if (row_mass[c] == 0.0) continue;
      for (std::size_t b = 0; b < a; ++b) {
        next[w * a + b] = current[w] * nu[c * a + b] / row_mass[c];
      }
    }
    current = std::move(next);
  }
  double total = 0.0;
  for (double p : current) total += p;
  for (double& p : current) p /= total;
  return BlockDistribution(nu.alphabet_size(), k, std::move(current));
}

}  // namespace blockent
