#pragma once

// Alphabets, sample paths and k-block distributions.
//
// A word a_1...a_k over an alphabet of size |A| is stored as the base-|A|
// integer sum a_i |A|^(k-i), so a_1 is the most significant digit. Appending
// a symbol on the right is w*|A|+b, dropping the first symbol is w % |A|^(k-1).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace blockent {

using Word = std::uint64_t;

struct Alphabet {
  int size = 2;
};

/// |A|^k, throws kTooLarge when the word space does not fit in memory.
std::size_t word_count(int alphabet_size, int k);

/// Digits of a word, most significant first.
std::vector<int> word_digits(Word w, int alphabet_size, int k);
std::string word_to_string(Word w, int alphabet_size, int k);

inline Word prefix_of(Word w, int alphabet_size) { return w / static_cast<Word>(alphabet_size); }
inline Word suffix_of(Word w, std::size_t vertex_count) { return w % vertex_count; }

class SamplePath {
 public:
  SamplePath(int alphabet_size, std::vector<std::uint8_t> symbols);

  /// Parses a string of digit characters, e.g. "0110".
  static SamplePath from_string(int alphabet_size, const std::string& digits);

  int alphabet_size() const noexcept { return alphabet_size_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  std::span<const std::uint8_t> symbols() const noexcept { return symbols_; }
  std::uint8_t operator[](std::size_t i) const { return symbols_[i]; }
  std::string to_string() const;

 private:
  int alphabet_size_;
  std::vector<std::uint8_t> symbols_;
};

/// Probability vector over A^k, indexed by word code.
class BlockDistribution {
 public:
  static constexpr double kTolerance = 1e-12;

  BlockDistribution(int alphabet_size, int k, std::vector<double> weights);

  int alphabet_size() const noexcept { return alphabet_size_; }
  int k() const noexcept { return k_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  double operator[](Word w) const { return weights_[w]; }

  /// Marginal balance holds within kTolerance (trivially true for k = 1).
  bool stationary() const noexcept { return stationary_; }

  static BlockDistribution uniform(int alphabet_size, int k);
  static BlockDistribution point_mass(int alphabet_size, int k, Word w);

 private:
  int alphabet_size_;
  int k_;
  std::vector<double> weights_;
  bool stationary_;
};

enum class Side { kLeft, kRight };

/// Integer cyclic window counts of x: entry w is #{i : x~_i..x~_{i+k-1} = w}
/// for the period-n extension x~.
std::vector<std::int64_t> cyclic_block_counts(const SamplePath& x, int k);

BlockDistribution empirical_block_measure(const SamplePath& x, int k);

/// Sums out the last symbol (kRight) or the first symbol (kLeft).
BlockDistribution marginalize(const BlockDistribution& nu, Side side);

/// Marginal of order j <= nu.k(); repeated right marginalization.
BlockDistribution marginal(const BlockDistribution& nu, int j);

double stationarity_defect(const BlockDistribution& nu);

int block_schedule(std::int64_t n, int alphabet_size, double epsilon);

/// Unnormalized L1 distance, in [0, 2].
double tv_distance(const BlockDistribution& nu, const BlockDistribution& mu);

/// k-marginal of the (nu.k()-1)-step Markov extension of a stationary nu.
/// For k <= nu.k() this is the ordinary marginal.
BlockDistribution markov_extend(const BlockDistribution& nu, int k);

}  // namespace blockent
