#pragma once

// Seeded sampling from the (k-1)-step Markov equilibrium of a cylindrical
// potential, windowed Birkhoff sums and a flat binary path format.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "blockent/measures.hpp"
#include "blockent/thermo.hpp"

namespace blockent {

/// mt19937_64 with hand-rolled uniform and categorical draws, so a seed
/// yields the same stream with every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Index i with probability cdf[i] - cdf[i-1]; cdf ends at its total mass.
  std::size_t categorical(std::span<const double> cdf);

 private:
  std::mt19937_64 engine_;
};

inline constexpr const char* kRngName = "mt19937_64";

enum class InitMode { kStationary, kFixedWord };

struct SamplerSpec {
  SpectralData equilibrium;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  InitMode init = InitMode::kStationary;
  Word initial_word = 0;  // (k-1)-word used with InitMode::kFixedWord
};

SamplerSpec make_sampler(const MarkovPotential& phi, std::int64_t n, std::uint64_t seed, double beta = 1.0);

SamplePath sample_path(const SamplerSpec& spec);

/// Seed of replica r derived from a base seed.
inline std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica) { return seed ^ replica; }

/// sum_{j=0}^{n-k} phi(x_{j+1}^{j+k}), non-cyclic windows.
double birkhoff_sum(const SamplePath& x, const MarkovPotential& phi);

struct StoredPath {
  SamplePath path;
  std::uint64_t seed;
};

/// Header: uint32 |A|, uint64 n, uint64 seed (little endian); then one byte per symbol.
void write_path(const std::string& file, const SamplePath& x, std::uint64_t seed);
StoredPath read_path(const std::string& file);

}  // namespace blockent
