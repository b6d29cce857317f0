#include "blockent/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "blockent/error.hpp"

namespace blockent {

std::size_t Rng::categorical(std::span<const double> cdf) {
  const double x = uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
  const auto i = static_cast<std::size_t>(it - cdf.begin());
  return std::min(i, cdf.size() - 1);
}

SamplerSpec make_sampler(const MarkovPotential& phi, std::int64_t n, std::uint64_t seed, double beta) {
  return SamplerSpec{pressure(phi, beta), n, seed, InitMode::kStationary, 0};
}

SamplePath sample_path(const SamplerSpec& spec) {
  const BlockDistribution& rho = spec.equilibrium.equilibrium;
  const int k = rho.k();
  const std::size_t a = static_cast<std::size_t>(rho.alphabet_size());
  if (spec.n < std::max(1, k - 1)) throw Error(ErrorCode::kInvalidBlockLength, "need n >= k-1 and n >= 1");
  const std::size_t contexts = rho.size() / a;

  // Forward kernel P(b | u) = rho_k(u b) / rho_{k-1}(u) as cumulative rows.
  std::vector<double> cdf(rho.size());
  for (std::size_t u = 0; u < contexts; ++u) {
    double mass = 0.0;
    for (std::size_t b = 0; b < a; ++b) mass += rho[u * a + b];
    if (!(mass > 0.0)) throw Error(ErrorCode::kSupport, "context of zero mass");
    double running = 0.0;
    for (std::size_t b = 0; b < a; ++b) {
      running += rho[u * a + b] / mass;
      cdf[u * a + b] = running;
    }
    if (std::abs(running - 1.0) > 1e-12) throw Error(ErrorCode::kNumeric, "kernel row does not sum to 1");
  }

  Rng rng(spec.seed);
  const std::size_t n = static_cast<std::size_t>(spec.n);
  std::vector<std::uint8_t> symbols;
  symbols.reserve(n);
  std::size_t context = 0;
  if (k > 1) {
    if (spec.init == InitMode::kFixedWord) {
      if (spec.initial_word >= contexts) throw Error(ErrorCode::kInvalidConfig, "initial word outside A^{k-1}");
      context = spec.initial_word;
    } else {
      const BlockDistribution start = marginalize(rho, Side::kRight);
      std::vector<double> start_cdf(start.size());
      double running = 0.0;
      for (std::size_t u = 0; u < start.size(); ++u) start_cdf[u] = running += start[u];
      context = rng.categorical(start_cdf);
    }
    for (int d : word_digits(context, rho.alphabet_size(), k - 1)) symbols.push_back(static_cast<std::uint8_t>(d));
    symbols.resize(std::min(symbols.size(), n));
  }
  while (symbols.size() < n) {
    const std::size_t b = rng.categorical(std::span<const double>(cdf).subspan(context * a, a));
    symbols.push_back(static_cast<std::uint8_t>(b));
    context = (context * a + b) % contexts;
  }
  return SamplePath(rho.alphabet_size(), std::move(symbols));
}

double birkhoff_sum(const SamplePath& x, const MarkovPotential& phi) {
  const std::size_t k = static_cast<std::size_t>(phi.k());
  if (x.size() < k) throw Error(ErrorCode::kInvalidBlockLength, "need n >= k");
  if (x.alphabet_size() != phi.alphabet_size()) throw Error(ErrorCode::kDimensionMismatch, "alphabet mismatch");
  const Word a = static_cast<Word>(x.alphabet_size());
  const Word words = phi.size();
  Word w = 0;
  for (std::size_t i = 0; i + 1 < k; ++i) w = w * a + x[i];
  double sum = 0.0;
  for (std::size_t i = k - 1; i < x.size(); ++i) {
    w = (w * a + x[i]) % words;
    sum += phi[w];
  }
  return sum;
}

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((value >> (8 * i)) & 0xff));
}

template <typename T>
T get(std::istream& in) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == EOF) throw Error(ErrorCode::kIo, "truncated path header");
    value |= static_cast<T>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return value;
}

}  // namespace

void write_path(const std::string& file, const SamplePath& x, std::uint64_t seed) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + file + " for writing");
  put<std::uint32_t>(out, static_cast<std::uint32_t>(x.alphabet_size()));
  put<std::uint64_t>(out, x.size());
  put<std::uint64_t>(out, seed);
  out.write(reinterpret_cast<const char*>(x.symbols().data()), static_cast<std::streamsize>(x.size()));
  if (!out) throw Error(ErrorCode::kIo, "write to " + file + " failed");
}

StoredPath read_path(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + file);
  const auto alphabet = get<std::uint32_t>(in);
  const auto n = get<std::uint64_t>(in);
  const auto seed = get<std::uint64_t>(in);
  std::vector<std::uint8_t> symbols(n);
  in.read(reinterpret_cast<char*>(symbols.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::uint64_t>(in.gcount()) != n) throw Error(ErrorCode::kIo, "truncated path body");
  return {SamplePath(static_cast<int>(alphabet), std::move(symbols)), seed};
}

}  // namespace blockent
