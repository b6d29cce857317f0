#include "blockent/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "blockent/entropy.hpp"
#include "blockent/error.hpp"
#include "blockent/format.hpp"

namespace blockent {

namespace {

using Real = long double;
using Matrix = std::vector<std::vector<Real>>;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t vertex_count(const MarkovPotential& phi) {
  return phi.size() / static_cast<std::size_t>(phi.alphabet_size());
}

// Max-plus cycle mean of beta*phi by Karp's formula.
Real max_cycle_mean(const MarkovPotential& phi, Real beta) {
  const std::size_t a = static_cast<std::size_t>(phi.alphabet_size());
  const std::size_t vertices = vertex_count(phi);
  const Real lowest = -std::numeric_limits<Real>::infinity();
  std::vector<std::vector<Real>> best(vertices + 1, std::vector<Real>(vertices, lowest));
  std::fill(best[0].begin(), best[0].end(), 0.0L);
  for (std::size_t j = 1; j <= vertices; ++j) {
    for (std::size_t w = 0; w < phi.size(); ++w) {
      best[j][w % vertices] = std::max(best[j][w % vertices], best[j - 1][w / a] + beta * phi[w]);
    }
  }
  Real mean = lowest;
  for (std::size_t v = 0; v < vertices; ++v) {
    Real worst = std::numeric_limits<Real>::infinity();
    for (std::size_t j = 0; j < vertices; ++j) {
      worst = std::min(worst, (best[vertices][v] - best[j][v]) / static_cast<Real>(vertices - j));
    }
    mean = std::max(mean, worst);
  }
  return mean;
}

// Transfer matrix of beta*phi in a diagonal gauge: entry (i, j) carries
// exp(beta*phi - shift + gauge[j] - gauge[i]) with shift the max cycle mean and
// gauge[i] the best walk weight from i. Entries are at most 1, so the Perron
// root lies in [1, |A|] however cold beta makes the potential.
Matrix transfer_matrix(const MarkovPotential& phi, double beta, Real& shift, std::vector<Real>& gauge) {
  const std::size_t a = static_cast<std::size_t>(phi.alphabet_size());
  const std::size_t vertices = vertex_count(phi);
  const Real b = static_cast<Real>(beta);
  shift = max_cycle_mean(phi, b);
  gauge.assign(vertices, 0.0L);
  for (std::size_t round = 0; round < vertices; ++round) {
    bool changed = false;
    for (std::size_t w = 0; w < phi.size(); ++w) {
      const Real candidate = b * phi[w] - shift + gauge[w % vertices];
      if (candidate > gauge[w / a]) {
        gauge[w / a] = candidate;
        changed = true;
      }
    }
    if (!changed) break;
  }
  Matrix m(vertices, std::vector<Real>(vertices, 0.0L));
  for (std::size_t w = 0; w < phi.size(); ++w) {
    const std::size_t i = w / a, j = w % vertices;
    m[i][j] += std::exp(b * phi[w] - shift + gauge[j] - gauge[i]);
  }
  return m;
}

Matrix multiply(const Matrix& x, const Matrix& y) {
  const std::size_t n = x.size();
  Matrix out(n, std::vector<Real>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < n; ++l) {
      const Real xil = x[i][l];
      if (xil == 0.0L) continue;
      for (std::size_t j = 0; j < n; ++j) out[i][j] += xil * y[l][j];
    }
  }
  return out;
}

void normalize_sum(std::vector<Real>& v) {
  Real total = 0.0L;
  for (Real x : v) total += x;
  for (Real& x : v) x /= total;
}

Real max_relative_change(const std::vector<Real>& a, const std::vector<Real>& b) {
  Real change = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Real scale = std::max(std::abs(a[i]), std::abs(b[i]));
    if (scale > 0.0L) change = std::max(change, std::abs(a[i] - b[i]) / scale);
  }
  return change;
}

struct Perron {
  Real shift;       // lambda = exp(shift) * scaled_lambda
  Real scaled_lambda;
  std::vector<Real> left, right;  // eigenvectors of the gauged matrix m
  std::vector<Real> gauge;
  Matrix m;

  Real log_lambda() const { return shift + std::log(scaled_lambda); }
  Real log_left(std::size_t v) const { return std::log(left[v]) - gauge[v]; }
  Real log_right(std::size_t v) const { return std::log(right[v]) + gauge[v]; }
};

// Perron root and vectors by power iteration: repeated squaring brings the
// iterate close to the rank-one limit, plain iteration then polishes it.
Perron solve_perron(const MarkovPotential& phi, double beta) {
  constexpr Real kTolerance = 1e-13L;
  constexpr int kMaxIterations = 100000;
  Perron p;
  p.m = transfer_matrix(phi, beta, p.shift, p.gauge);
  const std::size_t n = p.m.size();

  // Iterate on M + cI: same eigenvectors, but a near-periodic M no longer
  // squares into a near-reducible matrix with ill-conditioned vectors.
  Real shift_c = 0.0L;
  for (const auto& row : p.m) {
    Real sum = 0.0L;
    for (Real x : row) sum += x;
    shift_c = std::max(shift_c, sum);
  }
  Matrix b = p.m;
  for (std::size_t i = 0; i < n; ++i) b[i][i] += shift_c;

  std::vector<Real> right(n, 1.0L / static_cast<Real>(n)), left = right;
  Matrix power = b;
  for (int squaring = 0; squaring < 64 && n > 1; ++squaring) {
    Real top = 0.0L;
    for (const auto& row : power) top = std::max(top, *std::max_element(row.begin(), row.end()));
    for (auto& row : power) {
      for (Real& x : row) x /= top;
    }
    std::vector<Real> r(n, 0.0L), l(n, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        r[i] += power[i][j];
        l[j] += power[i][j];
      }
    }
    normalize_sum(r);
    normalize_sum(l);
    const bool settled = max_relative_change(r, right) < 1e-16L && max_relative_change(l, left) < 1e-16L;
    right = std::move(r);
    left = std::move(l);
    if (settled) break;
    power = multiply(power, power);
  }

  auto apply_right = [&](const Matrix& m, const std::vector<Real>& v) {
    std::vector<Real> out(n, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out[i] += m[i][j] * v[j];
    }
    return out;
  };
  auto apply_left = [&](const Matrix& m, const std::vector<Real>& v) {
    std::vector<Real> out(n, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out[j] += v[i] * m[i][j];
    }
    return out;
  };

  bool converged = false;
  for (int it = 0; it < kMaxIterations; ++it) {
    auto r = apply_right(b, right);
    auto l = apply_left(b, left);
    normalize_sum(r);
    normalize_sum(l);
    const Real change = std::max(max_relative_change(r, right), max_relative_change(l, left));
    right = std::move(r);
    left = std::move(l);
    if (change < kTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::kConvergence, "power iteration did not settle within 1e5 iterations");
  }
  const auto mr = apply_right(p.m, right);
  Real num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    num += left[i] * mr[i];
    den += left[i] * right[i];
  }
  p.scaled_lambda = num / den;
  p.left = std::move(left);
  p.right = std::move(right);
  if (!(p.scaled_lambda > 0.0L) || !std::isfinite(static_cast<double>(p.log_lambda()))) {
    throw Error(ErrorCode::kNumeric, "Perron root is not positive and finite");
  }
  return p;
}

double pressure_value(const MarkovPotential& phi, double beta) {
  return static_cast<double>(solve_perron(phi, beta).log_lambda());
}

void require_normalized(const MarkovPotential& phi) {
  if (!phi.normalized()) {
    throw Error(ErrorCode::kInvalidConfig, "operation needs a normalized potential");
  }
}

// Canonical mean: rotate so the smallest label comes first, sum in order.
MeanCycle canonical(std::vector<Word> arcs, const MarkovPotential& weights) {
  std::rotate(arcs.begin(), std::min_element(arcs.begin(), arcs.end()), arcs.end());
  double sum = 0.0;
  for (auto w : arcs) sum += weights[w];
  return {sum / static_cast<double>(arcs.size()), std::move(arcs)};
}

}  // namespace

MarkovPotential::MarkovPotential(int alphabet_size, int k, std::vector<double> values)
    : alphabet_size_(alphabet_size), k_(k), values_(std::move(values)) {
  if (alphabet_size < 1) throw Error(ErrorCode::kInvalidConfig, "alphabet size must be positive");
  if (k < 1) throw Error(ErrorCode::kInvalidBlockLength, "potential depth must be >= 1");
  if (values_.size() != word_count(alphabet_size, k)) {
    throw Error(ErrorCode::kDimensionMismatch, "potential must have |A|^k values");
  }
  for (double v : values_) {
    if (v == -kInf) throw Error(ErrorCode::kReducible, "forbidden words (phi = -inf) are not supported");
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidConfig, "potential values must be finite");
  }
}

double MarkovPotential::normalization_defect() const {
  const std::size_t vertices = values_.size() / static_cast<std::size_t>(alphabet_size_);
  std::vector<double> column(vertices, 0.0);
  for (std::size_t w = 0; w < values_.size(); ++w) column[w % vertices] += std::exp(values_[w]);
  double defect = 0.0;
  for (double c : column) defect = std::max(defect, std::abs(c - 1.0));
  return defect;
}

double MarkovPotential::sup_norm() const {
  double norm = 0.0;
  for (double v : values_) norm = std::max(norm, std::abs(v));
  return norm;
}

bool MarkovPotential::constant() const {
  return std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_.front(); });
}

MarkovPotential MarkovPotential::scaled(double beta) const {
  std::vector<double> values(values_);
  for (double& v : values) v *= beta;
  return MarkovPotential(alphabet_size_, k_, std::move(values));
}

MarkovPotential MarkovPotential::lifted(int k) const {
  if (k < k_) throw Error(ErrorCode::kInvalidBlockLength, "cannot lift to a shorter depth");
  const std::size_t count = word_count(alphabet_size_, k);
  const std::size_t drop = word_count(alphabet_size_, k - k_);
  std::vector<double> values(count);
  for (std::size_t w = 0; w < count; ++w) values[w] = values_[w / drop];
  return MarkovPotential(alphabet_size_, k, std::move(values));
}

MarkovPotential potential_from_marginals(const BlockDistribution& rho_k) {
  if (rho_k.k() == 1) {
    std::vector<double> values(rho_k.size());
    for (std::size_t w = 0; w < rho_k.size(); ++w) {
      if (rho_k[w] <= 0.0) throw Error(ErrorCode::kSupport, "zero-mass symbol");
      values[w] = std::log(rho_k[w]);
    }
    return MarkovPotential(rho_k.alphabet_size(), 1, std::move(values));
  }
  return potential_from_marginals(rho_k, marginalize(rho_k, Side::kLeft));
}

MarkovPotential potential_from_marginals(const BlockDistribution& rho_k, const BlockDistribution& rho_km1) {
  if (rho_k.k() < 2 || rho_km1.k() != rho_k.k() - 1 || rho_km1.alphabet_size() != rho_k.alphabet_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "need consecutive marginals on one alphabet");
  }
  if (tv_distance(marginalize(rho_k, Side::kLeft), rho_km1) > 1e-10) {
    throw Error(ErrorCode::kInvalidConfig, "marginals are not consistent");
  }
  const std::size_t vertices = rho_km1.size();
  std::vector<double> values(rho_k.size());
  for (std::size_t w = 0; w < rho_k.size(); ++w) {
    if (rho_k[w] <= 0.0 || rho_km1[w % vertices] <= 0.0) {
      throw Error(ErrorCode::kSupport, "zero-mass word");
    }
    values[w] = std::log(rho_k[w]) - std::log(rho_km1[w % vertices]);
  }
  return MarkovPotential(rho_k.alphabet_size(), rho_k.k(), std::move(values));
}

MarkovPotential markov_chain_potential(const std::vector<std::vector<double>>& transition) {
  const std::size_t a = transition.size();
  if (a < 2) throw Error(ErrorCode::kInvalidConfig, "transition matrix needs |A| >= 2");
  for (const auto& row : transition) {
    if (row.size() != a) throw Error(ErrorCode::kDimensionMismatch, "transition matrix must be square");
    double total = 0.0;
    for (double p : row) {
      if (!(p > 0.0)) throw Error(ErrorCode::kSupport, "transition probabilities must be positive");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::kInvalidConfig, "transition rows must sum to 1");
  }
  std::vector<double> pi(a, 1.0 / static_cast<double>(a));
  for (int it = 0; it < 1000000; ++it) {
    std::vector<double> next(a, 0.0);
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t j = 0; j < a; ++j) next[j] += pi[i] * transition[i][j];
    }
    double change = 0.0;
    for (std::size_t i = 0; i < a; ++i) change = std::max(change, std::abs(next[i] - pi[i]));
    pi = std::move(next);
    if (change < 1e-17) break;
  }
  std::vector<double> joint(a * a);
  double total = 0.0;
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < a; ++j) total += joint[i * a + j] = pi[i] * transition[i][j];
  }
  for (double& p : joint) p /= total;
  return potential_from_marginals(BlockDistribution(static_cast<int>(a), 2, std::move(joint)));
}

MarkovPotential bernoulli_potential(const std::vector<double>& probabilities) {
  double total = 0.0;
  for (double p : probabilities) total += p;
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::kInvalidConfig, "probabilities must sum to 1");
  return potential_from_marginals(
      BlockDistribution(static_cast<int>(probabilities.size()), 1, probabilities));
}

SpectralData pressure(const MarkovPotential& phi, double beta) {
  if (!std::isfinite(beta)) throw Error(ErrorCode::kInvalidConfig, "beta must be finite");
  const Perron p = solve_perron(phi, beta);
  const std::size_t a = static_cast<std::size_t>(phi.alphabet_size());
  const std::size_t vertices = p.m.size();
  Real lr = 0.0L;
  for (std::size_t v = 0; v < vertices; ++v) lr += p.left[v] * p.right[v];
  std::vector<Real> mass(phi.size());
  Real total = 0.0L;
  for (std::size_t w = 0; w < phi.size(); ++w) {
    const std::size_t i = w / a, j = w % vertices;
    const Real weight = std::exp(static_cast<Real>(beta) * phi[w] - p.shift + p.gauge[j] - p.gauge[i]);
    mass[w] = p.left[i] * weight * p.right[j] / (p.scaled_lambda * lr);
    total += mass[w];
  }
  std::vector<double> eq(phi.size());
  for (std::size_t w = 0; w < phi.size(); ++w) eq[w] = static_cast<double>(mass[w] / total);

  // Undo the gauge in log space, then normalize to sum 1.
  auto ungauged = [&](auto log_entry) {
    std::vector<Real> logs(vertices);
    for (std::size_t v = 0; v < vertices; ++v) logs[v] = log_entry(v);
    const Real top = *std::max_element(logs.begin(), logs.end());
    std::vector<Real> out(vertices);
    for (std::size_t v = 0; v < vertices; ++v) out[v] = std::exp(logs[v] - top);
    normalize_sum(out);
    return std::vector<double>(out.begin(), out.end());
  };
  SpectralData data{beta,
                    static_cast<double>(p.log_lambda()),
                    ungauged([&](std::size_t v) { return p.log_left(v); }),
                    ungauged([&](std::size_t v) { return p.log_right(v); }),
                    BlockDistribution(phi.alphabet_size(), phi.k(), std::move(eq)),
                    0.0,
                    0.0};
  data.entropy = conditional_block_entropy(data.equilibrium);
  double mean = 0.0;
  for (std::size_t w = 0; w < phi.size(); ++w) mean += data.equilibrium[w] * phi[w];
  data.mean_phi = mean;
  return data;
}

NormalizedPotential normalize_potential(const MarkovPotential& phi) {
  const Perron p = solve_perron(phi, 1.0);
  const std::size_t a = static_cast<std::size_t>(phi.alphabet_size());
  const std::size_t vertices = p.m.size();
  const Real log_lambda = p.log_lambda();
  std::vector<double> values(phi.size());
  for (std::size_t w = 0; w < phi.size(); ++w) {
    values[w] = static_cast<double>(static_cast<Real>(phi[w]) + p.log_left(w / a) - p.log_left(w % vertices) -
                                    log_lambda);
  }
  return {MarkovPotential(phi.alphabet_size(), phi.k(), std::move(values)), static_cast<double>(log_lambda)};
}

double direct_pressure_estimate(const MarkovPotential& phi, double beta, int n) {
  if (n < phi.k()) throw Error(ErrorCode::kInvalidBlockLength, "need n >= depth");
  std::size_t space = 1;
  for (int i = 0; i < n; ++i) {
    space *= static_cast<std::size_t>(phi.alphabet_size());
    if (space > (std::size_t{1} << 24)) throw Error(ErrorCode::kTooLarge, "|A|^n exceeds 2^24");
  }
  const std::size_t a = static_cast<std::size_t>(phi.alphabet_size());
  const std::size_t vertices = vertex_count(phi);
  const int tail = phi.k() - 1;

  // Best continuation for the last k-1 windows, which stick out of the cylinder.
  std::vector<double> tail_best(vertices, 0.0);
  if (tail > 0) {
    const std::size_t extensions = vertices;  // A^{k-1}
    for (std::size_t v = 0; v < vertices; ++v) {
      double best = -kInf;
      for (std::size_t c = 0; c < extensions; ++c) {
        // word v.c of length 2(k-1); windows start at offsets 0..k-2.
        const auto vd = word_digits(v, phi.alphabet_size(), tail);
        const auto cd = word_digits(c, phi.alphabet_size(), tail);
        std::vector<int> digits(vd);
        digits.insert(digits.end(), cd.begin(), cd.end());
        double s = 0.0;
        for (int j = 0; j < tail; ++j) {
          Word w = 0;
          for (int i = 0; i < phi.k(); ++i) w = w * a + static_cast<Word>(digits[static_cast<std::size_t>(j + i)]);
          s += beta * phi[w];
        }
        best = std::max(best, s);
      }
      tail_best[v] = best;
    }
  }

  // Depth-first enumeration of A^n with streaming log-sum-exp.
  double lse_max = -kInf, lse_sum = 0.0;
  auto accumulate = [&](double x) {
    if (x > lse_max) {
      lse_sum = lse_sum * std::exp(lse_max - x) + 1.0;
      lse_max = x;
    } else {
      lse_sum += std::exp(x - lse_max);
    }
  };
  const std::size_t words = phi.size();
  auto recurse = [&](auto&& self, int depth, std::size_t window, double partial) -> void {
    if (depth == n) {
      accumulate(partial + tail_best[window % vertices]);
      return;
    }
    for (std::size_t b = 0; b < a; ++b) {
      const std::size_t w = (window * a + b) % words;
      const double add = depth + 1 >= phi.k() ? beta * phi[w] : 0.0;
      self(self, depth + 1, w, partial + add);
    }
  };
  recurse(recurse, 0, 0, 0.0);
  return (lse_max + std::log(lse_sum)) / static_cast<double>(n);
}

double relative_entropy_rate(const BlockDistribution& nu, const MarkovPotential& phi) {
  require_normalized(phi);
  if (nu.alphabet_size() != phi.alphabet_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "measure and potential live on different alphabets");
  }
  if (!nu.stationary()) throw Error(ErrorCode::kNonStationary, "relative entropy rate needs a stationary measure");
  const int depth = std::max(nu.k(), phi.k());
  const auto extended = markov_extend(nu, depth);
  const auto lifted = phi.lifted(depth);
  double mean = 0.0;
  for (std::size_t w = 0; w < extended.size(); ++w) mean += extended[w] * lifted[w];
  return -mean - conditional_block_entropy(nu);
}

MeanCycle min_mean_cycle(const MarkovPotential& phi) {
  const std::size_t a = static_cast<std::size_t>(phi.alphabet_size());
  const std::size_t vertices = vertex_count(phi);
  const std::size_t steps = vertices;
  // best[j][v]: least weight of a j-arc walk ending at v; via[j][v]: its last arc.
  std::vector<std::vector<double>> best(steps + 1, std::vector<double>(vertices, kInf));
  std::vector<std::vector<std::size_t>> via(steps + 1, std::vector<std::size_t>(vertices, 0));
  std::fill(best[0].begin(), best[0].end(), 0.0);
  for (std::size_t j = 1; j <= steps; ++j) {
    for (std::size_t w = 0; w < phi.size(); ++w) {
      const std::size_t from = w / a, to = w % vertices;
      const double candidate = best[j - 1][from] + phi[w];
      if (candidate < best[j][to]) {
        best[j][to] = candidate;
        via[j][to] = w;
      }
    }
  }
  double karp = kInf;
  for (std::size_t v = 0; v < vertices; ++v) {
    double worst = -kInf;
    for (std::size_t j = 0; j < steps; ++j) {
      worst = std::max(worst, (best[steps][v] - best[j][v]) / static_cast<double>(steps - j));
    }
    karp = std::min(karp, worst);
  }

  // Cycles on the optimal length-|V| walks; the minimizing one attains karp.
  std::optional<MeanCycle> found;
  for (std::size_t v = 0; v < vertices; ++v) {
    std::vector<Word> walk(steps);
    std::size_t at = v;
    for (std::size_t j = steps; j >= 1; --j) {
      walk[j - 1] = via[j][at];
      at = via[j][at] / a;
    }
    // Peel off cycles left to right with a vertex stack.
    std::vector<std::size_t> vertex_stack{walk.front() / a};
    std::vector<Word> arc_stack;
    for (auto w : walk) {
      const std::size_t head = w % vertices;
      arc_stack.push_back(w);
      auto pos = std::find(vertex_stack.begin(), vertex_stack.end(), head);
      if (pos != vertex_stack.end()) {
        const std::size_t start = static_cast<std::size_t>(pos - vertex_stack.begin());
        std::vector<Word> cycle(arc_stack.begin() + static_cast<std::ptrdiff_t>(start), arc_stack.end());
        auto candidate = canonical(std::move(cycle), phi);
        if (!found || candidate.mean < found->mean) found = std::move(candidate);
        arc_stack.resize(start);
        vertex_stack.resize(start + 1);
      } else {
        vertex_stack.push_back(head);
      }
    }
  }
  if (!found || std::abs(found->mean - karp) > 1e-9 * (1.0 + std::abs(karp))) {
    throw Error(ErrorCode::kNumeric, "could not recover the minimum mean cycle");
  }
  return *found;
}

MeanCycle max_mean_cycle(const MarkovPotential& phi) {
  auto cycle = min_mean_cycle(phi.scaled(-1.0));
  cycle.mean = -cycle.mean;
  return cycle;
}

double extreme_mean(const MarkovPotential& phi, Extreme which) {
  return which == Extreme::kMin ? min_mean_cycle(phi).mean : max_mean_cycle(phi).mean;
}

double scgf_R(const MarkovPotential& phi, double t) {
  if (t <= -1.0) return extreme_mean(phi, Extreme::kMax);
  return (t + 1.0) * pressure_value(phi, 1.0 / (t + 1.0));
}

double scgf_Phi(const MarkovPotential& phi, double t) { return pressure_value(phi, 1.0 - t); }

double scgf_PDelta(const MarkovPotential& phi, double t) {
  if (t <= 1.0) return 0.0;
  return (1.0 - t) * extreme_mean(phi, Extreme::kMin);
}

namespace {

// Rows: prefix vertex, columns: suffix vertex, entries exp(s*phi(w)) / exp(shift).
std::vector<std::vector<double>> powered_matrix(const MarkovPotential& phi, double s, double& shift) {
  const std::size_t a = static_cast<std::size_t>(phi.alphabet_size());
  const std::size_t vertices = vertex_count(phi);
  shift = -kInf;
  for (double v : phi.values()) shift = std::max(shift, s * v);
  std::vector<std::vector<double>> m(vertices, std::vector<double>(vertices, 0.0));
  for (std::size_t w = 0; w < phi.size(); ++w) m[w / a][w % vertices] += std::exp(s * phi[w] - shift);
  return m;
}

std::vector<double> multiply_vector(const std::vector<std::vector<double>>& m, const std::vector<double>& f) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = 0; j < f.size(); ++j) out[i] += m[i][j] * f[j];
  }
  return out;
}

// rho_{k-1} of a normalized potential: the fixed point of the column-stochastic
// transfer matrix acting on the right.
std::vector<double> vertex_marginal(const MarkovPotential& phi) {
  double shift = 0.0;
  const auto m = powered_matrix(phi, 1.0, shift);
  std::vector<double> f(m.size(), 1.0 / static_cast<double>(m.size()));
  for (int it = 0; it < 1000000; ++it) {
    auto next = multiply_vector(m, f);
    double total = 0.0;
    for (double x : next) total += x;
    double change = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      next[i] /= total;
      change = std::max(change, std::abs(next[i] - f[i]));
    }
    f = std::move(next);
    if (change < 1e-17) break;
  }
  return f;
}

}  // namespace

double renyi_scgf_finite(const MarkovPotential& phi, double t, int n) {
  require_normalized(phi);
  if (t <= -1.0) throw Error(ErrorCode::kOutOfValidity, "Renyi form needs t > -1");
  if (n < phi.k() - 1 || n < 1) throw Error(ErrorCode::kInvalidBlockLength, "need n >= k-1");
  const double s = 1.0 / (t + 1.0);
  double shift = 0.0;
  const auto m = powered_matrix(phi, s, shift);
  // f_m(u) = sum over strings of length m starting with u of rho([.])^s.
  std::vector<double> f = vertex_marginal(phi);
  for (double& x : f) x = std::pow(x, s);
  double log_scale = 0.0;
  for (int len = phi.k() - 1; len < n; ++len) {
    f = multiply_vector(m, f);
    double top = *std::max_element(f.begin(), f.end());
    for (double& x : f) x /= top;
    log_scale += std::log(top) + shift;
  }
  double total = 0.0;
  for (double x : f) total += x;
  return (t + 1.0) * (log_scale + std::log(total)) / static_cast<double>(n);
}

double renyi_scgf(const MarkovPotential& phi, double t) {
  require_normalized(phi);
  if (t <= -1.0) throw Error(ErrorCode::kOutOfValidity, "Renyi form needs t > -1");
  const double s = 1.0 / (t + 1.0);
  double shift = 0.0;
  const auto m = powered_matrix(phi, s, shift);
  std::vector<double> f = vertex_marginal(phi);
  for (double& x : f) x = std::pow(x, s);
  double previous = kInf;
  for (int it = 0; it < 1000000; ++it) {
    double before = 0.0;
    for (double x : f) before += x;
    auto next = multiply_vector(m, f);
    double after = 0.0;
    for (double x : next) after += x;
    const double rate = std::log(after / before) + shift;
    for (double& x : next) x /= after;
    f = std::move(next);
    if (std::abs(rate - previous) < 1e-15 * (1.0 + std::abs(rate))) return (t + 1.0) * rate;
    previous = rate;
  }
  throw Error(ErrorCode::kConvergence, "Renyi growth rate did not settle");
}

std::vector<EntropyPoint> entropy_curve(const MarkovPotential& phi, const std::vector<double>& betas) {
  std::vector<EntropyPoint> curve;
  curve.reserve(betas.size());
  for (double beta : betas) curve.push_back({beta, pressure(phi, beta).entropy});
  return curve;
}

ZeroTemperatureEntropy zero_temperature_entropy(const MarkovPotential& phi) {
  const double h128 = pressure(phi, 128.0).entropy;
  const double h256 = pressure(phi, 256.0).entropy;
  const double gap = std::abs(h256 - h128);
  return {h256, gap, gap < 1e-4};
}

bool strictly_decreasing(const MarkovPotential& phi, const std::vector<EntropyPoint>& curve) {
  const double log_a = std::log(static_cast<double>(phi.alphabet_size()));
  if (phi.constant() || std::abs(pressure(phi, 1.0).entropy - log_a) < 1e-12) {
    throw Error(ErrorCode::kOutOfValidity,
                "potential is cohomologous to a constant; the entropy curve is flat");
  }
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (!(curve[i].entropy < curve[i - 1].entropy)) return false;
  }
  return true;
}

RateEvaluation rate_I_detail(const MarkovPotential& phi, double u, double beta_max) {
  require_normalized(phi);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double log_a = std::log(static_cast<double>(phi.alphabet_size()));
  constexpr double kEdge = 1e-12;
  if (u < -kEdge || u > log_a + kEdge) return {kInf, nan, RateStatus::kInfinite};
  u = std::clamp(u, 0.0, log_a);

  const SpectralData top = pressure(phi, 0.0);
  if (u >= top.entropy - 1e-14) {
    return {-top.mean_phi - u, 0.0, RateStatus::kOk};
  }
  const SpectralData cold = pressure(phi, beta_max);
  if (cold.entropy > u) {
    const auto zero_t = zero_temperature_entropy(phi);
    if (zero_t.converged) {
      return {-u - extreme_mean(phi, Extreme::kMax), nan, RateStatus::kLinearBranch};
    }
    RateEvaluation flagged{nan, nan, RateStatus::kBracketFailure};
    flagged.entropy_low = cold.entropy;
    flagged.entropy_high = top.entropy;
    return flagged;
  }
  double lo = 0.0, hi = beta_max;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pressure(phi, mid).entropy > u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double beta = 0.5 * (lo + hi);
  const SpectralData at = pressure(phi, beta);
  // First-order correction for the residual entropy mismatch; dI/du = 1/beta - 1.
  const double value = -at.mean_phi - at.entropy + (1.0 / beta - 1.0) * (u - at.entropy);
  return {value, beta, RateStatus::kOk};
}

double rate_I(const MarkovPotential& phi, double u) { return rate_I_detail(phi, u).value; }

double rate_J(const MarkovPotential& phi, double u) {
  const double end = -extreme_mean(phi, Extreme::kMin);
  // Grid points computed as end * j / m can land an ulp outside the domain.
  constexpr double kEdge = 1e-12;
  if (u < -kEdge || u > end + kEdge * std::max(1.0, end)) return kInf;
  return std::clamp(u, 0.0, end);
}

const char* to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::kI: return "I";
    case CurveKind::kJ: return "J";
    case CurveKind::kR: return "R";
    case CurveKind::kPhi: return "Phi";
    case CurveKind::kPDelta: return "PDelta";
  }
  return "?";
}

std::string RateCurve::csv() const {
  std::string out = "kind,abscissa,value\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += std::string(to_string(kind)) + "," + format_real(grid[i]) + "," + format_real(values[i]) + "\n";
  }
  return out;
}

RateCurve tabulate(CurveKind kind, const MarkovPotential& phi, const std::vector<double>& grid) {
  RateCurve curve{kind, grid, {}};
  curve.values.reserve(grid.size());
  for (double x : grid) {
    switch (kind) {
      case CurveKind::kI: curve.values.push_back(rate_I(phi, x)); break;
      case CurveKind::kJ: curve.values.push_back(rate_J(phi, x)); break;
      case CurveKind::kR: curve.values.push_back(scgf_R(phi, x)); break;
      case CurveKind::kPhi: curve.values.push_back(scgf_Phi(phi, x)); break;
      case CurveKind::kPDelta: curve.values.push_back(scgf_PDelta(phi, x)); break;
    }
  }
  return curve;
}

RateCurve rate_I_parametric(const MarkovPotential& phi, const std::vector<double>& slopes) {
  require_normalized(phi);
  std::vector<std::pair<double, double>> points;
  points.emplace_back(0.0, -extreme_mean(phi, Extreme::kMax));
  const SpectralData top = pressure(phi, 0.0);
  points.emplace_back(top.entropy, -top.mean_phi - top.entropy);
  for (double t : slopes) {
    if (t <= -1.0) continue;
    const SpectralData sd = pressure(phi, 1.0 / (t + 1.0));
    points.emplace_back(sd.entropy, -sd.mean_phi - sd.entropy);
  }
  std::sort(points.begin(), points.end());
  RateCurve curve{CurveKind::kI, {}, {}};
  for (const auto& [u, value] : points) {
    if (!curve.grid.empty() && u == curve.grid.back()) continue;
    curve.grid.push_back(u);
    curve.values.push_back(value);
  }
  return curve;
}

double legendre(const RateCurve& curve, double x) {
  double best = -kInf;
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    if (!std::isfinite(curve.values[i])) continue;
    best = std::max(best, x * curve.grid[i] - curve.values[i]);
  }
  if (best == -kInf) throw Error(ErrorCode::kEmptyGrid, "curve has no finite ordinate");
  return best;
}

namespace {

template <typename F>
double second_derivative_at_zero(F f) {
  constexpr double kStep = 1e-3;
  const double f0 = f(0.0);
  auto central = [&](double h) { return (f(h) - 2.0 * f0 + f(-h)) / (h * h); };
  return (4.0 * central(kStep / 2.0) - central(kStep)) / 3.0;
}

}  // namespace

double asymptotic_variance(const MarkovPotential& phi) {
  require_normalized(phi);
  if (phi.constant()) return 0.0;
  return std::max(0.0, second_derivative_at_zero([&](double t) { return scgf_Phi(phi, t); }));
}

double asymptotic_variance_from_R(const MarkovPotential& phi) {
  require_normalized(phi);
  if (phi.constant()) return 0.0;
  return std::max(0.0, second_derivative_at_zero([&](double t) { return scgf_R(phi, t); }));
}

const char* to_string(Functional f) {
  switch (f) {
    case Functional::kH: return "H/k";
    case Functional::kh: return "h";
    case Functional::kD: return "D/k";
    case Functional::kDelta: return "Delta";
  }
  return "?";
}

double fixed_k_rate_lower(const MarkovPotential& phi, int k_fixed, Functional functional, double u) {
  require_normalized(phi);
  if (phi.alphabet_size() != 2 || k_fixed < 1 || k_fixed > 2) {
    throw Error(ErrorCode::kOutOfValidity, "grid search supports |A| = 2 and k <= 2");
  }
  constexpr double kConstraint = 1e-3;
  const BlockDistribution reference = markov_extend(pressure(phi, 1.0).equilibrium, k_fixed);

  auto value_of = [&](const BlockDistribution& nu) {
    switch (functional) {
      case Functional::kH: return shannon_block_entropy(nu) / k_fixed;
      case Functional::kh: return conditional_block_entropy(nu);
      case Functional::kD: return relative_block_entropy(nu, reference) / k_fixed;
      case Functional::kDelta: return conditional_relative_entropy(nu, reference);
    }
    return kInf;
  };

  double best = kInf;
  auto consider = [&](std::vector<double> weights) {
    double total = 0.0;
    for (double& p : weights) p = std::max(p, 0.0);
    for (double p : weights) total += p;
    for (double& p : weights) p /= total;
    const BlockDistribution nu(2, k_fixed, std::move(weights));
    if (std::abs(value_of(nu) - u) > kConstraint) return;
    best = std::min(best, relative_entropy_rate(nu, phi));
  };

  if (k_fixed == 1) {
    constexpr int kSteps = 20000;
    for (int i = 0; i <= kSteps; ++i) {
      const double p = static_cast<double>(i) / kSteps;
      consider({1.0 - p, p});
    }
  } else {
    // Stationary 2-block measures: nu(01) = nu(10) = c, nu(00) = x. A coarse
    // pass, then a finer one around the best coarse point.
    double best_x = -1.0, best_c = -1.0;
    auto scan = [&](double x0, double c0, double step, int half_width) {
      for (int i = -half_width; i <= half_width; ++i) {
        const double x = x0 + i * step;
        for (int j = -half_width; j <= half_width; ++j) {
          const double c = c0 + j * step;
          if (x < 0.0 || c < 0.0 || x + 2.0 * c > 1.0 + 1e-15) continue;
          const double before = best;
          consider({x, c, c, std::max(0.0, 1.0 - x - 2.0 * c)});
          if (best < before) {
            best_x = x;
            best_c = c;
          }
        }
      }
    };
    constexpr double kCoarse = 1.0 / 400;
    scan(0.5, 0.25, kCoarse, 200);
    if (best_x >= 0.0) scan(best_x, best_c, kCoarse / 40, 80);
  }
  return best;
}

}  // namespace blockent
