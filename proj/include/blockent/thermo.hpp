#pragma once

// Thermodynamic formalism for cylindrical potentials on the full shift.
//
// A MarkovPotential of depth k assigns a real phi(w) to every k-word. Its
// transfer matrix acts on (k-1)-word vertices, M[prefix(w)][suffix(w)] +=
// exp(beta * phi(w)); for k = 1 there is a single vertex carrying |A| loops.
// A potential is normalized (a g-function) when
//   sum_b exp(phi(b s)) = 1   for every (k-1)-word s,
// i.e. every column of M sums to one at beta = 1.

#include <optional>
#include <string>
#include <vector>

#include "blockent/measures.hpp"

namespace blockent {

class MarkovPotential {
 public:
  static constexpr double kNormalizationTolerance = 1e-10;

  MarkovPotential(int alphabet_size, int k, std::vector<double> values);

  int alphabet_size() const noexcept { return alphabet_size_; }
  int k() const noexcept { return k_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](Word w) const { return values_[w]; }

  /// max_s |sum_b exp(phi(b s)) - 1|.
  double normalization_defect() const;
  bool normalized() const { return normalization_defect() < kNormalizationTolerance; }

  double sup_norm() const;
  bool constant() const;

  MarkovPotential scaled(double beta) const;
  /// The same function viewed as a depth-k cylinder with k >= this->k().
  MarkovPotential lifted(int k) const;

 private:
  int alphabet_size_;
  int k_;
  std::vector<double> values_;
};

/// Perron data of the transfer matrix of beta * phi.
struct SpectralData {
  double beta = 0.0;
  double pressure = 0.0;
  std::vector<double> left_eigvec;   // l M = lambda l, normalized to sum 1
  std::vector<double> right_eigvec;  // M r = lambda r, normalized to sum 1
  BlockDistribution equilibrium;     // k-marginal of the equilibrium state
  double entropy = 0.0;              // h(rho_beta), via the conditional k-block entropy
  double mean_phi = 0.0;             // E_{rho_beta}[phi] for the unscaled phi
};

/// phi(w) = ln rho_k(w) - ln rho_{k-1}(suffix(w)); rho_{k-1} is the left
/// marginal of rho_k.
MarkovPotential potential_from_marginals(const BlockDistribution& rho_k);
MarkovPotential potential_from_marginals(const BlockDistribution& rho_k, const BlockDistribution& rho_km1);

/// Potential of the stationary Markov chain with forward transition matrix P.
MarkovPotential markov_chain_potential(const std::vector<std::vector<double>>& transition);
MarkovPotential bernoulli_potential(const std::vector<double>& probabilities);

SpectralData pressure(const MarkovPotential& phi, double beta = 1.0);

struct NormalizedPotential {
  MarkovPotential potential;
  double pressure;
};

/// Cohomologous normalized potential phi + ln l(prefix) - ln l(suffix) - P.
NormalizedPotential normalize_potential(const MarkovPotential& phi);

/// (1/n) ln sum_{a_1^n} exp(sup over the cylinder of beta * S_n phi), by
/// enumeration; needs |A|^n <= 2^24.
double direct_pressure_estimate(const MarkovPotential& phi, double beta, int n);

/// -E_nu[phi] - h(nu) for a stationary (nu.k()-1)-step Markov measure nu.
double relative_entropy_rate(const BlockDistribution& nu, const MarkovPotential& phi);

struct MeanCycle {
  double mean;
  std::vector<Word> arcs;  // rotated to start at the arc with minimal label
};

/// Karp's minimum mean cycle on the de Bruijn graph weighted by phi.
MeanCycle min_mean_cycle(const MarkovPotential& phi);
MeanCycle max_mean_cycle(const MarkovPotential& phi);

enum class Extreme { kMin, kMax };
double extreme_mean(const MarkovPotential& phi, Extreme which);

/// R(t): (t+1) P(phi/(t+1)) for t > -1, max mean cycle otherwise.
double scgf_R(const MarkovPotential& phi, double t);
/// Phi(t) = P((1-t) phi).
double scgf_Phi(const MarkovPotential& phi, double t);
/// P^Delta(t) = (1-t) min mean cycle for t > 1, 0 otherwise.
double scgf_PDelta(const MarkovPotential& phi, double t);

/// Renyi route to R(t): (t+1) times the growth rate of
/// sum_{a_1^n} rho([a_1^n])^{1/(t+1)}, iterated until the ratio of
/// successive sums settles. Independent of the Perron solver.
double renyi_scgf(const MarkovPotential& phi, double t);
/// Finite-n version (t+1)(1/n) ln sum_{a_1^n} rho([a_1^n])^{1/(t+1)}.
double renyi_scgf_finite(const MarkovPotential& phi, double t, int n);

struct EntropyPoint {
  double beta;
  double entropy;
};

std::vector<EntropyPoint> entropy_curve(const MarkovPotential& phi, const std::vector<double>& betas);

struct ZeroTemperatureEntropy {
  double value;      // h(rho_256)
  double gap;        // |h(256) - h(128)|
  bool converged;    // gap < 1e-4
};

ZeroTemperatureEntropy zero_temperature_entropy(const MarkovPotential& phi);

/// Strict decrease of the curve; throws kOutOfValidity for a constant
/// potential, whose curve is flat.
bool strictly_decreasing(const MarkovPotential& phi, const std::vector<EntropyPoint>& curve);

enum class RateStatus { kOk, kLinearBranch, kInfinite, kBracketFailure };

struct RateEvaluation {
  double value;
  double beta;  // beta_u on the strictly convex branch, NaN otherwise
  RateStatus status;
  double entropy_low = 0.0;  // achieved entropy range when bracketing fails
  double entropy_high = 0.0;
};

inline constexpr double kDefaultBetaMax = 256.0;

RateEvaluation rate_I_detail(const MarkovPotential& phi, double u, double beta_max = kDefaultBetaMax);
double rate_I(const MarkovPotential& phi, double u);
double rate_J(const MarkovPotential& phi, double u);

enum class CurveKind { kI, kJ, kR, kPhi, kPDelta };
const char* to_string(CurveKind kind);

struct RateCurve {
  CurveKind kind;
  std::vector<double> grid;
  std::vector<double> values;

  std::string csv() const;  // kind,abscissa,value rows with header
};

RateCurve tabulate(CurveKind kind, const MarkovPotential& phi, const std::vector<double>& grid);

/// I sampled along its exact parametrization u = h(rho_beta) for the
/// tangent slopes t in `slopes` (beta = 1/(t+1)), plus the linear branch
/// end points 0 and h(rho_beta) at the largest beta, plus u = ln|A|.
RateCurve rate_I_parametric(const MarkovPotential& phi, const std::vector<double>& slopes);

/// sup over the grid of x*u - curve(u); infinite ordinates are skipped.
double legendre(const RateCurve& curve, double x);

/// sigma^2 = Phi''(0), by Richardson-extrapolated central differences.
double asymptotic_variance(const MarkovPotential& phi);
/// The same second derivative taken from R.
double asymptotic_variance_from_R(const MarkovPotential& phi);

enum class Functional { kH, kh, kD, kDelta };
const char* to_string(Functional f);

/// Grid search over (k_fixed-1)-step Markov measures for the contracted rate
/// inf{h(nu|rho) : functional(nu_k) = u}, constraint met within 1e-3. An
/// upper bound on the infimum; +infinity when no grid point is feasible.
double fixed_k_rate_lower(const MarkovPotential& phi, int k_fixed, Functional functional, double u);

}  // namespace blockent
