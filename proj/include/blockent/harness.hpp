#pragma once

// Experiments tying the theory to simulation: LLN runs, the exact finite-n
// SCGF by enumeration, Monte Carlo SCGF and rate histograms, the
// decomposition audit of the entropy estimator and the variance audit.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blockent/entropy.hpp"
#include "blockent/thermo.hpp"

namespace blockent {

struct ExperimentConfig {
  MarkovPotential potential{2, 1, {-0.6931471805599453, -0.6931471805599453}};
  double epsilon = 0.2;
  std::vector<std::int64_t> n_grid{1000};
  int replicas = 100;
  std::vector<double> t_grid{0.0};
  std::vector<double> u_grid{};
  std::uint64_t seed = 1;
  double bin_width = 0.01;
  int exact_n = 12;  // string length of the enumeration oracle
  int threads = 1;

  /// Throws kInvalidConfig on any violated invariant.
  void validate() const;
};

struct SampleRow {
  std::int64_t replica;
  std::uint64_t seed;
  EntropyRecord record;
};

struct LlnRow {
  std::int64_t n;
  int k;
  double mean_abs_dev;    // mean over replicas of |h_k - h(rho)|
  double median_abs_dev;  // median of the same
  double median_abs_delta;
};

struct ScgfRow {
  double t;
  double exact_n;
  double mc;
  double mc_stderr;
  bool high_variance;
  double R_theory;
  double Phi_theory;
};

struct RateRow {
  double u;
  double emp_rate;
  double I_theory;
  double J_theory;
};

struct AuditRow {
  std::int64_t n;
  int k;
  std::int64_t replica;
  std::uint64_t seed;
  double lhs;
  double birkhoff;
  double delta;
  double C_n;
  double bound;
};

struct VarianceAudit {
  double sigma2_theory;
  double sigma2_empirical;
  double z;
};

struct LdpReport {
  ExperimentConfig config;
  double entropy_theory = 0.0;
  double mean_phi_theory = 0.0;
  std::vector<SampleRow> samples;
  std::vector<LlnRow> lln;
  std::vector<ScgfRow> scgf;
  std::vector<RateRow> rate;
  std::vector<AuditRow> audit;
  VarianceAudit variance{0.0, 0.0, 0.0};

  std::string samples_csv() const;
  std::string scgf_csv() const;
  std::string rate_csv() const;
  std::string audit_csv() const;
};

/// Plug-in estimates for every (n, replica); fills samples and lln.
LdpReport run_lln(const ExperimentConfig& config);

/// run_lln plus the SCGF, rate, audit and variance tables.
LdpReport run_experiment(const ExperimentConfig& config);

/// (1/n) ln sum_{x in A^n} rho([x]) exp(n t F(x)) for each t, where F is the
/// cyclic plug-in functional at block length k and rho the equilibrium of the
/// normalized phi. Needs |A|^n <= 2^22 and n >= max(k, depth).
std::vector<double> exact_finite_scgf(const MarkovPotential& phi, int n, int k, std::span<const double> ts,
                                      Functional functional);
double exact_finite_scgf(const MarkovPotential& phi, int n, int k, double t, Functional functional);

struct McEstimate {
  double estimate;
  double stderr_;
  bool high_variance;  // effective sample size below a tenth of the replicas
};

/// (1/n) ln mean_i exp(n t f_i) by log-sum-exp, delta-method standard error.
McEstimate mc_scgf(std::span<const double> values, std::int64_t n, double t);

/// Functional values of the plug-in estimator over replicas at length n.
std::vector<double> sample_functional(const ExperimentConfig& config, std::int64_t n, Functional functional);

/// -(1/n) ln(fraction of values in [u - w/2, u + w/2)) per grid point; +inf for empty bins.
std::vector<double> empirical_rate(std::span<const double> values, std::int64_t n, std::span<const double> u_grid,
                                   double bin_width);

struct Decomposition {
  double lhs;       // h_k(x) - h(rho)
  double birkhoff;  // -(1/n) sum of windowed (phi o T^j - E[phi])
  double delta;     // -Delta_k(x | rho)
  double C_n;       // residual making the split an identity
};

Decomposition decomposition_audit(const SamplePath& x, const MarkovPotential& phi, int k);

/// sigma^2 = Phi''(0) against n * Var(S_n / n) over the replicas at length n.
VarianceAudit variance_audit(const MarkovPotential& phi, std::int64_t n, int replicas, std::uint64_t seed,
                             int threads = 1);

}  // namespace blockent
