#include "blockent/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "blockent/error.hpp"
#include "blockent/format.hpp"
#include "blockent/simulate.hpp"

namespace blockent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index
// writes only its own slot, so results do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body body) {
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

double functional_value(const EntropyRecord& r, Functional functional) {
  switch (functional) {
    case Functional::kH: return r.H_k / r.k;
    case Functional::kh: return r.h_k;
    case Functional::kD: return r.D_k.value_or(kInf) / r.k;
    case Functional::kDelta: return r.Delta_k.value_or(kInf);
  }
  return kInf;
}

void require_normalized(const MarkovPotential& phi) {
  if (!phi.normalized()) throw Error(ErrorCode::kInvalidConfig, "experiment needs a normalized potential");
}

// log-sum-exp accumulator
struct LogSum {
  double max = -kInf;
  double sum = 0.0;

  void add(double x) {
    if (x == -kInf) return;
    if (x > max) {
      sum = sum * std::exp(max - x) + 1.0;
      max = x;
    } else {
      sum += std::exp(x - max);
    }
  }
  double value() const { return max == -kInf ? -kInf : max + std::log(sum); }
};

struct ReplicaOutcome {
  SampleRow sample;
  AuditRow audit;
  double birkhoff_sum;
};

struct Pass {
  std::int64_t n;
  int k;
  std::vector<ReplicaOutcome> replicas;
};

std::vector<Pass> run_replicas(const ExperimentConfig& config) {
  config.validate();
  const MarkovPotential& phi = config.potential;
  const SpectralData sd = pressure(phi, 1.0);
  std::vector<Pass> passes;
  for (auto n : config.n_grid) {
    const int k = block_schedule(n, phi.alphabet_size(), config.epsilon);
    const BlockDistribution reference = markov_extend(sd.equilibrium, k);
    Pass pass{n, k, std::vector<ReplicaOutcome>(static_cast<std::size_t>(config.replicas))};
    parallel_for(pass.replicas.size(), config.threads, [&](std::size_t r) {
      const std::uint64_t seed = replica_seed(config.seed, r);
      SamplerSpec spec{sd, n, seed, InitMode::kStationary, 0};
      const SamplePath x = sample_path(spec);
      const EntropyRecord record = plug_in_estimates(x, k, reference);
      const double sum = birkhoff_sum(x, phi);
      const double windows = static_cast<double>(n - phi.k() + 1);
      const double nd = static_cast<double>(n);
      const double lhs = record.h_k - sd.entropy;
      const double birkhoff = -(sum - windows * sd.mean_phi) / nd;
      const double delta = -*record.Delta_k;
      pass.replicas[r] = {SampleRow{static_cast<std::int64_t>(r), seed, record},
                          AuditRow{n, k, static_cast<std::int64_t>(r), seed, lhs, birkhoff, delta,
                                   lhs - birkhoff - delta, 10.0 * k / nd},
                          sum};
    });
    passes.push_back(std::move(pass));
  }
  return passes;
}

LdpReport summarize(const ExperimentConfig& config, const std::vector<Pass>& passes) {
  const SpectralData sd = pressure(config.potential, 1.0);
  LdpReport report;
  report.config = config;
  report.entropy_theory = sd.entropy;
  report.mean_phi_theory = sd.mean_phi;
  for (const auto& pass : passes) {
    std::vector<double> dev, delta;
    double total = 0.0;
    for (const auto& r : pass.replicas) {
      report.samples.push_back(r.sample);
      dev.push_back(std::abs(r.sample.record.h_k - sd.entropy));
      delta.push_back(std::abs(*r.sample.record.Delta_k));
      total += dev.back();
    }
    report.lln.push_back({pass.n, pass.k, total / static_cast<double>(dev.size()), median(dev), median(delta)});
  }
  return report;
}

VarianceAudit variance_from_sums(const MarkovPotential& phi, std::span<const double> sums, std::int64_t n) {
  const double theory = asymptotic_variance(phi);
  const double count = static_cast<double>(sums.size());
  double mean = 0.0;
  for (double s : sums) mean += s;
  mean /= count;
  double ss = 0.0;
  for (double s : sums) ss += (s - mean) * (s - mean);
  const double empirical = sums.size() > 1 ? ss / (count - 1.0) / static_cast<double>(n) : 0.0;
  double z = 0.0;
  if (theory > 0.0 && sums.size() > 1) {
    z = (empirical - theory) / (theory * std::sqrt(2.0 / (count - 1.0)));
  } else if (empirical > 1e-12) {
    z = kInf;
  }
  return {theory, empirical, z};
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kInvalidConfig, why); };
  if (potential.alphabet_size() < 2) fail("alphabet size must be >= 2");
  if (!potential.normalized()) fail("potential is not normalized");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
  if (n_grid.empty()) fail("n-grid is empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2 || n_grid[i] < potential.k()) fail("n-grid entries must be >= max(2, depth)");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) fail("n-grid must be strictly ascending");
  }
  if (replicas < 1) fail("replica count must be >= 1");
  if (!(bin_width > 0.0)) fail("bin width must be positive");
  if (exact_n < potential.k()) fail("exact_n must be >= depth");
  if (threads < 1) fail("threads must be >= 1");
}

std::string LdpReport::samples_csv() const {
  std::string out = "n,k,replica,seed,Hk,hk,Dk,Dk_rel\n";
  for (const auto& s : samples) {
    const auto& r = s.record;
    out += std::to_string(r.n) + "," + std::to_string(r.k) + "," + std::to_string(s.replica) + "," +
           std::to_string(s.seed) + "," + format_real(r.H_k) + "," + format_real(r.h_k) + "," +
           (r.D_k ? format_real(*r.D_k) : "") + "," + (r.Delta_k ? format_real(*r.Delta_k) : "") + "\n";
  }
  return out;
}

std::string LdpReport::scgf_csv() const {
  std::string out = "t,exact_n,mc,stderr,R_theory,Phi_theory\n";
  for (const auto& r : scgf) {
    out += format_real(r.t) + "," + format_real(r.exact_n) + "," + format_real(r.mc) + "," +
           format_real(r.mc_stderr) + "," + format_real(r.R_theory) + "," + format_real(r.Phi_theory) + "\n";
  }
  return out;
}

std::string LdpReport::rate_csv() const {
  std::string out = "u,emp_rate,I_theory,J_theory\n";
  for (const auto& r : rate) {
    out += format_real(r.u) + "," + format_real(r.emp_rate) + "," + format_real(r.I_theory) + "," +
           format_real(r.J_theory) + "\n";
  }
  return out;
}

std::string LdpReport::audit_csv() const {
  std::string out = "n,k,replica,seed,lhs,birkhoff,delta,Cn,bound\n";
  for (const auto& r : audit) {
    out += std::to_string(r.n) + "," + std::to_string(r.k) + "," + std::to_string(r.replica) + "," +
           std::to_string(r.seed) + "," + format_real(r.lhs) + "," + format_real(r.birkhoff) + "," +
           format_real(r.delta) + "," + format_real(r.C_n) + "," + format_real(r.bound) + "\n";
  }
  return out;
}

LdpReport run_lln(const ExperimentConfig& config) { return summarize(config, run_replicas(config)); }

LdpReport run_experiment(const ExperimentConfig& config) {
  const auto passes = run_replicas(config);
  LdpReport report = summarize(config, passes);
  const MarkovPotential& phi = config.potential;
  const Pass& last = passes.back();

  std::vector<double> h_values, sums;
  for (const auto& r : last.replicas) {
    h_values.push_back(r.sample.record.h_k);
    sums.push_back(r.birkhoff_sum);
  }
  for (const auto& pass : passes) {
    for (const auto& r : pass.replicas) report.audit.push_back(r.audit);
  }

  const int exact_k = std::max(phi.k(), block_schedule(config.exact_n, phi.alphabet_size(), config.epsilon));
  const auto exact = exact_finite_scgf(phi, config.exact_n, exact_k, config.t_grid, Functional::kh);
  for (std::size_t i = 0; i < config.t_grid.size(); ++i) {
    const double t = config.t_grid[i];
    const McEstimate mc = mc_scgf(h_values, last.n, t);
    report.scgf.push_back({t, exact[i], mc.estimate, mc.stderr_, mc.high_variance, scgf_R(phi, t), scgf_Phi(phi, t)});
  }

  const auto emp = empirical_rate(h_values, last.n, config.u_grid, config.bin_width);
  for (std::size_t i = 0; i < config.u_grid.size(); ++i) {
    const double u = config.u_grid[i];
    report.rate.push_back({u, emp[i], rate_I(phi, u), rate_J(phi, u)});
  }
  report.variance = variance_from_sums(phi, sums, last.n);
  return report;
}

std::vector<double> exact_finite_scgf(const MarkovPotential& phi, int n, int k, std::span<const double> ts,
                                      Functional functional) {
  require_normalized(phi);
  const int depth = phi.k();
  if (k < 1 || n < std::max(k, depth)) throw Error(ErrorCode::kInvalidBlockLength, "need n >= max(k, depth)");
  const std::size_t a = static_cast<std::size_t>(phi.alphabet_size());
  std::size_t space = 1;
  for (int i = 0; i < n; ++i) {
    space *= a;
    if (space > (std::size_t{1} << 22)) throw Error(ErrorCode::kTooLarge, "|A|^n exceeds 2^22");
  }

  const BlockDistribution eq = pressure(phi, 1.0).equilibrium;
  const BlockDistribution reference = markov_extend(eq, k);
  const std::size_t contexts = eq.size() / a;
  std::vector<double> log_kernel(eq.size());
  for (std::size_t u = 0; u < contexts; ++u) {
    double mass = 0.0;
    for (std::size_t b = 0; b < a; ++b) mass += eq[u * a + b];
    for (std::size_t b = 0; b < a; ++b) log_kernel[u * a + b] = std::log(eq[u * a + b] / mass);
  }

  // Cylinder masses grouped by cyclic k-block type.
  const std::size_t words = word_count(phi.alphabet_size(), k);
  const std::size_t eq_words = eq.size();
  std::vector<std::int64_t> counts(words, 0);
  std::vector<std::uint8_t> x(static_cast<std::size_t>(n));
  std::map<std::vector<std::int64_t>, LogSum> types;

  auto window_at = [&](std::size_t start, std::size_t length) {
    Word w = 0;
    for (std::size_t i = 0; i < length; ++i) w = w * a + x[(start + i) % x.size()];
    return w;
  };
  auto recurse = [&](auto&& self, std::size_t depth_now, double log_mass) -> void {
    if (depth_now == x.size()) {
      std::vector<Word> wrap;
      for (std::size_t s = x.size() - static_cast<std::size_t>(k) + 1; s < x.size(); ++s) {
        wrap.push_back(window_at(s, static_cast<std::size_t>(k)));
        ++counts[wrap.back()];
      }
      types[counts].add(log_mass);
      for (auto w : wrap) --counts[w];
      return;
    }
    for (std::size_t b = 0; b < a; ++b) {
      x[depth_now] = static_cast<std::uint8_t>(b);
      const std::size_t len = depth_now + 1;
      double next = log_mass;
      if (len == static_cast<std::size_t>(depth)) {
        next = std::log(eq[window_at(0, len)]);
      } else if (len > static_cast<std::size_t>(depth)) {
        next += log_kernel[window_at(len - static_cast<std::size_t>(depth), static_cast<std::size_t>(depth)) %
                           eq_words];
      }
      Word added = 0;
      const bool counted = len >= static_cast<std::size_t>(k);
      if (counted) {
        added = window_at(len - static_cast<std::size_t>(k), static_cast<std::size_t>(k));
        ++counts[added];
      }
      self(self, len, next);
      if (counted) --counts[added];
    }
  };
  recurse(recurse, 0, 0.0);

  std::vector<double> log_mass, value;
  LogSum total;
  for (const auto& [table, sum] : types) {
    std::vector<double> weights(table.size());
    for (std::size_t w = 0; w < table.size(); ++w) weights[w] = static_cast<double>(table[w]) / n;
    const BlockDistribution nu(phi.alphabet_size(), k, std::move(weights));
    double f = 0.0;
    switch (functional) {
      case Functional::kH: f = shannon_block_entropy(nu) / k; break;
      case Functional::kh: f = conditional_block_entropy(nu); break;
      case Functional::kD: f = relative_block_entropy(nu, reference) / k; break;
      case Functional::kDelta: f = conditional_relative_entropy(nu, reference); break;
    }
    log_mass.push_back(sum.value());
    value.push_back(f);
    total.add(sum.value());
  }

  // Dividing by the computed total mass (1 up to rounding) makes t = 0 exact.
  std::vector<double> out;
  for (double t : ts) {
    LogSum acc;
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (t == 0.0) {
        acc.add(log_mass[i]);
      } else {
        acc.add(log_mass[i] + n * t * value[i]);
      }
    }
    const double result = (acc.value() - total.value()) / n;
    if (!std::isfinite(result)) throw Error(ErrorCode::kNumeric, "finite-n SCGF is not finite");
    out.push_back(result);
  }
  return out;
}

double exact_finite_scgf(const MarkovPotential& phi, int n, int k, double t, Functional functional) {
  return exact_finite_scgf(phi, n, k, std::span<const double>(&t, 1), functional).front();
}

McEstimate mc_scgf(std::span<const double> values, std::int64_t n, double t) {
  if (values.empty()) throw Error(ErrorCode::kInvalidConfig, "no replicas");
  const double nd = static_cast<double>(n);
  LogSum acc;
  double top = -kInf;
  for (double v : values) {
    const double x = t == 0.0 ? 0.0 : nd * t * v;
    if (!std::isfinite(x)) throw Error(ErrorCode::kNumeric, "exponent is not finite");
    acc.add(x);
    top = std::max(top, x);
  }
  const double count = static_cast<double>(values.size());
  const double estimate = (acc.value() - std::log(count)) / nd;

  // Weights scaled by the largest term; delta method on ln of their mean.
  double sum = 0.0, sum_sq = 0.0;
  for (double v : values) {
    const double w = std::exp((t == 0.0 ? 0.0 : nd * t * v) - top);
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / count;
  double stderr_ = 0.0;
  if (values.size() > 1) {
    const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
    stderr_ = std::sqrt(var / count) / mean / nd;
  }
  const double ess = sum * sum / sum_sq;
  return {estimate, stderr_, ess < 0.1 * count};
}

std::vector<double> sample_functional(const ExperimentConfig& config, std::int64_t n, Functional functional) {
  config.validate();
  const SpectralData sd = pressure(config.potential, 1.0);
  const int k = block_schedule(n, config.potential.alphabet_size(), config.epsilon);
  const BlockDistribution reference = markov_extend(sd.equilibrium, k);
  std::vector<double> values(static_cast<std::size_t>(config.replicas));
  parallel_for(values.size(), config.threads, [&](std::size_t r) {
    const SamplePath x = sample_path(SamplerSpec{sd, n, replica_seed(config.seed, r), InitMode::kStationary, 0});
    values[r] = functional_value(plug_in_estimates(x, k, reference), functional);
  });
  return values;
}

std::vector<double> empirical_rate(std::span<const double> values, std::int64_t n, std::span<const double> u_grid,
                                   double bin_width) {
  if (values.empty()) throw Error(ErrorCode::kInvalidConfig, "no replicas");
  if (!(bin_width > 0.0)) throw Error(ErrorCode::kInvalidConfig, "bin width must be positive");
  std::vector<double> out;
  for (double u : u_grid) {
    std::size_t hits = 0;
    for (double v : values) {
      if (v >= u - 0.5 * bin_width && v < u + 0.5 * bin_width) ++hits;
    }
    const double freq = static_cast<double>(hits) / static_cast<double>(values.size());
    out.push_back(hits == 0 ? kInf : -std::log(freq) / static_cast<double>(n));
  }
  return out;
}

Decomposition decomposition_audit(const SamplePath& x, const MarkovPotential& phi, int k) {
  require_normalized(phi);
  const SpectralData sd = pressure(phi, 1.0);
  const auto record = plug_in_estimates(x, k, markov_extend(sd.equilibrium, k));
  const double n = static_cast<double>(x.size());
  const double windows = static_cast<double>(x.size()) - phi.k() + 1;
  const double lhs = record.h_k - sd.entropy;
  const double birkhoff = -(birkhoff_sum(x, phi) - windows * sd.mean_phi) / n;
  const double delta = -*record.Delta_k;
  return {lhs, birkhoff, delta, lhs - birkhoff - delta};
}

VarianceAudit variance_audit(const MarkovPotential& phi, std::int64_t n, int replicas, std::uint64_t seed,
                             int threads) {
  require_normalized(phi);
  if (replicas < 1) throw Error(ErrorCode::kInvalidConfig, "replica count must be >= 1");
  const SpectralData sd = pressure(phi, 1.0);
  std::vector<double> sums(static_cast<std::size_t>(replicas));
  parallel_for(sums.size(), threads, [&](std::size_t r) {
    sums[r] = birkhoff_sum(sample_path(SamplerSpec{sd, n, replica_seed(seed, r), InitMode::kStationary, 0}), phi);
  });
  return variance_from_sums(phi, sums, n);
}

}  // namespace blockent
