// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "blockent/entropy.hpp"
#include "blockent/harness.hpp"
#include "blockent/io.hpp"
#include "blockent/simulate.hpp"
#include "blockent/thermo.hpp"
#include "blockent/types.hpp"
#include "oracles.hpp"

using namespace blockent;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, pattern, args...);
  return buffer;
}

const std::vector<std::vector<double>> kChain{{0.9, 0.1}, {0.2, 0.8}};

MarkovPotential chain() { return markov_chain_potential(kChain); }

double chain_entropy() { return oracle::markov_entropy_rate(kChain, oracle::two_state_stationary(0.1, 0.2)); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome type_bound_sandwich() {
  int checked = 0, euler_bad = 0, lower_bad = 0, upper_bad = 0, count_bad = 0;
  std::string upper_cases;
  for (int n = 1; n <= 10; ++n) {
    for (int k = 1; k <= std::min(n, 3); ++k) {
      std::map<std::vector<std::int64_t>, std::int64_t> groups;
      for (std::size_t i = 0; i < oracle::ipow(2, n); ++i) {
        ++groups[oracle::cyclic_counts(oracle::digits_of(i, 2, n), 2, k)];
      }
      if (static_cast<double>(groups.size()) > type_count_bound(n, k, 2)) ++count_bad;
      for (const auto& [counts, size] : groups) {
        const CountTable table(2, k, counts);
        const auto b = type_class_size_bounds(table);
        const double s = static_cast<double>(size);
        const double slack = 1e-12 * s;
        ++checked;
        if (s < b.euler_lower - slack || s > b.euler_upper + slack) ++euler_bad;
        if (s < b.entropy_lower - slack) ++lower_bad;
        if (s > b.entropy_upper + slack) {
          ++upper_bad;
          upper_cases += fmt(" n=%d,k=%d,size=%lld,bound=%.3g", n, k, static_cast<long long>(size), b.entropy_upper);
        }
      }
    }
  }
  return {euler_bad + lower_bad + upper_bad + count_bad == 0,
          fmt("%d tables; euler violations %d, entropy lower %d, entropy upper %d, type count %d", checked, euler_bad,
              lower_bad, upper_bad, count_bad) +
              (upper_cases.empty() ? "" : "; upper violations:" + upper_cases)};
}

Outcome rounding_to_types() {
  std::mt19937_64 rng(101);
  int cases = 0, tv_bad = 0, realize_bad = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int a = 2 + i % 2;
    const int k = 1 + (i / 2) % 3;
    const std::int64_t n = (i / 6) % 2 ? 500 : 50;
    const auto weights = i % 3 ? oracle::random_full_stationary(rng, a, k) : oracle::random_stationary(rng, a, k);
    const BlockDistribution nu(a, k, weights);
    const auto mu = round_to_type(nu, n);
    const double allowed = (k + 2) * std::pow(a, k) / static_cast<double>(n);
    const double tv = tv_distance(nu, mu);
    worst_ratio = std::max(worst_ratio, tv / allowed);
    if (tv > allowed) ++tv_bad;
    std::vector<std::int64_t> counts(mu.size());
    bool integral = true;
    for (std::size_t w = 0; w < mu.size(); ++w) {
      const double c = mu[w] * static_cast<double>(n);
      counts[w] = std::llround(c);
      integral = integral && std::abs(c - static_cast<double>(counts[w])) < 1e-6;
    }
    bool realized = integral;
    if (integral) {
      const SamplePath x = realize_sample(CountTable(a, k, counts));
      std::vector<int> symbols(x.symbols().begin(), x.symbols().end());
      realized = static_cast<std::int64_t>(x.size()) == n && oracle::cyclic_counts(symbols, a, k) == counts;
    }
    if (!realized) ++realize_bad;
    ++cases;
  }
  return {tv_bad == 0 && realize_bad == 0,
          fmt("%d inputs; tv over bound %d, not realizable %d, worst tv/bound %.3f", cases, tv_bad, realize_bad,
              worst_ratio)};
}

Outcome continuity_certificate() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> share(1e-4, 0.18);
  int cases = 0, violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const int a = 2 + i % 2;
    const int k = 1 + (i / 2) % 3;
    const auto nu = i % 2 ? oracle::random_full_stationary(rng, a, k) : oracle::random_stationary(rng, a, k);
    const auto other = oracle::random_stationary(rng, a, k);
    const double s = share(rng);
    std::vector<double> mu(nu.size());
    for (std::size_t w = 0; w < mu.size(); ++w) mu[w] = (1.0 - s) * nu[w] + s * other[w];
    const BlockDistribution p(a, k, nu), q(a, k, mu);
    const double delta = tv_distance(p, q);
    if (delta == 0.0 || delta > std::exp(-1.0)) continue;
    const double gap = std::abs(conditional_block_entropy(p) - conditional_block_entropy(q));
    const double bound = continuity_bound(delta, k, a);
    worst = std::max(worst, gap / bound);
    if (gap > bound) ++violations;
    ++cases;
  }
  return {violations == 0 && cases >= 9000,
          fmt("%d pairs; %d violations, worst gap/bound %.3f", cases, violations, worst)};
}

Outcome zero_entropy_cycles() {
  std::mt19937_64 rng(303);
  int inputs = 0, cycles = 0, nonzero = 0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int a = 2 + i % 2;
    const int k = 1 + (i / 2) % 3;
    const auto weights = i % 2 ? oracle::random_full_stationary(rng, a, k) : oracle::random_stationary(rng, a, k, 5);
    const BlockDistribution nu(a, k, weights);
    std::vector<double> sum(nu.size(), 0.0);
    for (const auto& wc : cycle_decompose(nu)) {
      const auto d = wc.cycle.distribution(a, k);
      if (conditional_block_entropy(d) != 0.0) ++nonzero;
      for (std::size_t w = 0; w < sum.size(); ++w) sum[w] += wc.weight * d[w];
      ++cycles;
    }
    for (std::size_t w = 0; w < sum.size(); ++w) worst = std::max(worst, std::abs(sum[w] - nu[w]));
    ++inputs;
  }
  return {nonzero == 0 && worst <= 1e-10,
          fmt("%d inputs, %d cycles; nonzero h_k %d, recombination error %.2e", inputs, cycles, nonzero, worst)};
}

Outcome variational_identity() {
  std::mt19937_64 rng(404);
  double worst = 0.0;
  int cases = 0;
  for (int i = 0; i < 100; ++i) {
    const int a = 2 + i % 2;
    const int k = 1 + (i / 2) % 3;
    const MarkovPotential phi(a, k, oracle::random_weights(rng, a, k));
    for (double beta : {0.0, 0.5, 1.0, 2.0, 10.0}) {
      const auto sd = pressure(phi, beta);
      worst = std::max(worst, std::abs(sd.pressure - sd.entropy - beta * sd.mean_phi));
      ++cases;
    }
  }
  return {worst < 1e-9, fmt("%d cases; max |P - h - beta E phi| = %.2e", cases, worst)};
}

Outcome pressure_definition() {
  std::mt19937_64 rng(505);
  std::vector<MarkovPotential> potentials{chain()};
  for (int k : {1, 2, 3, 2}) potentials.emplace_back(2, k, oracle::random_weights(rng, 2, k));
  bool monotone = true, shape = true;
  double worst_spread = 0.0;
  int exact = 0;
  for (const auto& phi : potentials) {
    const double p = pressure(phi, 1.0).pressure;
    std::vector<double> ns, gaps;
    for (int n = 8; n <= 20; ++n) {
      ns.push_back(n);
      gaps.push_back(std::abs(direct_pressure_estimate(phi, 1.0, n) - p));
    }
    // Depth-one potentials have exact cylinder sums; their gap is rounding noise.
    if (*std::max_element(gaps.begin(), gaps.end()) < 1e-10) {
      ++exact;
      continue;
    }
    for (std::size_t i = 1; i < gaps.size(); ++i) monotone = monotone && gaps[i] <= gaps[i - 1];
    // Least-squares fit of gap = C / n, then the spread of n * gap / C.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      num += gaps[i] / ns[i];
      den += 1.0 / (ns[i] * ns[i]);
    }
    const double c = num / den;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double spread = c > 0.0 ? std::abs(ns[i] * gaps[i] / c - 1.0) : 0.0;
      worst_spread = std::max(worst_spread, spread);
      if (gaps[i] > 1.25 * c / ns[i] + 1e-12) shape = false;
    }
  }
  return {monotone && shape,
          fmt("%zu potentials (%d exact), n = 8..20; monotone %s, max |n gap / C - 1| = %.3f", potentials.size(),
              exact, monotone ? "yes" : "no", worst_spread)};
}

Outcome duality() {
  std::mt19937_64 rng(606);
  std::vector<double> ts;
  for (int i = 0; i < 50; ++i) ts.push_back(-2.0 + 5.0 * i / 49.0);
  double worst_I = 0.0, worst_J = 0.0, worst_convexity = 0.0, worst_zero = 0.0;
  for (int i = 0; i < 10; ++i) {
    const int a = 2 + i % 2;
    const int k = 1 + (i / 2) % 3;
    const MarkovPotential phi(a, k, oracle::random_normalized(rng, a, k));
    const auto curve_I = rate_I_parametric(phi, ts);
    const double end = -extreme_mean(phi, Extreme::kMin);
    std::vector<double> u_J;
    for (int j = 0; j <= 200; ++j) u_J.push_back(end * j / 200.0);
    u_J.push_back(end * 1.01);
    const auto curve_J = tabulate(CurveKind::kJ, phi, u_J);
    for (double t : ts) {
      worst_I = std::max(worst_I, std::abs(legendre(curve_I, t) - scgf_R(phi, t)));
      worst_J = std::max(worst_J, std::abs(legendre(curve_J, t) - scgf_PDelta(phi, t)));
    }
    const double log_a = std::log(static_cast<double>(a));
    std::vector<double> u;
    for (int j = 0; j <= 200; ++j) u.push_back(log_a * j / 200.0);
    const auto values = tabulate(CurveKind::kI, phi, u).values;
    for (std::size_t j = 1; j + 1 < values.size(); ++j) {
      worst_convexity = std::min(worst_convexity, values[j + 1] - 2.0 * values[j] + values[j - 1]);
    }
    worst_zero = std::max(worst_zero, std::abs(rate_I(phi, pressure(phi).entropy)));
  }
  return {worst_I < 1e-5 && worst_J < 1e-5 && worst_convexity >= -1e-8 && worst_zero < 1e-9,
          fmt("max |L(I) - R| %.2e, max |L(J) - PDelta| %.2e, min second difference %.2e, max |I(h)| %.2e", worst_I,
              worst_J, worst_convexity, worst_zero)};
}

Outcome renyi_consistency() {
  std::mt19937_64 rng(707);
  std::vector<MarkovPotential> potentials{chain(), bernoulli_potential({0.5, 0.5})};
  for (int i = 0; i < 8; ++i) {
    const int a = 2 + i % 2;
    const int k = 1 + (i / 2) % 3;
    potentials.emplace_back(a, k, oracle::random_normalized(rng, a, k));
  }
  double worst = 0.0;
  for (const auto& phi : potentials) {
    for (double t : {-0.5, 0.5, 1.0, 3.0}) {
      const double direct = (t + 1.0) * pressure(phi, 1.0 / (t + 1.0)).pressure;
      worst = std::max(worst, std::abs(renyi_scgf(phi, t) - direct));
    }
  }
  return {worst < 1e-9, fmt("%zu potentials x 4 slopes; max gap %.2e", potentials.size(), worst)};
}

Outcome mean_cycles() {
  std::mt19937_64 rng(808);
  int mismatches = 0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int a = 2 + i % 2;
    const int k = 1 + (i / 2) % 3;
    const auto w = oracle::random_weights(rng, a, k);
    const MarkovPotential phi(a, k, w);
    for (bool minimum : {true, false}) {
      const auto karp = minimum ? min_mean_cycle(phi) : max_mean_cycle(phi);
      const auto brute = oracle::extreme_cycle(w, a, k, minimum);
      worst = std::max(worst, std::abs(karp.mean - brute.mean));
      const std::vector<std::size_t> arcs(karp.arcs.begin(), karp.arcs.end());
      if (arcs != brute.arcs || karp.mean != brute.mean) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("1000 tables x min/max; %d mismatches, max mean gap %.2e", mismatches, worst)};
}

Outcome kink() {
  constexpr double kStep = 1e-3;
  auto slope = [](const MarkovPotential& phi) { return (scgf_R(phi, -1.0 + kStep) - scgf_R(phi, -1.0)) / kStep; };
  const auto phi = chain();
  const double h_inf = zero_temperature_entropy(phi).value;
  const double chain_gap = std::abs(slope(phi) - h_inf);
  const auto coin = bernoulli_potential({0.5, 0.5});
  const double ln2 = std::log(2.0);
  const double coin_gap = std::max(std::abs(slope(coin) - ln2), std::abs(zero_temperature_entropy(coin).value - ln2));
  return {chain_gap < 1e-3 && coin_gap < 1e-9,
          fmt("chain slope %.6f vs h_inf %.6f; coin max gap to ln 2 %.2e", slope(phi), h_inf, coin_gap)};
}

Outcome ordering() {
  std::mt19937_64 rng(909);
  int violations = 0, checks = 0;
  for (int i = 0; i < 10; ++i) {
    const int a = 2 + i % 2;
    const int k = 1 + (i / 2) % 3;
    const MarkovPotential phi(a, k, oracle::random_normalized(rng, a, k));
    for (int j = 1; j <= 30; ++j) {
      const double t = j / 10.0;
      if (scgf_R(phi, t) > scgf_Phi(phi, t) + 1e-12) ++violations;
      ++checks;
    }
    for (int j = 1; j <= 9; ++j) {
      const double t = -j / 10.0;
      if (scgf_R(phi, t) < scgf_Phi(phi, t) - 1e-12) ++violations;
      ++checks;
    }
  }
  return {violations == 0, fmt("%d comparisons; %d violations", checks, violations)};
}

Outcome law_of_large_numbers() {
  ExperimentConfig config;
  config.potential = chain();
  config.epsilon = 0.2;
  config.n_grid = {1000, 10000, 100000};
  config.replicas = 100;
  config.seed = 20240601;
  const auto report = run_lln(config);
  const double h = chain_entropy();
  std::map<std::int64_t, std::vector<double>> dev, delta;
  for (const auto& s : report.samples) {
    dev[s.record.n].push_back(std::abs(s.record.h_k - h));
    delta[s.record.n].push_back(std::abs(s.record.Delta_k.value()));
  }
  const double m3 = median(dev[1000]), m4 = median(dev[10000]), m5 = median(dev[100000]);
  const double d5 = median(delta[100000]);
  const bool entropy_ok = m3 > m4 && m4 > m5 && m5 < 0.01;
  return {entropy_ok && d5 < 0.005,
          fmt("h = %.7f; median |h_k - h| %.5f, %.5f, %.5f (%s); median |Delta_k| at 1e5 %.5f (%s)", h, m3, m4, m5,
              entropy_ok ? "ok" : "fail", d5, d5 < 0.005 ? "ok" : "fail")};
}

Outcome finite_scgf_trend() {
  const auto phi = chain();
  const std::vector<double> ts{0.0, 0.5, 1.0};
  std::map<double, std::vector<double>> gaps;
  bool zero_exact = true;
  for (int n : {12, 16, 20}) {
    const auto values = exact_finite_scgf(phi, n, 2, ts, Functional::kh);
    zero_exact = zero_exact && values[0] == 0.0;
    for (std::size_t i = 1; i < ts.size(); ++i) gaps[ts[i]].push_back(std::abs(values[i] - scgf_R(phi, ts[i])));
  }
  bool monotone = true;
  for (const auto& [t, g] : gaps) monotone = monotone && g[0] > g[1] && g[1] > g[2];
  // Independent enumeration at n = 12 for the t = 1 value.
  double brute_terms_max = -INFINITY;
  std::vector<double> terms;
  const auto pi = oracle::two_state_stationary(0.1, 0.2);
  for (std::size_t index = 0; index < oracle::ipow(2, 12); ++index) {
    const auto x = oracle::digits_of(index, 2, 12);
    double log_p = std::log(pi[static_cast<std::size_t>(x[0])]);
    for (int i = 0; i + 1 < 12; ++i) log_p += std::log(kChain[static_cast<std::size_t>(x[i])][static_cast<std::size_t>(x[i + 1])]);
    terms.push_back(log_p + 12.0 * oracle::conditional_entropy_of_counts(oracle::cyclic_counts(x, 2, 2), 2));
    brute_terms_max = std::max(brute_terms_max, terms.back());
  }
  double sum = 0.0;
  for (double v : terms) sum += std::exp(v - brute_terms_max);
  const double brute = (brute_terms_max + std::log(sum)) / 12.0;
  const double oracle_gap = std::abs(brute - exact_finite_scgf(phi, 12, 2, 1.0, Functional::kh));
  return {zero_exact && monotone && oracle_gap < 1e-10,
          fmt("gaps t=0.5: %.4f %.4f %.4f; t=1: %.4f %.4f %.4f; t=0 exact %s; oracle gap %.1e", gaps[0.5][0],
              gaps[0.5][1], gaps[0.5][2], gaps[1.0][0], gaps[1.0][1], gaps[1.0][2], zero_exact ? "yes" : "no",
              oracle_gap)};
}

Outcome decomposition() {
  const auto phi = chain();
  const std::int64_t n = 10000;
  const int k = block_schedule(n, 2, 0.2);
  int negative = 0, over = 0;
  double worst_ratio = 0.0, min_delta = INFINITY;
  for (std::uint64_t r = 0; r < 1000; ++r) {
    const auto x = sample_path(make_sampler(phi, n, replica_seed(31337, r)));
    const auto d = decomposition_audit(x, phi, k);
    const double delta_hat = -d.delta;
    min_delta = std::min(min_delta, delta_hat);
    if (delta_hat < 0.0) ++negative;
    const double bound = 10.0 * k / static_cast<double>(n);
    worst_ratio = std::max(worst_ratio, std::abs(d.C_n) / bound);
    if (std::abs(d.C_n) > bound) ++over;
  }
  return {negative == 0 && over == 0,
          fmt("1000 replicas, n = %lld, k = %d; min Delta_k %.4f, max |C_n| / (10k/n) %.4f", static_cast<long long>(n),
              k, min_delta, worst_ratio)};
}

Outcome variance() {
  const auto phi = chain();
  const double from_phi = asymptotic_variance(phi);
  const double from_R = asymptotic_variance_from_R(phi);
  const auto audit = variance_audit(phi, 100000, 1000, 4242);
  const double gap = std::abs(from_phi - from_R);
  return {gap < 1e-5 && std::abs(audit.z) <= 3.0,
          fmt("sigma2 %.8f (Phi) vs %.8f (R), gap %.1e; empirical %.6f, z = %.3f", from_phi, from_R, gap,
              audit.sigma2_empirical, audit.z)};
}

Outcome determinism() {
  const auto config = experiment_from_json(parse_json(read_file(BLOCKENT_SOURCE_DIR "/configs/ldp_example.json")));
  const auto root = std::filesystem::temp_directory_path() / "blockent_acceptance";
  std::filesystem::remove_all(root);
  for (const char* run : {"a", "b"}) {
    std::filesystem::create_directories(root / run);
    write_report(run_experiment(config), (root / run).string());
  }
  int differing = 0;
  for (const char* name : {"samples.csv", "scgf.csv", "rate.csv", "audit.csv", "report.json"}) {
    if (read_file((root / "a" / name).string()) != read_file((root / "b" / name).string())) ++differing;
  }
  std::filesystem::remove_all(root);
  return {differing == 0, fmt("5 output files; %d differ", differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"type-bound sandwich", type_bound_sandwich},
      {"rounding onto realizable types", rounding_to_types},
      {"entropy continuity certificate", continuity_certificate},
      {"single-cycle components have zero entropy", zero_entropy_cycles},
      {"variational identity", variational_identity},
      {"pressure from cylinder sums", pressure_definition},
      {"Legendre duality and convexity", duality},
      {"Renyi route to R", renyi_consistency},
      {"Karp against cycle enumeration", mean_cycles},
      {"kink of R at -1", kink},
      {"ordering of R and Phi", ordering},
      {"law of large numbers", law_of_large_numbers},
      {"exact finite-n SCGF trend", finite_scgf_trend},
      {"decomposition audit", decomposition},
      {"asymptotic variance", variance},
      {"determinism of the example run", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outcome.pass) ++failures;
    std::printf("%s %2zu %s: %s [%.1f s]\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
