// blockent command-line front end.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "blockent/entropy.hpp"
#include "blockent/error.hpp"
#include "blockent/format.hpp"
#include "blockent/harness.hpp"
#include "blockent/io.hpp"
#include "blockent/simulate.hpp"
#include "blockent/thermo.hpp"
#include "blockent/types.hpp"

namespace {

using namespace blockent;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::optional<int> alphabet;
  std::optional<std::int64_t> n;
  std::optional<int> k;
  double beta = 1.0;
  std::optional<double> epsilon;
  std::string path;
  std::string inline_path;
};

void echo(const std::string& command, Json resolved) {
  resolved["command"] = command;
  std::cerr << "resolved config: " << resolved.dump() << "\n";
}

// Emits to --out when given, stdout otherwise.
void emit(const Options& o, const std::string& content) {
  if (o.out.empty()) {
    std::cout << content;
  } else {
    write_file(o.out, content);
  }
}

MarkovPotential load_potential(const Options& o) {
  if (o.config.empty()) {
    const int a = o.alphabet.value_or(2);
    if (a < 2) throw Error(ErrorCode::kInvalidConfig, "alphabet size must be >= 2");
    return bernoulli_potential(std::vector<double>(static_cast<std::size_t>(a), 1.0 / a));
  }
  const Json j = parse_json(read_file(o.config));
  const MarkovPotential phi = potential_from_json(j.contains("potential") ? j.at("potential") : j);
  if (o.alphabet && *o.alphabet != phi.alphabet_size()) {
    throw Error(ErrorCode::kInvalidConfig, "--alphabet disagrees with the potential");
  }
  return phi;
}

void check_epsilon(const Options& o) {
  if (o.epsilon && !(*o.epsilon > 0.0 && *o.epsilon < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "epsilon must lie in (0, 1)");
  }
}

int run_simulate(const Options& o) {
  const MarkovPotential phi = load_potential(o);
  if (!o.n) throw Error(ErrorCode::kInvalidConfig, "simulate needs --n");
  if (o.out.empty()) throw Error(ErrorCode::kInvalidConfig, "simulate needs --out FILE");
  const std::uint64_t seed = o.seed.value_or(1);
  echo("simulate", {{"potential", potential_to_json(phi)}, {"n", *o.n}, {"beta", json_real(o.beta)},
                    {"seed", seed}, {"rng", kRngName}, {"out", o.out}});
  write_path(o.out, sample_path(make_sampler(phi, *o.n, seed, o.beta)), seed);
  return 0;
}

int run_estimate(const Options& o) {
  check_epsilon(o);
  std::optional<SamplePath> x;
  std::uint64_t seed = 0;
  if (!o.path.empty()) {
    auto stored = read_path(o.path);
    seed = stored.seed;
    x.emplace(std::move(stored.path));
  } else if (!o.inline_path.empty()) {
    x.emplace(SamplePath::from_string(o.alphabet.value_or(2), o.inline_path));
  } else {
    throw Error(ErrorCode::kInvalidConfig, "estimate needs --path FILE or --inline DIGITS");
  }
  if (x->alphabet_size() < 2) throw Error(ErrorCode::kInvalidConfig, "alphabet size must be >= 2");
  const int k = o.k ? *o.k
                    : block_schedule(static_cast<std::int64_t>(x->size()), x->alphabet_size(), o.epsilon.value_or(0.2));
  std::optional<BlockDistribution> reference;
  Json resolved{{"n", x->size()}, {"k", k}, {"alphabet", x->alphabet_size()}, {"seed", seed}};
  if (!o.config.empty()) {
    const MarkovPotential phi = load_potential(o);
    reference = markov_extend(pressure(phi, 1.0).equilibrium, k);
    resolved["potential"] = potential_to_json(phi);
  }
  echo("estimate", resolved);
  const EntropyRecord record = plug_in_estimates(*x, k, reference);
  emit(o, EntropyRecord::csv_header() + "\n" + record.csv_row() + "\n");
  return 0;
}

int run_pressure(const Options& o) {
  const MarkovPotential phi = load_potential(o);
  echo("pressure", {{"potential", potential_to_json(phi)}, {"beta", json_real(o.beta)}});
  emit(o, spectral_to_json(pressure(phi, o.beta)).dump(2) + "\n");
  return 0;
}

int run_rate(const Options& o) {
  const MarkovPotential phi = load_potential(o);
  if (o.out.empty()) throw Error(ErrorCode::kInvalidConfig, "rate needs --out DIR");
  echo("rate", {{"potential", potential_to_json(phi)}, {"out", o.out}});
  const double log_a = std::log(static_cast<double>(phi.alphabet_size()));
  std::vector<double> u_grid, t_grid;
  for (int i = 0; i <= 100; ++i) u_grid.push_back(log_a * i / 100.0);
  for (int i = -30; i <= 30; ++i) t_grid.push_back(i / 10.0);
  std::filesystem::create_directories(o.out);
  const std::filesystem::path dir(o.out);
  for (auto kind : {CurveKind::kI, CurveKind::kJ, CurveKind::kR, CurveKind::kPhi, CurveKind::kPDelta}) {
    const bool on_u = kind == CurveKind::kI || kind == CurveKind::kJ;
    const RateCurve curve = tabulate(kind, phi, on_u ? u_grid : t_grid);
    write_file((dir / (std::string(to_string(kind)) + ".csv")).string(), curve.csv());
  }
  return 0;
}

int run_types_audit(const Options& o) {
  if (!o.n || !o.k) throw Error(ErrorCode::kInvalidConfig, "types-audit needs --n and --k");
  const int a = o.alphabet.value_or(2);
  if (a < 2) throw Error(ErrorCode::kInvalidConfig, "alphabet size must be >= 2");
  echo("types-audit", {{"n", *o.n}, {"k", *o.k}, {"alphabet", a}});
  emit(o, type_audit_csv(static_cast<int>(*o.n), *o.k, a));
  return 0;
}

int run_ldp(const Options& o) {
  if (o.config.empty()) throw Error(ErrorCode::kInvalidConfig, "ldp needs --config FILE");
  if (o.out.empty()) throw Error(ErrorCode::kInvalidConfig, "ldp needs --out DIR");
  check_epsilon(o);
  Json j = parse_json(read_file(o.config));
  if (o.seed) j["seed"] = *o.seed;
  if (o.epsilon) j["epsilon"] = *o.epsilon;
  if (o.n) j["n_grid"] = std::vector<std::int64_t>{*o.n};
  if (o.threads != 1) j["threads"] = o.threads;
  const ExperimentConfig config = experiment_from_json(j);
  if (o.alphabet && *o.alphabet != config.potential.alphabet_size()) {
    throw Error(ErrorCode::kInvalidConfig, "--alphabet disagrees with the potential");
  }
  echo("ldp", experiment_to_json(config));
  write_report(run_experiment(config), o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blockent: block entropy estimators, pressure and large deviations"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config (potential or experiment)");
    sub->add_option("--out", o.out, "output file or directory");
    sub->add_option("--seed", o.seed, "64-bit seed");
    sub->add_option("--threads", o.threads, "worker thread cap")->check(CLI::PositiveNumber);
    sub->add_option("--alphabet", o.alphabet, "alphabet size");
    sub->add_option("--n", o.n, "path length");
    sub->add_option("--k", o.k, "block length");
    sub->add_option("--beta", o.beta, "inverse temperature");
    sub->add_option("--epsilon", o.epsilon, "block schedule parameter in (0, 1)");
  };

  auto* simulate = app.add_subcommand("simulate", "sample a path into a binary file");
  auto* estimate = app.add_subcommand("estimate", "plug-in entropy estimates as CSV");
  auto* press = app.add_subcommand("pressure", "pressure and equilibrium state as JSON");
  auto* rate = app.add_subcommand("rate", "I, J, R, Phi and PDelta curves as CSV");
  auto* audit = app.add_subcommand("types-audit", "type class sizes and bounds as CSV");
  auto* ldp = app.add_subcommand("ldp", "full experiment report");
  for (auto* sub : {simulate, estimate, press, rate, audit, ldp}) add_common(sub);
  estimate->add_option("--path", o.path, "binary path file");
  estimate->add_option("--inline", o.inline_path, "path as a digit string");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*simulate) return run_simulate(o);
    if (*estimate) return run_estimate(o);
    if (*press) return run_pressure(o);
    if (*rate) return run_rate(o);
    if (*audit) return run_types_audit(o);
    if (*ldp) return run_ldp(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numeric_failure(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << app.help();
  return 1;
}
