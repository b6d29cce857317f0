#pragma once

// JSON configuration and report serialization.
//
// Potential schema, one of
//   {"kind": "bernoulli", "probabilities": [p_0, ...]}
//   {"kind": "markov", "transition": [[P_00, P_01, ...], ...]}
//   {"kind": "table", "alphabet": A, "k": k, "values": [...], "normalize": false}
// Experiment schema: {"potential": {...}, "epsilon", "n_grid", "replicas",
//   "t_grid", "u_grid", "seed", "bin_width", "exact_n", "threads"}.
// Unknown keys are rejected.

#include <string>

#include "json.hpp"

#include "blockent/harness.hpp"
#include "blockent/thermo.hpp"
#include "blockent/types.hpp"

namespace blockent {

using Json = nlohmann::ordered_json;

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
Json parse_json(const std::string& text);

MarkovPotential potential_from_json(const Json& j);
Json potential_to_json(const MarkovPotential& phi);

ExperimentConfig experiment_from_json(const Json& j);
Json experiment_to_json(const ExperimentConfig& config);

BlockDistribution block_distribution_from_json(const Json& j);
Json block_distribution_to_json(const BlockDistribution& nu);

CountTable count_table_from_json(const Json& j);
Json count_table_to_json(const CountTable& table);

Json spectral_to_json(const SpectralData& sd);

/// Config echo plus summaries; no timestamp, so identical runs match byte for byte.
Json report_summary(const LdpReport& report);

/// report.json, samples.csv, scgf.csv, rate.csv and audit.csv under dir.
void write_report(const LdpReport& report, const std::string& dir);

/// A real rounded to the 12 significant digits used in every output; null when not finite.
Json json_real(double x);

}  // namespace blockent
