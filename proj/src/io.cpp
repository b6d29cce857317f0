#include "blockent/io.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "blockent/error.hpp"
#include "blockent/format.hpp"
#include "blockent/simulate.hpp"

namespace blockent {

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::kInvalidConfig, why); }

void require_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) invalid(std::string(what) + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!keys.count(item.key())) invalid(std::string("unknown key '") + item.key() + "' in " + what);
  }
}

template <typename T>
T field(const Json& j, const char* key, const char* what) {
  if (!j.contains(key)) invalid(std::string(what) + " is missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    invalid(std::string("'") + key + "' in " + what + " has the wrong type");
  }
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback, const char* what) {
  return j.contains(key) ? field<T>(j, key, what) : fallback;
}

Json real_array(std::span<const double> values) {
  Json out = Json::array();
  for (double v : values) out.push_back(json_real(v));
  return out;
}

}  // namespace

Json json_real(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(format_real(x));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write to " + path + " failed");
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    invalid(std::string("malformed JSON: ") + e.what());
  }
}

MarkovPotential potential_from_json(const Json& j) {
  const char* what = "potential";
  if (!j.is_object()) invalid("potential must be a JSON object");
  const auto kind = field<std::string>(j, "kind", what);
  if (kind == "bernoulli") {
    require_keys(j, {"kind", "probabilities"}, what);
    const auto p = field<std::vector<double>>(j, "probabilities", what);
    if (p.size() < 2) invalid("alphabet size must be >= 2");
    return bernoulli_potential(p);
  }
  if (kind == "markov") {
    require_keys(j, {"kind", "transition"}, what);
    const auto p = field<std::vector<std::vector<double>>>(j, "transition", what);
    if (p.size() < 2) invalid("alphabet size must be >= 2");
    return markov_chain_potential(p);
  }
  if (kind == "table") {
    require_keys(j, {"kind", "alphabet", "k", "values", "normalize"}, what);
    const int alphabet = field<int>(j, "alphabet", what);
    if (alphabet < 2) invalid("alphabet size must be >= 2");
    MarkovPotential phi(alphabet, field<int>(j, "k", what), field<std::vector<double>>(j, "values", what));
    if (field_or<bool>(j, "normalize", false, what)) return normalize_potential(phi).potential;
    if (!phi.normalized()) {
      invalid("potential is not normalized (defect " + format_real(phi.normalization_defect()) +
              "); set \"normalize\": true to replace it by its normalized cohomologous potential");
    }
    return phi;
  }
  invalid("unknown potential kind '" + kind + "'");
}

Json potential_to_json(const MarkovPotential& phi) {
  Json j;
  j["kind"] = "table";
  j["alphabet"] = phi.alphabet_size();
  j["k"] = phi.k();
  j["values"] = real_array(phi.values());
  j["normalize"] = false;
  return j;
}

ExperimentConfig experiment_from_json(const Json& j) {
  const char* what = "experiment config";
  require_keys(j, {"potential", "epsilon", "n_grid", "replicas", "t_grid", "u_grid", "seed", "bin_width", "exact_n",
                   "threads"},
               what);
  ExperimentConfig c;
  if (!j.contains("potential")) invalid("experiment config is missing 'potential'");
  c.potential = potential_from_json(j.at("potential"));
  c.epsilon = field<double>(j, "epsilon", what);
  c.n_grid = field<std::vector<std::int64_t>>(j, "n_grid", what);
  c.replicas = field<int>(j, "replicas", what);
  c.t_grid = field_or<std::vector<double>>(j, "t_grid", c.t_grid, what);
  c.u_grid = field_or<std::vector<double>>(j, "u_grid", c.u_grid, what);
  c.seed = field<std::uint64_t>(j, "seed", what);
  c.bin_width = field_or<double>(j, "bin_width", c.bin_width, what);
  c.exact_n = field_or<int>(j, "exact_n", c.exact_n, what);
  c.threads = field_or<int>(j, "threads", c.threads, what);
  c.validate();
  return c;
}

Json experiment_to_json(const ExperimentConfig& c) {
  Json j;
  j["potential"] = potential_to_json(c.potential);
  j["epsilon"] = json_real(c.epsilon);
  j["n_grid"] = c.n_grid;
  j["replicas"] = c.replicas;
  j["t_grid"] = real_array(c.t_grid);
  j["u_grid"] = real_array(c.u_grid);
  j["seed"] = c.seed;
  j["bin_width"] = json_real(c.bin_width);
  j["exact_n"] = c.exact_n;
  j["threads"] = c.threads;
  return j;
}

BlockDistribution block_distribution_from_json(const Json& j) {
  const char* what = "block distribution";
  require_keys(j, {"alphabet", "k", "weights"}, what);
  return BlockDistribution(field_or<int>(j, "alphabet", 2, what), field<int>(j, "k", what),
                           field<std::vector<double>>(j, "weights", what));
}

Json block_distribution_to_json(const BlockDistribution& nu) {
  Json j;
  j["alphabet"] = nu.alphabet_size();
  j["k"] = nu.k();
  j["weights"] = real_array(nu.weights());
  return j;
}

CountTable count_table_from_json(const Json& j) {
  const char* what = "count table";
  require_keys(j, {"alphabet", "k", "n", "counts"}, what);
  CountTable table(field_or<int>(j, "alphabet", 2, what), field<int>(j, "k", what),
                   field<std::vector<std::int64_t>>(j, "counts", what));
  if (j.contains("n") && field<std::int64_t>(j, "n", what) != table.n()) invalid("'n' does not match the counts");
  return table;
}

Json count_table_to_json(const CountTable& table) {
  Json j;
  j["alphabet"] = table.alphabet_size();
  j["k"] = table.k();
  j["n"] = table.n();
  j["counts"] = table.counts();
  return j;
}

Json spectral_to_json(const SpectralData& sd) {
  Json j;
  j["beta"] = json_real(sd.beta);
  j["pressure"] = json_real(sd.pressure);
  j["entropy"] = json_real(sd.entropy);
  j["mean_phi"] = json_real(sd.mean_phi);
  j["left_eigvec"] = real_array(sd.left_eigvec);
  j["right_eigvec"] = real_array(sd.right_eigvec);
  j["equilibrium"] = block_distribution_to_json(sd.equilibrium);
  return j;
}

Json report_summary(const LdpReport& report) {
  Json j;
  j["config"] = experiment_to_json(report.config);
  j["rng"] = kRngName;
  j["seed"] = report.config.seed;
  j["entropy_theory"] = json_real(report.entropy_theory);
  j["mean_phi_theory"] = json_real(report.mean_phi_theory);

  Json lln = Json::array();
  for (const auto& row : report.lln) {
    Json r;
    r["n"] = row.n;
    r["k"] = row.k;
    r["mean_abs_dev"] = json_real(row.mean_abs_dev);
    r["median_abs_dev"] = json_real(row.median_abs_dev);
    r["median_abs_delta"] = json_real(row.median_abs_delta);
    lln.push_back(r);
  }
  j["lln"] = lln;

  Json flagged = Json::array();
  for (const auto& row : report.scgf) {
    if (row.high_variance) flagged.push_back(json_real(row.t));
  }
  j["scgf_high_variance_t"] = flagged;

  double worst_ratio = 0.0, min_delta_hat = std::numeric_limits<double>::infinity();
  for (const auto& row : report.audit) {
    worst_ratio = std::max(worst_ratio, std::abs(row.C_n) / row.bound);
    min_delta_hat = std::min(min_delta_hat, -row.delta);
  }
  Json audit;
  audit["rows"] = report.audit.size();
  audit["max_abs_Cn_over_bound"] = json_real(worst_ratio);
  audit["min_delta_hat"] = json_real(min_delta_hat);
  j["audit"] = audit;

  Json variance;
  variance["sigma2_theory"] = json_real(report.variance.sigma2_theory);
  variance["sigma2_empirical"] = json_real(report.variance.sigma2_empirical);
  variance["z"] = json_real(report.variance.z);
  j["variance"] = variance;
  j["files"] = {"samples.csv", "scgf.csv", "rate.csv", "audit.csv"};
  return j;
}

void write_report(const LdpReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_file((base / "report.json").string(), report_summary(report).dump(2) + "\n");
  write_file((base / "samples.csv").string(), report.samples_csv());
  write_file((base / "scgf.csv").string(), report.scgf_csv());
  write_file((base / "rate.csv").string(), report.rate_csv());
  write_file((base / "audit.csv").string(), report.audit_csv());
}

}  // namespace blockent
