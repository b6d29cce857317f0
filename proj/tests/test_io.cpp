#include <cmath>
#include <filesystem>
#include <string>

#include "doctest.h"

#include "blockent/error.hpp"
#include "blockent/io.hpp"

using namespace blockent;

namespace {

ErrorCode code_of(const std::string& text) {
  try {
    experiment_from_json(parse_json(text));
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

const char* kBase = R"({"potential": {"kind": "bernoulli", "probabilities": [0.5, 0.5]},
  "epsilon": 0.2, "n_grid": [100], "replicas": 4, "seed": 3})";

}  // namespace

TEST_CASE("potential schema") {
  const auto chain = potential_from_json(parse_json(R"({"kind": "markov", "transition": [[0.9, 0.1], [0.2, 0.8]]})"));
  CHECK(chain.k() == 2);
  CHECK(chain.normalized());
  CHECK(chain[1] == doctest::Approx(std::log(0.2)));

  const auto table = potential_to_json(chain);
  CHECK(potential_from_json(table).values().size() == 4);

  const auto raw = R"({"kind": "table", "alphabet": 2, "k": 1, "values": [0.0, 1.0]})";
  CHECK_THROWS_AS(potential_from_json(parse_json(raw)), Error);
  const auto fixed = potential_from_json(
      parse_json(R"({"kind": "table", "alphabet": 2, "k": 1, "values": [0.0, 1.0], "normalize": true})"));
  CHECK(fixed.normalized());
  CHECK(std::exp(fixed[1]) == doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))));

  CHECK_THROWS_AS(potential_from_json(parse_json(R"({"kind": "bernoulli", "probabilities": [1.0]})")), Error);
  CHECK_THROWS_AS(
      potential_from_json(parse_json(R"({"kind": "table", "alphabet": 1, "k": 1, "values": [0.0], "normalize": true})")),
      Error);
  CHECK_THROWS_AS(potential_from_json(parse_json(R"({"kind": "bernoulli", "probabilities": [0.5, 0.5], "x": 1})")),
                  Error);
  CHECK_THROWS_AS(potential_from_json(parse_json(R"({"kind": "gibbs"})")), Error);
}

TEST_CASE("experiment schema") {
  const auto config = experiment_from_json(parse_json(kBase));
  CHECK(config.replicas == 4);
  CHECK(config.epsilon == 0.2);
  const auto echoed = experiment_from_json(experiment_to_json(config));
  CHECK(experiment_to_json(echoed).dump() == experiment_to_json(config).dump());

  auto with = [](const std::string& key, const std::string& value) {
    auto j = parse_json(kBase);
    j[key] = parse_json(value);
    return j.dump();
  };
  CHECK(code_of(with("epsilon", "0")) == ErrorCode::kInvalidConfig);
  CHECK(code_of(with("epsilon", "1.5")) == ErrorCode::kInvalidConfig);
  CHECK(code_of(with("replicas", "\"many\"")) == ErrorCode::kInvalidConfig);
  CHECK(code_of(with("colour", "1")) == ErrorCode::kInvalidConfig);
  CHECK(code_of("{not json") == ErrorCode::kInvalidConfig);
}

TEST_CASE("distribution and table round trips") {
  const BlockDistribution nu(2, 2, {0.4, 0.1, 0.1, 0.4});
  const auto back = block_distribution_from_json(block_distribution_to_json(nu));
  CHECK(back.k() == 2);
  CHECK(back[1] == doctest::Approx(0.1));

  const CountTable table(2, 2, {3, 1, 1, 2});
  CHECK(count_table_from_json(count_table_to_json(table)) == table);
  auto wrong = count_table_to_json(table);
  wrong["n"] = 9;
  CHECK_THROWS_AS(count_table_from_json(wrong), Error);
}

TEST_CASE("reals are rounded to twelve significant digits") {
  CHECK(json_real(1.0 / 3.0).dump() == "0.333333333333");
  CHECK(json_real(std::nan("")).is_null());
  CHECK(json_real(INFINITY).is_null());
}

TEST_CASE("report files") {
  ExperimentConfig config;
  config.n_grid = {200};
  config.replicas = 5;
  config.exact_n = 8;
  config.u_grid = {0.6};
  const auto report = run_experiment(config);
  const auto summary = report_summary(report);
  CHECK(summary.contains("config"));
  CHECK(summary["rng"] == "mt19937_64");
  CHECK_FALSE(summary.contains("timestamp"));

  const auto dir = std::filesystem::temp_directory_path() / "blockent_report_test";
  std::filesystem::create_directories(dir);
  write_report(report, dir.string());
  for (const char* name : {"report.json", "samples.csv", "scgf.csv", "rate.csv", "audit.csv"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
  CHECK(read_file((dir / "samples.csv").string()) == report.samples_csv());
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(read_file((dir / "missing").string()), Error);
}
