#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <stdexcept>
#include <string>

#include "rarebar/experiment.hpp"

using namespace rarebar;

namespace {

const char* kTinyConfig = R"({
  "model": {"s0": 100.0, "mu": 0.1, "sigma": 0.2, "n_steps": 50, "maturity": 1.0},
  "contract": {"lower": 90.0, "upper": 110.0, "strike": 100.0, "rate": 0.1},
  "method": {"name": "mcs", "samples": 2000},
  "runs": 8,
  "seed": 314
})";

const char* kSweepConfig = R"({
  "model": {"s0": 100.0, "mu": 0.1, "sigma": 0.2, "n_steps": 50, "maturity": 1.0},
  "contract": {"lower": 90.0, "upper": 110.0, "strike": 100.0, "rate": 0.1},
  "methods": [
    {"name": "mcs", "samples": 1500},
    {"name": "subsim", "m": 500, "beta": 0.1}
  ],
  "runs": 6,
  "seed": 271828,
  "sweep": {"parameter": "model.sigma", "values": [0.2, 0.3]}
})";

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("parse errors name the violated field") {
  ExperimentOptions opts;
  CHECK_THROWS_WITH_AS(parse_experiment("{", opts), doctest::Contains("invalid JSON"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_experiment(R"({"contract": {}})", opts),
                       doctest::Contains("model"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      parse_experiment(
          R"({"model": {"sigma": 0.2}, "contract": {"lower": 90, "upper": 110, "strike": 100}})",
          opts),
      doctest::Contains("method"), std::invalid_argument);

  // invariant violations surface with the module's message
  const std::string bad_beta = R"({
    "model": {"sigma": 0.2},
    "contract": {"lower": 90, "upper": 110, "strike": 100},
    "method": {"name": "subsim", "m": 1001, "beta": 0.1}
  })";
  CHECK_THROWS_WITH_AS(parse_experiment(bad_beta, opts), doctest::Contains("beta"),
                       std::invalid_argument);
}

TEST_CASE("options and overrides fold into the resolved config") {
  ExperimentOptions opts;
  opts.seed = 999;
  opts.runs = 12;
  opts.overrides.emplace_back("model.sigma", "0.35");
  const ResolvedExperiment exp = parse_experiment(kTinyConfig, opts);
  CHECK(exp.seed == 999);
  CHECK(exp.runs == 12);
  CHECK(exp.params.sigma == doctest::Approx(0.35));
  CHECK(exp.resolved_json.find("0.35") != std::string::npos);
  CHECK(exp.resolved_json.find("999") != std::string::npos);
  CHECK(exp.resolved_json.find("workers") == std::string::npos);
}

TEST_CASE("run_price is deterministic and audit-complete") {
  ExperimentOptions opts;
  const PriceOutcome a = run_price(kTinyConfig, opts);
  const PriceOutcome b = run_price(kTinyConfig, opts);
  CHECK(a.ok);
  CHECK(a.json == b.json);
  CHECK(a.line == b.line);
  CHECK(a.json.find("\"build_id\"") != std::string::npos);
  CHECK(a.json.find("\"seed\": 314") != std::string::npos);
  CHECK(a.json.find("\"status\": \"ok\"") != std::string::npos);
  CHECK(a.line.find("mcs") != std::string::npos);

  ExperimentOptions multi = opts;
  multi.workers = 8;
  const PriceOutcome c = run_price(kTinyConfig, multi);
  CHECK(a.json == c.json);
}

TEST_CASE("run_sweep emits the fixed schema, grid x method") {
  ExperimentOptions opts;
  const std::string csv = run_sweep(kSweepConfig, opts);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "sigma,lower,upper,method,runs,p_hat_mean,p_hat_cv,price_mean,price_cv,"
        "mean_total_samples,failures");
  CHECK(count_lines(csv) == 1 + 2 * 2);  // header + 2 grid points x 2 methods

  std::string row;
  std::getline(in, row);
  CHECK(std::stod(row) == doctest::Approx(0.2));
  CHECK(row.find(",mcs,6,") != std::string::npos);
  std::getline(in, row);
  CHECK(row.find(",subsim,6,") != std::string::npos);

  // byte-identical across invocations and worker counts
  ExperimentOptions multi = opts;
  multi.workers = 4;
  CHECK(run_sweep(kSweepConfig, multi) == csv);

  CHECK_THROWS_WITH_AS(run_sweep(kTinyConfig, opts), doctest::Contains("sweep"),
                       std::invalid_argument);
}

TEST_CASE("run_compare: equal-samples protocol and self-comparison sanity") {
  // subsim listed second: MC must still be budgeted from the subsim run
  const std::string csv = run_compare(kSweepConfig, ExperimentOptions{});
  std::istringstream in(csv);
  std::string header, row1;
  std::getline(in, header);
  CHECK(header ==
        "sigma,lower,upper,method_1,method_2,runs,p_hat_cv_ratio,price_cv_ratio,"
        "mean_total_samples_1,mean_total_samples_2");
  std::getline(in, row1);
  CHECK(row1.find("mcs,subsim") != std::string::npos);
  // the last two columns (mean total samples) must match between methods
  const std::size_t comma = row1.rfind(',');
  const std::string samples_2 = row1.substr(comma + 1);
  const std::size_t comma_prev = row1.rfind(',', comma - 1);
  const std::string samples_1 = row1.substr(comma_prev + 1, comma - comma_prev - 1);
  // MC budget is the rounded subsim mean, so allow the rounding gap
  CHECK(std::abs(std::stod(samples_1) - std::stod(samples_2)) <= 1.0);

  const char* kSelfConfig = R"({
    "model": {"sigma": 0.25, "n_steps": 50},
    "contract": {"lower": 90, "upper": 110, "strike": 100},
    "methods": [{"name": "mcs", "samples": 2000}, {"name": "mcs", "samples": 2000}],
    "runs": 40,
    "seed": 5
  })";
  const std::string self_csv = run_compare(kSelfConfig, ExperimentOptions{});
  std::istringstream sin(self_csv);
  std::string h, row;
  std::getline(sin, h);
  std::getline(sin, row);
  // parse the p-ratio column (7th)
  std::size_t pos = 0;
  for (int i = 0; i < 6; ++i) pos = row.find(',', pos) + 1;
  const double ratio = std::stod(row.substr(pos));
  CHECK(ratio > 1.0 / 3.0);
  CHECK(ratio < 3.0);

  CHECK_THROWS_WITH_AS(run_compare(kTinyConfig, ExperimentOptions{}),
                       doctest::Contains("two methods"), std::invalid_argument);
}
