#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <string>

#include "rarebar.h"

namespace {

const char* kConfig = R"({
  "model": {"s0": 100.0, "mu": 0.1, "sigma": 0.2, "n_steps": 50, "maturity": 1.0},
  "contract": {"lower": 90.0, "upper": 110.0, "strike": 100.0, "rate": 0.1},
  "method": {"name": "mcs", "samples": 1000},
  "runs": 6,
  "seed": 77
})";

struct Owned {
  char* p = nullptr;
  ~Owned() { rb_string_free(p); }
  std::string str() const { return p != nullptr ? std::string(p) : std::string(); }
};

}  // namespace

TEST_CASE("price through the C API is deterministic") {
  rb_experiment* a = rb_experiment_create(kConfig);
  rb_experiment* b = rb_experiment_create(kConfig);
  REQUIRE(a != nullptr);
  REQUIRE(b != nullptr);

  Owned json_a, line_a, json_b;
  CHECK(rb_experiment_run_price(a, &json_a.p, &line_a.p) == RB_OK);
  CHECK(rb_experiment_run_price(b, &json_b.p, nullptr) == RB_OK);
  CHECK(json_a.str() == json_b.str());
  CHECK(json_a.str().find("\"status\": \"ok\"") != std::string::npos);
  CHECK(!line_a.str().empty());

  rb_experiment_destroy(a);
  rb_experiment_destroy(b);
}

TEST_CASE("options and overrides change the run") {
  rb_experiment* exp = rb_experiment_create(kConfig);
  REQUIRE(exp != nullptr);
  CHECK(rb_experiment_set_seed(exp, 1234) == RB_OK);
  CHECK(rb_experiment_set_runs(exp, 10) == RB_OK);
  CHECK(rb_experiment_set_workers(exp, 4) == RB_OK);
  CHECK(rb_experiment_set_workers(exp, 0) == RB_ERR_INVALID);
  CHECK(rb_experiment_set_override(exp, "model.sigma", "0.3") == RB_OK);

  Owned json;
  CHECK(rb_experiment_run_price(exp, &json.p, nullptr) == RB_OK);
  CHECK(json.str().find("\"seed\": 1234") != std::string::npos);
  CHECK(json.str().find("\"runs\": 10") != std::string::npos);
  CHECK(json.str().find("\"sigma\": 0.3") != std::string::npos);
  rb_experiment_destroy(exp);
}

TEST_CASE("invalid config reports through last_error") {
  rb_experiment* exp = rb_experiment_create("{\"model\": {}}");
  REQUIRE(exp != nullptr);
  Owned json;
  CHECK(rb_experiment_run_price(exp, &json.p, nullptr) == RB_ERR_INVALID);
  CHECK(std::strlen(rb_experiment_last_error(exp)) > 0);
  rb_experiment_destroy(exp);

  CHECK(rb_experiment_run_price(nullptr, &json.p, nullptr) == RB_ERR_INVALID);
}

TEST_CASE("validation suites through the C API") {
  Owned report;
  CHECK(rb_validate("stats", &report.p) == RB_OK);
  CHECK(report.str().find("[suite stats] PASS") != std::string::npos);

  Owned bad;
  CHECK(rb_validate("nope", &bad.p) == RB_ERR_INVALID);
}

TEST_CASE("version string") {
  REQUIRE(rb_version() != nullptr);
  CHECK(std::strlen(rb_version()) > 0);
}
