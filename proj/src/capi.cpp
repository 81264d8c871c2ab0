#include "rarebar.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>
#include <string>

#include "rarebar/errors.hpp"
#include "rarebar/experiment.hpp"
#include "rarebar/validate.hpp"

struct rb_experiment {
  std::string config_json;
  rarebar::ExperimentOptions options;
  std::string last_error;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

rb_status classify(const std::exception& ex) {
  if (dynamic_cast<const std::invalid_argument*>(&ex) != nullptr ||
      dynamic_cast<const std::domain_error*>(&ex) != nullptr) {
    return RB_ERR_INVALID;
  }
  return RB_ERR_RUNTIME;
}

template <typename Fn>
rb_status guarded(rb_experiment* exp, Fn&& fn) {
  if (exp == nullptr) return RB_ERR_INVALID;
  try {
    exp->last_error.clear();
    return fn();
  } catch (const std::exception& ex) {
    exp->last_error = ex.what();
    return classify(ex);
  } catch (...) {
    exp->last_error = "unknown error";
    return RB_ERR_RUNTIME;
  }
}

}  // namespace

extern "C" {

rb_experiment* rb_experiment_create(const char* config_json) {
  try {
    auto* exp = new rb_experiment;
    exp->config_json = config_json != nullptr ? config_json : "";
    return exp;
  } catch (...) {
    return nullptr;
  }
}

void rb_experiment_destroy(rb_experiment* exp) { delete exp; }

rb_status rb_experiment_set_seed(rb_experiment* exp, uint64_t seed) {
  if (exp == nullptr) return RB_ERR_INVALID;
  exp->options.seed = seed;
  return RB_OK;
}

rb_status rb_experiment_set_runs(rb_experiment* exp, size_t runs) {
  if (exp == nullptr) return RB_ERR_INVALID;
  exp->options.runs = runs;
  return RB_OK;
}

rb_status rb_experiment_set_workers(rb_experiment* exp, size_t workers) {
  if (exp == nullptr || workers < 1) return RB_ERR_INVALID;
  exp->options.workers = workers;
  return RB_OK;
}

rb_status rb_experiment_set_override(rb_experiment* exp, const char* dotted_path,
                                     const char* value_json) {
  if (exp == nullptr || dotted_path == nullptr || value_json == nullptr) return RB_ERR_INVALID;
  exp->options.overrides.emplace_back(dotted_path, value_json);
  return RB_OK;
}

rb_status rb_experiment_run_price(rb_experiment* exp, char** out_json, char** out_line) {
  if (out_json == nullptr) return RB_ERR_INVALID;
  return guarded(exp, [&]() -> rb_status {
    const rarebar::PriceOutcome outcome = rarebar::run_price(exp->config_json, exp->options);
    *out_json = dup_string(outcome.json);
    if (out_line != nullptr) *out_line = dup_string(outcome.line);
    if (!outcome.ok) {
      exp->last_error = outcome.line;
      return RB_ERR_RUNTIME;
    }
    return RB_OK;
  });
}

rb_status rb_experiment_run_sweep(rb_experiment* exp, char** out_csv) {
  if (out_csv == nullptr) return RB_ERR_INVALID;
  return guarded(exp, [&]() -> rb_status {
    *out_csv = dup_string(rarebar::run_sweep(exp->config_json, exp->options));
    return RB_OK;
  });
}

rb_status rb_experiment_run_compare(rb_experiment* exp, char** out_csv) {
  if (out_csv == nullptr) return RB_ERR_INVALID;
  return guarded(exp, [&]() -> rb_status {
    *out_csv = dup_string(rarebar::run_compare(exp->config_json, exp->options));
    return RB_OK;
  });
}

const char* rb_experiment_last_error(const rb_experiment* exp) {
  return exp != nullptr ? exp->last_error.c_str() : "null experiment handle";
}

rb_status rb_validate(const char* suite, char** out_report) {
  try {
    const auto results = rarebar::run_validation(suite != nullptr ? suite : "");
    std::string report;
    bool all_ok = true;
    for (const auto& r : results) {
      report += "[suite " + r.name + "] " + (r.passed ? "PASS" : "FAIL: " + r.detail) + "\n";
      all_ok = all_ok && r.passed;
    }
    if (out_report != nullptr) *out_report = dup_string(report);
    return all_ok ? RB_OK : RB_ERR_RUNTIME;
  } catch (const std::exception& ex) {
    if (out_report != nullptr) *out_report = dup_string(std::string(ex.what()) + "\n");
    return classify(ex);
  }
}

void rb_string_free(char* s) { std::free(s); }

const char* rb_version(void) {
  static const std::string version = rarebar::build_id();
  return version.c_str();
}

}  // extern "C"
