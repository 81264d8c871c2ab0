#pragma once

#include <string>
#include <vector>

namespace rarebar {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;  // first failing check, empty when passed
};

/// Reduced-scale invariant and oracle checks per module. An empty filter
/// runs every suite; an unknown name throws std::invalid_argument. Suites:
/// model, contract, mma, subsim, bridge, mlmc, stats.
std::vector<SuiteResult> run_validation(const std::string& suite_filter = "");

}  // namespace rarebar
