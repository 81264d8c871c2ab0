#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rarebar.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ok = false;
    return {};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  ok = true;
  return buf.str();
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

struct Owned {
  char* p = nullptr;
  ~Owned() { rb_string_free(p); }
  std::string str() const { return p != nullptr ? std::string(p) : std::string(); }
};

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t runs = 0;
  bool runs_set = false;
  std::size_t workers = 1;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config) {
  auto* config = cmd->add_option("--config", args.config_path, "experiment config (JSON)");
  if (needs_config) config->required();
  cmd->add_option("--out", args.out_path, "output file path");
  cmd->add_option("--seed", args.seed, "master seed (fallback: RB_SEED env var)")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--runs", args.runs, "replication count override")
      ->each([&args](const std::string&) { args.runs_set = true; });
  cmd->add_option("--workers", args.workers, "concurrent replication cap")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--set", args.overrides, "config override, dotted path=value (repeatable)");
}

int apply_args(rb_experiment* exp, const CommonArgs& args) {
  if (args.seed_set) {
    rb_experiment_set_seed(exp, args.seed);
  } else if (const char* env = std::getenv("RB_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0') {
      std::cerr << "error: RB_SEED is not a valid unsigned integer\n";
      return kExitInvalid;
    }
    rb_experiment_set_seed(exp, static_cast<std::uint64_t>(v));
  }
  if (args.runs_set) rb_experiment_set_runs(exp, args.runs);
  rb_experiment_set_workers(exp, args.workers);
  for (const std::string& kv : args.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --set expects path=value, got '" << kv << "'\n";
      return kExitInvalid;
    }
    rb_experiment_set_override(exp, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
  }
  return kExitOk;
}

int status_to_exit(rb_status st) {
  switch (st) {
    case RB_OK: return kExitOk;
    case RB_ERR_INVALID: return kExitInvalid;
    case RB_ERR_RUNTIME: return kExitRuntime;
  }
  return kExitRuntime;
}

int run_command(const std::string& kind, const CommonArgs& args) {
  bool read_ok = false;
  const std::string config = read_file(args.config_path, read_ok);
  if (!read_ok) {
    std::cerr << "error: cannot read config '" << args.config_path << "'\n";
    return kExitInvalid;
  }
  rb_experiment* exp = rb_experiment_create(config.c_str());
  if (exp == nullptr) {
    std::cerr << "error: out of memory\n";
    return kExitRuntime;
  }
  int exit_code = apply_args(exp, args);
  if (exit_code == kExitOk) {
    if (kind == "price") {
      Owned json, line;
      const rb_status st = rb_experiment_run_price(exp, &json.p, &line.p);
      if (st == RB_ERR_INVALID) {
        std::cerr << "error: " << rb_experiment_last_error(exp) << "\n";
      } else {
        std::cout << line.str() << "\n";
        if (!args.out_path.empty() && !write_file(args.out_path, json.str())) {
          std::cerr << "error: cannot write '" << args.out_path << "'\n";
          rb_experiment_destroy(exp);
          return kExitRuntime;
        }
      }
      exit_code = status_to_exit(st);
    } else {
      Owned csv;
      const rb_status st = kind == "sweep" ? rb_experiment_run_sweep(exp, &csv.p)
                                           : rb_experiment_run_compare(exp, &csv.p);
      if (st != RB_OK) {
        std::cerr << "error: " << rb_experiment_last_error(exp) << "\n";
      } else if (args.out_path.empty()) {
        std::cout << csv.str();
      } else if (!write_file(args.out_path, csv.str())) {
        std::cerr << "error: cannot write '" << args.out_path << "'\n";
        rb_experiment_destroy(exp);
        return kExitRuntime;
      }
      exit_code = status_to_exit(st);
    }
  }
  rb_experiment_destroy(exp);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("rarebar: double knock-out barrier option pricing (") + rb_version() +
               ")"};
  app.require_subcommand(1);

  CommonArgs price_args, sweep_args, compare_args;
  auto* price = app.add_subcommand("price", "replicated single-point estimate");
  add_common(price, price_args, true);
  auto* sweep = app.add_subcommand("sweep", "parameter sweep, CSV output");
  add_common(sweep, sweep_args, true);
  auto* compare = app.add_subcommand("compare", "CV-ratio comparison of two methods");
  add_common(compare, compare_args, true);

  std::string suite;
  auto* validate = app.add_subcommand("validate", "run the invariant/oracle suites");
  validate->add_option("--suite", suite, "run a single suite by name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (price->parsed()) return run_command("price", price_args);
  if (sweep->parsed()) return run_command("sweep", sweep_args);
  if (compare->parsed()) return run_command("compare", compare_args);

  Owned report;
  const rb_status st = rb_validate(suite.c_str(), &report.p);
  std::cout << report.str();
  if (st == RB_ERR_INVALID) {
    std::cerr << "error: unknown suite '" << suite << "'\n";
    return kExitInvalid;
  }
  return st == RB_OK ? kExitOk : kExitRuntime;
}
