#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "conelab/error.hpp"
#include "conelab/hopf_lax.hpp"
#include "runner.hpp"

using conelab::cli::json;

namespace {

// Flag values are read as JSON when they parse, as a JSON array when a
// comma list does ("0.1,0.2"), and as a plain string otherwise.
json flag_value(const std::string& s) {
  if (auto j = json::parse(s, nullptr, false); !j.is_discarded()) return j;
  if (auto j = json::parse("[" + s + "]", nullptr, false); !j.is_discarded()) return j;
  return s;
}

struct Overrides {
  std::map<std::string, std::string> values;

  void add(CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conelab: weighted log-Sobolev, Hopf-Lax, hypercontractivity and 1D transport experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--out", out_dir, "directory for the JSON report and CSV series");
  app.add_option("--seed", seed, "seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads for the grid Hopf-Lax solvers")->check(CLI::PositiveNumber);
  app.add_flag_callback("--version", [] { throw CLI::CallForVersion(conelab::cli::version(), 0); }, "print version");

  Overrides ov;
  auto cone_flags = [&](CLI::App* s) {
    ov.add(s, "--n", "n", "dimension of the default full-space cone");
    ov.add(s, "--cone", "cone", "cone as JSON, e.g. {\"kind\":\"orthant\",\"n\":2}");
    ov.add(s, "--weight", "weight", "weight as JSON, e.g. {\"kind\":\"monomial\",\"exponents\":[1,1]}");
  };

  auto* constants = app.add_subcommand("constants", "sharp constant, C1-C4, M_B and omega_SE");
  ov.add(constants, "--p", "p", "exponent p > 1");
  cone_flags(constants);

  auto* weightcheck = app.add_subcommand("weightcheck", "sampled homogeneity, Euler and log-concavity checks");
  cone_flags(weightcheck);
  ov.add(weightcheck, "--samples", "samples", "sample pairs");

  auto* deficit = app.add_subcommand("deficit", "log-Sobolev deficit for p > 1");
  ov.add(deficit, "--p", "p", "exponent p > 1");
  cone_flags(deficit);
  ov.add(deficit, "--function", "function", "test function as JSON with a \"family\" key");
  ov.add(deficit, "--rule", "rule", "quadrature rule as JSON");

  auto* deficit1 = app.add_subcommand("deficit1", "p = 1 deficit for the indicator family");
  cone_flags(deficit1);
  ov.add(deficit1, "--lambda", "lambda", "ball radius");
  ov.add(deficit1, "--route", "route", "closed_form or grid");
  ov.add(deficit1, "--rule", "rule", "grid rule as JSON for the grid route");

  auto* hopflax = app.add_subcommand("hopflax", "Hopf-Lax semigroup on a grid");
  ov.add(hopflax, "--p", "p", "exponent p > 1");
  ov.add(hopflax, "--t-grid", "t_grid", "times, e.g. 0.25,0.5,0.75");
  ov.add(hopflax, "--method", "method", "naive, pruned or fast_p2");
  ov.add(hopflax, "--grid", "grid", "grid as JSON with lo, hi, n_per_axis");
  ov.add(hopflax, "--g", "g", "initial datum as JSON with a \"family\" key");
  ov.add(hopflax, "--cone", "cone", "cone as JSON");

  auto* hyper = app.add_subcommand("hyper", "hypercontractivity ratio and F(t) trace");
  ov.add(hyper, "--p", "p", "exponent p > 1");
  ov.add(hyper, "--alpha", "alpha", "starting exponent");
  ov.add(hyper, "--beta", "beta", "final exponent");
  ov.add(hyper, "--t", "t", "final time");
  ov.add(hyper, "--g", "g", "exponent g as JSON with a \"family\" key");
  cone_flags(hyper);
  ov.add(hyper, "--grid", "options", "grid options as JSON (nodes_per_axis, box_half_width, method)");

  auto* transport = app.add_subcommand("transport", "1D transport proof of the log-Sobolev inequality");
  ov.add(transport, "--p", "p", "exponent p > 1");
  cone_flags(transport);
  ov.add(transport, "--src", "src", "source function as JSON with a \"family\" key");
  ov.add(transport, "--N", "N", "grid cells");

  auto* suite = app.add_subcommand("suite", "run every config in a directory");
  std::string suite_dir;
  suite->add_option("dir", suite_dir, "directory of JSON configs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  conelab::set_hopf_lax_threads(threads);
  conelab::cli::RunOptions opts;
  opts.seed = seed;
  opts.out_dir = out_dir;

  try {
    if (suite->parsed()) {
      const auto dir = suite_dir.empty() ? config_path : suite_dir;
      if (dir.empty()) {
        std::cerr << "error: suite needs a directory\n";
        return 1;
      }
      const auto res = conelab::cli::run_suite(dir, opts);
      if (res.rows.empty()) {
        std::cerr << "error: " << res.message << '\n';
      } else {
        std::cout << conelab::cli::format_summary(res);
      }
      return res.exit_code;
    }
    const std::string kind = app.get_subcommands().front()->get_name();
    json cfg = config_path.empty() ? json::object() : conelab::cli::load_config(config_path);
    if (cfg.contains("experiment") && cfg["experiment"] != kind) {
      conelab::fail(conelab::ErrorKind::ConfigInvalid, "config experiment " + cfg["experiment"].dump() +
                                                           " does not match the subcommand \"" + kind + "\"");
    }
    cfg["experiment"] = kind;
    for (const auto& [key, value] : ov.values) cfg[key] = flag_value(value);
    const auto r = conelab::cli::run_experiment(cfg, opts);
    std::cout << r.report.dump(2) << '\n';
    return r.pass ? 0 : 2;
  } catch (const conelab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
