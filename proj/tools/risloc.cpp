#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "risloc/config.hpp"
#include "risloc/error.hpp"
#include "risloc/harness.hpp"
#include "risloc/kernels.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out = "out";
  bool check = false;
  bool print_config = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("config", o.config, "Scenario config file (INI)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Base seed (overrides [experiment] seed)");
  cmd->add_option("--trials", o.trials,
                  "Monte Carlo depth: noise trials per RIS draw (simulate, cdf, scatterers) or RIS draws "
                  "(peb-map, sweep-rx)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_flag("--check", o.check, "Exit nonzero when an acceptance threshold fails");
  cmd->add_flag("--print-config", o.print_config, "Print the fully resolved config and exit");
}

int run(risloc::Experiment kind, const Options& o) {
  risloc::ScenarioSpec spec = risloc::load_spec(o.config);
  if (o.seed) spec.seed = *o.seed;
  if (o.print_config) {
    std::cout << "# config_hash: " << risloc::config_hash(spec) << "\n" << risloc::serialize_spec(spec);
    return 0;
  }
  const auto errors = risloc::validate(risloc::materialize(spec, spec.seed, spec.seed));
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << o.config << ": " << e << "\n";
    return 2;
  }
  std::cerr << "risloc " << risloc::to_string(kind) << ": kernels=" << risloc::kernels::active().name
            << "\n";
  const risloc::ExperimentResult r = risloc::run_experiment(kind, spec, o.out, o.trials);
  for (const auto& [k, v] : r.metrics) std::printf("%-48s %.6g\n", k.c_str(), v);
  for (const risloc::Check& c : r.checks) {
    std::printf("[%s] %s: %.6g (allowed [%g, %g])\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.lo, c.hi);
  }
  for (const auto& f : r.files) std::printf("wrote %s\n", f.string().c_str());
  return (o.check && !r.passed()) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive multi-user localization with RIS-equipped users: simulation and experiments"};
  app.require_subcommand(1);
  Options opts;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Run one scenario end to end (ToA, localization, trial CSVs)"},
      {"peb-map", "Single-draw and seed-averaged PEB maps over the UE grid"},
      {"cdf", "Error and PEB CDFs for UEs at each [experiment] ue_x"},
      {"sweep-rx", "Average PEB versus receiver radius and count"},
      {"scatterers", "Robustness to scattering clutter around the Tx"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), opts);

  CLI11_PARSE(app, argc, argv);
  try {
    const std::string name = app.get_subcommands().front()->get_name();
    return run(*risloc::parse_experiment(name), opts);
  } catch (const risloc::Error& e) {
    std::cerr << "error (" << risloc::to_string(e.kind()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
