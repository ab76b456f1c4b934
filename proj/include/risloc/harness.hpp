#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "risloc/bounds.hpp"
#include "risloc/config.hpp"
#include "risloc/locator.hpp"
#include "risloc/toa.hpp"

namespace risloc {

// RIS draw i uses seed + i; noise trial j of that draw uses derive_seed(ris_seed, j).
std::uint64_t ris_seed_at(const ScenarioSpec& spec, int i);
std::uint64_t noise_seed_at(std::uint64_t ris_seed, int j);

// One UE in one trial.
struct TrialRow {
  std::string cell;
  std::uint64_t ris_seed = 0;
  std::uint64_t noise_seed = 0;
  int ue = 1;
  Vec3 truth = Vec3::Zero();
  Vec3 estimate = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  double error = std::numeric_limits<double>::infinity();  // +inf when the solve failed
  double objective = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  double peb = std::numeric_limits<double>::infinity();
  std::string failure;                  // empty on success
  std::vector<double> nlos_toa_errors;  // seconds per Rx, NaN where the path was missing
  std::vector<double> los_toa_errors;
};

struct ResultTable {
  std::vector<TrialRow> rows;

  std::size_t failures() const;
  std::vector<double> errors() const;
  std::vector<double> pebs() const;
  double median_error() const;
  // Over successful rows; failures are reported by failures().
  double rmse() const;
  void append(const ResultTable& other);
};

// Everything produced by one synthesize -> estimate -> localize pass.
struct TrialOutput {
  Scenario scenario;
  ToaGrid toa;
  std::vector<UeResult> ues;
};

LocatorOptions locator_options(const ScenarioSpec& spec);

TrialOutput run_trial(const ScenarioSpec& spec, std::uint64_t ris_seed, std::uint64_t noise_seed);

// All noise trials for one RIS draw. Deterministic in the seeds.
ResultTable run_cell(const ScenarioSpec& spec, const std::string& label, std::uint64_t ris_seed,
                     std::span<const std::uint64_t> noise_seeds);

// spec.ris_seeds x spec.noise_seeds trials, RIS draws in parallel, rows in seed order.
ResultTable run_cells(const ScenarioSpec& spec, const std::string& label);

// Empirical CDF: sorted values with probabilities k/n. Throws on empty input.
std::vector<std::pair<double, double>> cdf(std::vector<double> values);

// sqrt(mean((error / peb)^2)) over rows with peb < threshold; +inf if any such row failed.
double normalized_rmse(const ResultTable& t, double peb_threshold);

// RMS of the NLOS (or LOS) delay errors over every present path, seconds.
double nlos_toa_rmse(const ResultTable& t);
double los_toa_rmse(const ResultTable& t);

// Mean over spec.ris_seeds RIS draws of the PEB of UE 1 placed at x.
double average_peb(const ScenarioSpec& spec, const Vec3& x);

// 41 x 41 style grid from the [experiment] section.
std::vector<Vec3> map_grid(const ScenarioSpec& spec);

// Per-point mean over spec.ris_seeds draws; points infinite for any draw stay infinite.
std::vector<PebPoint> average_peb_map(const ScenarioSpec& spec, std::span<const Vec3> grid);

struct Check {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool pass = false;
};

Check make_check(std::string name, double value, double lo, double hi);

enum class Experiment { Simulate, PebMap, Cdf, SweepRx, Scatterers };

std::optional<Experiment> parse_experiment(const std::string& name);
std::string to_string(Experiment e);

struct ExperimentResult {
  Experiment kind = Experiment::Simulate;
  std::map<std::string, double> metrics;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;

  bool passed() const;
};

// `trials` overrides the Monte Carlo depth: noise trials per RIS draw for
// simulate, cdf and scatterers; RIS draws for peb-map and sweep-rx.
// Writes CSVs and summary.json into out_dir.
ExperimentResult run_experiment(Experiment kind, ScenarioSpec spec, const std::filesystem::path& out_dir,
                                std::optional<int> trials = std::nullopt);

}  // namespace risloc
