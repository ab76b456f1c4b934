#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "risloc/channel.hpp"

namespace risloc {

inline constexpr int kConfigSchemaVersion = 1;

// Parsed `[section]` / `key = value` text, with source lines kept for messages.
struct RawConfig {
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };
  struct Section {
    std::string name;
    int line = 0;
    std::vector<Entry> entries;
  };
  std::string source;
  std::vector<Section> sections;
};

// Throws Error(Config) with "<source>:<line>: ..." on malformed input.
RawConfig parse_config_text(const std::string& text, const std::string& source = "<string>");

// Physical and experiment parameters before any randomness is drawn. Every
// field defaults to the reference simulation setup.
struct ScenarioSpec {
  // [ofdm]
  int subcarriers = 100;
  double spacing_hz = 120e3;
  int symbols = 32;
  double power_dbm = 25.0;  // K * E_s * delta_f
  int fft_size = 1024;
  double wavelength = 0.01;

  // [tx]
  Vec3 tx = Vec3::Zero();

  // [rx]; explicit positions win over the circle layout
  int rx_count = 3;
  double rx_radius = 10.0;
  double rx_height = 1.0;
  double rx_start_angle_deg = 0.0;
  std::vector<Vec3> rx_positions;
  std::string clock_bias = "random";  // random | zero | explicit
  std::vector<double> clock_biases;   // seconds, used when explicit

  // [ue]
  std::vector<Vec3> ue_positions{Vec3(10.0, 0.0, -3.0)};
  std::vector<int> ue_columns;     // empty: UE n -> column n
  Vec3 ue_euler_zyx_deg = Vec3::Zero();
  int ris_rows = 256;
  int ris_cols = 256;
  double ris_spacing = 0.005;

  // [scatterers]
  int scatterer_count = 0;
  double scatterer_rcs = 0.1;
  Vec3 scatterer_center{0.0, 0.0, -4.0};
  double scatterer_radius = 10.0;
  std::vector<Vec3> scatterer_positions;

  // [noise]
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 5.0;
  bool noise_enabled = true;

  // [experiment]
  std::uint64_t seed = 1;
  int ris_seeds = 100;
  int noise_seeds = 10;
  int grid_points = 41;
  double grid_half_width = 20.0;
  double grid_z = -3.0;
  std::vector<double> radii{5.0, 10.0, 20.0, 30.0};
  std::vector<int> rx_counts{3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> scatterer_counts{10, 20, 30, 40, 50};
  std::vector<double> ue_x{0.0, 10.0, 20.0};
  double peb_threshold = 8.0;
  Vec3 region_lo{-30.0, -30.0, -10.0};
  Vec3 region_hi{30.0, 30.0, 0.0};

  double symbol_energy() const;  // joules, from power_dbm
  double noise_psd() const;      // W/Hz
  std::vector<Vec3> receiver_positions() const;

  bool operator==(const ScenarioSpec&) const = default;
};

// Unknown sections or keys are rejected with their source line.
ScenarioSpec spec_from_raw(const RawConfig& raw);
ScenarioSpec load_spec(const std::filesystem::path& path);
ScenarioSpec parse_spec(const std::string& text, const std::string& source = "<string>");

// Fully resolved INI text; parse_spec(serialize_spec(s)) == s.
std::string serialize_spec(const ScenarioSpec& spec);

// 64-bit FNV-1a of the serialized spec, hex.
std::string config_hash(const ScenarioSpec& spec);

// Draws profiles from ris_seed and clock biases from noise_seed; scatterer
// placement uses its own substream of ris_seed.
Scenario materialize(const ScenarioSpec& spec, std::uint64_t ris_seed, std::uint64_t noise_seed);

// load_spec + materialize(spec, spec.seed, spec.seed)
Scenario load_scenario(const std::filesystem::path& path);

// Every invariant violation, empty when valid.
std::vector<std::string> validate(const Scenario& s);

double dbm_to_watts(double dbm);

}  // namespace risloc
