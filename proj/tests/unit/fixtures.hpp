#pragma once

#include <cstdint>
#include <vector>

#include "risloc/channel.hpp"
#include "risloc/config.hpp"

namespace risloc::testing {

// Small-RIS spec so the unit tests run fast; geometry otherwise matches the defaults.
inline ScenarioSpec small_spec(std::vector<Vec3> ues = {Vec3(10.0, 0.0, -3.0)}, int ris = 16) {
  ScenarioSpec spec;
  spec.ue_positions = std::move(ues);
  spec.ris_rows = ris;
  spec.ris_cols = ris;
  return spec;
}

inline Scenario small_scenario(std::vector<Vec3> ues = {Vec3(10.0, 0.0, -3.0)}, std::uint64_t seed = 7,
                               int ris = 16) {
  return materialize(small_spec(std::move(ues), ris), seed, seed);
}

}  // namespace risloc::testing
