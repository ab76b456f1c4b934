#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "risloc/channel.hpp"
#include "risloc/error.hpp"
#include "risloc/toa.hpp"

namespace risloc {

// Clock-bias-free range measurements of one UE over the usable receivers.
struct TdoaVector {
  int ue = 1;
  std::vector<int> rx;        // 0-based receiver index of each row
  Eigen::VectorXd delta;      // bistatic ranges, m
  Eigen::VectorXd variance;   // diagonal of Sigma, m^2

  int size() const { return static_cast<int>(rx.size()); }
};

struct PositionEstimate {
  Vec3 position = Vec3::Zero();
  Vec3 init = Vec3::Zero();
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Axis-aligned box used by the multistart fallback.
struct SearchRegion {
  Vec3 lo{-30.0, -30.0, -10.0};
  Vec3 hi{30.0, 30.0, 0.0};
};

using RegionPrior = std::function<bool(const Vec3&)>;

// True for points strictly below every receiver.
RegionPrior below_receivers(const Scenario& s);

struct LocatorOptions {
  RegionPrior prior;              // empty: below_receivers(s)
  SearchRegion region;
  int max_iterations = 100;
  double dominance_ratio = 100.0;
  double gradient_tolerance = 1e-9;
  double step_tolerance = 1e-12;
};

// Negative delay differences within this fraction of the ambiguity window are
// kept as noise; below it they are unwrapped by one window.
inline constexpr double kUnwrapMargin = 0.05;

// Throws UnderDetermined when fewer than 3 receivers have both paths.
TdoaVector form_tdoa(const ToaGrid& grid, int ue, const Scenario& s);

// (Delta - h(x))^T Sigma^-1 (Delta - h(x))
double ml_objective(const Vec3& x, const TdoaVector& tdoa, const Scenario& s);

// Candidate positions from the linearized ellipsoid equations (Tx translated
// to the origin internally). Throws DegenerateGeometry for singular P^T P and
// InitFailure when no physical root exists.
std::vector<Vec3> closed_form_init(const TdoaVector& tdoa, const Scenario& s);

// Dominance by objective, then the prior. Throws AmbiguousGeometry when
// neither separates the candidates.
Vec3 resolve_ambiguity(const std::vector<Vec3>& candidates, const TdoaVector& tdoa, const Scenario& s,
                       const RegionPrior& prior, double dominance_ratio = 100.0);

// Damped Gauss-Newton on the weighted least-squares objective.
PositionEstimate refine_ml(const Vec3& init, const TdoaVector& tdoa, const Scenario& s,
                           const LocatorOptions& opts = {});

// form_tdoa -> closed_form_init -> resolve_ambiguity -> refine_ml, with a
// grid multistart when the closed form fails.
PositionEstimate localize(const ToaGrid& grid, int ue, const Scenario& s, const LocatorOptions& opts = {});

struct UeResult {
  int ue = 1;
  std::optional<PositionEstimate> estimate;
  std::optional<ErrorKind> error;
  std::string message;
};

std::vector<UeResult> localize_all(const ToaGrid& grid, const Scenario& s, const LocatorOptions& opts = {});

}  // namespace risloc
