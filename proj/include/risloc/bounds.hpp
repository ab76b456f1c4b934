#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "risloc/channel.hpp"
#include "risloc/geometry.hpp"

namespace risloc {

struct CrbInputs {
  int subcarriers = 0;         // K
  int symbols = 0;             // T
  double symbol_energy = 0.0;  // E_s
  double noise_variance = 0.0; // effective N_0
  double spacing_hz = 0.0;     // delta f
  double beta_mag = 0.0;       // |beta|
};

// Delay CRB of a single path after projection (seconds^2):
//   6 N0 / (K (K^2 - 1) T E_s |2 pi delta_f beta|^2)
// Throws InvalidArgument for K < 2 or non-positive operands.
double toa_crb(const CrbInputs& in);

CrbInputs crb_inputs(const Scenario& s, double beta_mag);

// Range-domain variance of one TDOA: c^2 (crb_n + crb_0), m^2.
double tdoa_covariance(double crb_n, double crb_0);

struct PebResult {
  double peb = 0.0;  // +inf when the FIM is singular
  Eigen::Matrix3d fim = Eigen::Matrix3d::Zero();
  bool degenerate = false;
};

// Rows of d h / d x: unit(x - p0) + unit(x - p_m).
Eigen::MatrixX3d ellipsoid_jacobian(const Vec3& x, const Vec3& p0, std::span<const Vec3> rxs);

// J = H^T Sigma^-1 H with diagonal Sigma (variances in m^2); PEB = sqrt(tr J^-1).
// Throws UnderDetermined for fewer than 3 receivers.
PebResult position_fim(const Vec3& x, const Vec3& p0, std::span<const Vec3> rxs, const Eigen::VectorXd& variances);
PebResult position_fim(const Vec3& x, const Scenario& s, const Eigen::VectorXd& variances);

// Diagonal of Sigma from the true path gains of UE `u` placed at `x`. Shadowed
// receivers get +inf variance (they carry no information).
Eigen::VectorXd true_tdoa_variances(const Scenario& s, const UserEquipment& u, const Vec3& x);
Eigen::VectorXd true_tdoa_variances(const Scenario& s, int ue);

PebResult true_peb(const Scenario& s, const UserEquipment& u, const Vec3& x);

// PEB of UE n at its configured position using true gains.
PebResult true_peb(const Scenario& s, int ue);

struct PebPoint {
  Vec3 position;
  double peb = 0.0;
};

// PEB of UE 1 moved to each grid point (its orientation and profile kept).
// Degenerate points report +inf; the map continues. Runs in parallel.
std::vector<PebPoint> peb_map(const Scenario& s, std::span<const Vec3> grid);

}  // namespace risloc
