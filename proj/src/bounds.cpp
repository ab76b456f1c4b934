#include "risloc/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "risloc/error.hpp"
#include "risloc/parallel.hpp"

namespace risloc {

double toa_crb(const CrbInputs& in) {
  if (in.subcarriers < 2) throw Error(ErrorKind::InvalidArgument, "delay CRB needs K >= 2");
  if (in.symbols < 1 || !(in.symbol_energy > 0.0) || !(in.noise_variance > 0.0) || !(in.spacing_hz > 0.0) ||
      !(in.beta_mag > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "delay CRB operands must be positive");
  }
  const double K = in.subcarriers;
  const double w = 2.0 * std::numbers::pi * in.spacing_hz * in.beta_mag;
  return 6.0 * in.noise_variance / (K * (K * K - 1.0) * in.symbols * in.symbol_energy * w * w);
}

CrbInputs crb_inputs(const Scenario& s, double beta_mag) {
  return {s.ofdm.subcarriers, s.ofdm.symbols, s.ofdm.symbol_energy, s.noise.effective(), s.ofdm.spacing_hz,
          beta_mag};
}

double tdoa_covariance(double crb_n, double crb_0) {
  return kSpeedOfLight * kSpeedOfLight * (crb_n + crb_0);
}

Eigen::MatrixX3d ellipsoid_jacobian(const Vec3& x, const Vec3& p0, std::span<const Vec3> rxs) {
  const Vec3 d0 = x - p0;
  if (!(d0.norm() > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "UE coincides with the Tx");
  const Vec3 u0 = d0.normalized();
  Eigen::MatrixX3d H(static_cast<Eigen::Index>(rxs.size()), 3);
  for (std::size_t m = 0; m < rxs.size(); ++m) {
    const Vec3 dm = x - rxs[m];
    if (!(dm.norm() > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "UE coincides with an Rx");
    H.row(static_cast<Eigen::Index>(m)) = (u0 + dm.normalized()).transpose();
  }
  return H;
}

PebResult position_fim(const Vec3& x, const Vec3& p0, std::span<const Vec3> rxs, const Eigen::VectorXd& variances) {
  if (rxs.size() < 3) throw Error(ErrorKind::UnderDetermined, "PEB needs at least 3 receivers");
  if (variances.size() != static_cast<Eigen::Index>(rxs.size())) {
    throw Error(ErrorKind::InvalidArgument, "one variance per receiver required");
  }
  const Eigen::MatrixX3d H = ellipsoid_jacobian(x, p0, rxs);
  PebResult out;
  // +inf variance contributes zero information
  const Eigen::VectorXd info = variances.unaryExpr([](double v) { return std::isfinite(v) ? 1.0 / v : 0.0; });
  out.fim = H.transpose() * info.asDiagonal() * H;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(out.fim);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || lmin <= lmax * 1e-14) {
    out.degenerate = true;
    out.peb = std::numeric_limits<double>::infinity();
    return out;
  }
  out.peb = std::sqrt(eig.eigenvalues().cwiseInverse().sum());
  return out;
}

PebResult position_fim(const Vec3& x, const Scenario& s, const Eigen::VectorXd& variances) {
  std::vector<Vec3> rxs;
  rxs.reserve(s.rxs.size());
  for (const RxNode& r : s.rxs) rxs.push_back(r.position);
  return position_fim(x, s.tx, rxs, variances);
}

Eigen::VectorXd true_tdoa_variances(const Scenario& s, const UserEquipment& u, const Vec3& x) {
  Eigen::VectorXd var(s.num_rx());
  for (int m = 0; m < s.num_rx(); ++m) {
    const double crb0 = toa_crb(crb_inputs(s, std::abs(path_gain({0, m}, s))));
    double v = std::numeric_limits<double>::infinity();
    try {
      const double beta = std::abs(nlos_path_gain(s, u, x, m));
      if (beta > 0.0) v = tdoa_covariance(toa_crb(crb_inputs(s, beta)), crb0);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ShadowedPath) throw;
    }
    var(m) = v;
  }
  return var;
}

Eigen::VectorXd true_tdoa_variances(const Scenario& s, int ue) {
  return true_tdoa_variances(s, s.ue(ue), s.ue(ue).position);
}

PebResult true_peb(const Scenario& s, const UserEquipment& u, const Vec3& x) {
  return position_fim(x, s, true_tdoa_variances(s, u, x));
}

PebResult true_peb(const Scenario& s, int ue) { return true_peb(s, s.ue(ue), s.ue(ue).position); }

std::vector<PebPoint> peb_map(const Scenario& s, std::span<const Vec3> grid) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty PEB grid");
  if (s.ues.empty()) throw Error(ErrorKind::InvalidArgument, "PEB map needs one UE");
  std::vector<PebPoint> out(grid.size());
  const UserEquipment& u = s.ue(1);
  parallel_for(grid.size(), [&](std::size_t i) {
    out[i].position = grid[i];
    try {
      out[i].peb = true_peb(s, u, grid[i]).peb;
    } catch (const Error&) {
      out[i].peb = std::numeric_limits<double>::infinity();
    }
  });
  return out;
}

}  // namespace risloc
