#include "risloc/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "risloc/error.hpp"

namespace risloc {

namespace {

CVector centered_phasors(int count, double phase_step) {
  CVector out(static_cast<std::size_t>(count));
  const double offset = -(count - 1) * phase_step / 2.0;
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = std::polar(1.0, offset + i * phase_step);
  }
  return out;
}

}  // namespace

Rotation::Rotation(const Eigen::Matrix3d& m) : m_(m) {
  if (!m.allFinite()) throw Error(ErrorKind::DegenerateGeometry, "rotation has non-finite entries");
  const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-12 || std::abs(m.determinant() - 1.0) > 1e-12) {
    throw Error(ErrorKind::DegenerateGeometry, "rotation matrix is not proper orthonormal");
  }
}

Rotation Rotation::from_euler_zyx(double yaw, double pitch, double roll) {
  const Eigen::Matrix3d m = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                             Eigen::AngleAxisd(roll, Vec3::UnitX()))
                                .toRotationMatrix();
  return Rotation(m);
}

void RisGeometry::validate() const {
  if (rows < 1 || cols < 1) throw Error(ErrorKind::InvalidArgument, "RIS must have at least one element");
  if (!(spacing > 0.0) || !(wavelength > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "RIS spacing and wavelength must be positive");
  }
}

Vec3 local_direction(const Rotation& rot, const Vec3& anchor, const Vec3& ue) {
  const Vec3 diff = anchor - ue;
  if (diff.squaredNorm() == 0.0) throw Error(ErrorKind::DegenerateGeometry, "anchor coincides with UE");
  return rot.apply(diff);
}

AnglePair angles_of(const Vec3& w) {
  const double norm = w.norm();
  if (!(norm > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "zero-length direction");
  AnglePair out;
  out.azimuth = (w.x() == 0.0 && w.y() == 0.0) ? 0.0 : std::atan2(w.y(), w.x());
  out.elevation = std::acos(std::clamp(w.z() / norm, -1.0, 1.0));
  return out;
}

Vec3 unit_vector(const AnglePair& psi) {
  const double s = std::sin(psi.elevation);
  return {s * std::cos(psi.azimuth), s * std::sin(psi.azimuth), std::cos(psi.elevation)};
}

Vec3 wavenumber(const AnglePair& psi, double wavelength) {
  if (!(wavelength > 0.0)) throw Error(ErrorKind::InvalidArgument, "wavelength must be positive");
  return (2.0 * std::numbers::pi / wavelength) * unit_vector(psi);
}

SteeringFactors steering_factors(const AnglePair& psi, const RisGeometry& g) {
  g.validate();
  const Vec3 k = wavenumber(psi, g.wavelength);
  return {centered_phasors(g.rows, g.spacing * k.x()), centered_phasors(g.cols, g.spacing * k.y())};
}

CVector steering_vector(const AnglePair& psi, const RisGeometry& g) {
  const SteeringFactors f = steering_factors(psi, g);
  CVector out;
  out.reserve(static_cast<std::size_t>(g.size()));
  for (const cdouble& r : f.row) {
    for (const cdouble& c : f.col) out.push_back(r * c);
  }
  return out;
}

double bistatic_range(const Vec3& x, const Vec3& p0, const Vec3& pm) { return (p0 - x).norm() + (x - pm).norm(); }

}  // namespace risloc
