#pragma once

#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace risloc {

using Vec3 = Eigen::Vector3d;
using cdouble = std::complex<double>;
using CVector = std::vector<cdouble>;

// Propagation speed used throughout the simulator (m/s).
inline constexpr double kSpeedOfLight = 3.0e8;

// Active rotation from the global frame into a RIS-local frame, applied as R * v.
class Rotation {
 public:
  Rotation() : m_(Eigen::Matrix3d::Identity()) {}
  // Throws DegenerateGeometry unless the matrix is orthonormal with det +1 (1e-12).
  explicit Rotation(const Eigen::Matrix3d& m);

  static Rotation identity() { return Rotation(); }
  // Z-Y-X (yaw, pitch, roll) Euler angles in radians: R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static Rotation from_euler_zyx(double yaw, double pitch, double roll);

  const Eigen::Matrix3d& matrix() const { return m_; }
  Vec3 apply(const Vec3& v) const { return m_ * v; }

 private:
  Eigen::Matrix3d m_;
};

struct AnglePair {
  double azimuth = 0.0;    // (-pi, pi], in the x-y plane from the x axis
  double elevation = 0.0;  // [0, pi], from the z axis
};

struct RisGeometry {
  int rows = 256;
  int cols = 256;
  double spacing = 0.005;
  double wavelength = 0.01;

  int size() const { return rows * cols; }
  void validate() const;
};

// R * (anchor - ue). Throws DegenerateGeometry when anchor == ue.
Vec3 local_direction(const Rotation& rot, const Vec3& anchor, const Vec3& ue);

// Azimuth is 0 on the z axis, where atan2(0, 0) is ill-defined.
AnglePair angles_of(const Vec3& w);

// Unit vector pointing along the given angles.
Vec3 unit_vector(const AnglePair& psi);

Vec3 wavenumber(const AnglePair& psi, double wavelength);

// Per-axis factors of the UPA response, with the centering phase folded in.
struct SteeringFactors {
  CVector row;  // length rows
  CVector col;  // length cols
};

SteeringFactors steering_factors(const AnglePair& psi, const RisGeometry& g);

// a(psi) = a_r(psi) kron a_c(psi); element index i = r * cols + c.
CVector steering_vector(const AnglePair& psi, const RisGeometry& g);

// ||p0 - x|| + ||x - pm||
double bistatic_range(const Vec3& x, const Vec3& p0, const Vec3& pm);

}  // namespace risloc
