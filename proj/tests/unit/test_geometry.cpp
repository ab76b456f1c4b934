#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "risloc/error.hpp"
#include "risloc/geometry.hpp"

using namespace risloc;
using std::numbers::pi;

TEST_CASE("local_direction") {
  CHECK(local_direction(Rotation::identity(), {1, 0, 0}, Vec3::Zero()).isApprox(Vec3(1, 0, 0)));
  CHECK(local_direction(Rotation::identity(), {10, 0, 1}, {0, 0, -3}).isApprox(Vec3(10, 0, 4)));

  // active rotation by +pi/2 about z maps x onto y
  const Rotation rz = Rotation::from_euler_zyx(pi / 2, 0, 0);
  const Vec3 w = local_direction(rz, {1, 0, 0}, Vec3::Zero());
  CHECK((w - Vec3(0, 1, 0)).norm() < 1e-15);

  CHECK_THROWS_AS(local_direction(Rotation::identity(), {1, 2, 3}, {1, 2, 3}), Error);
}

TEST_CASE("rotation validation") {
  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
  bad(0, 0) = -1.0;  // reflection, det = -1
  CHECK_THROWS_AS(Rotation{bad}, Error);
  bad(0, 0) = 1.0 + 1e-9;
  CHECK_THROWS_AS(Rotation{bad}, Error);
  const Rotation r = Rotation::from_euler_zyx(0.3, -0.7, 1.9);
  CHECK((r.matrix().transpose() * r.matrix() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("angles_of") {
  AnglePair a = angles_of({0, 0, 1});
  CHECK(a.azimuth == 0.0);
  CHECK(a.elevation == 0.0);
  a = angles_of({0, 0, -2});
  CHECK(a.azimuth == 0.0);
  CHECK(a.elevation == doctest::Approx(pi));
  a = angles_of({1, 0, 0});
  CHECK(a.azimuth == 0.0);
  CHECK(a.elevation == doctest::Approx(pi / 2));
  a = angles_of({1, 1, std::sqrt(2.0)});
  CHECK(a.azimuth == doctest::Approx(pi / 4).epsilon(1e-14));
  CHECK(a.elevation == doctest::Approx(pi / 4).epsilon(1e-14));
  CHECK_THROWS_AS(angles_of(Vec3::Zero()), Error);
}

TEST_CASE("angles round trip away from the poles") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> az(-pi + 1e-9, pi), el(1e-3, pi - 1e-3);
  for (int i = 0; i < 1000; ++i) {
    const AnglePair psi{az(gen), el(gen)};
    const AnglePair back = angles_of(unit_vector(psi));
    CHECK(std::abs(back.azimuth - psi.azimuth) < 1e-12);
    CHECK(std::abs(back.elevation - psi.elevation) < 1e-12);
  }
}

TEST_CASE("wavenumber") {
  const Vec3 k0 = wavenumber({0, 0}, 0.01);
  CHECK((k0 - Vec3(0, 0, 200 * pi)).norm() < 1e-10);
  const Vec3 k1 = wavenumber({0, pi / 2}, 0.01);
  CHECK((k1 - Vec3(200 * pi, 0, 0)).norm() < 1e-10);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double lambda = 0.001 + u(gen);
    const Vec3 k = wavenumber({2 * pi * u(gen) - pi, pi * u(gen)}, lambda);
    CHECK(k.norm() == doctest::Approx(2 * pi / lambda).epsilon(1e-13));
  }
  CHECK_THROWS_AS(wavenumber({0, 0}, 0.0), Error);
}

TEST_CASE("steering vector") {
  SUBCASE("boresight is all ones for any geometry") {
    for (int rows : {1, 3, 16}) {
      for (int cols : {1, 2, 7}) {
        const CVector a = steering_vector({0.4, 0.0}, {rows, cols, 0.004, 0.01});
        REQUIRE(a.size() == static_cast<std::size_t>(rows * cols));
        for (const cdouble& z : a) CHECK(std::abs(z - cdouble(1.0)) < 1e-15);
      }
    }
  }
  SUBCASE("2x2 half-wavelength towards +x") {
    const RisGeometry g{2, 2, 0.005, 0.01};
    const SteeringFactors f = steering_factors({0.0, pi / 2}, g);
    CHECK(std::arg(f.row[0]) == doctest::Approx(-pi / 2).epsilon(1e-12));
    CHECK(std::arg(f.row[1]) == doctest::Approx(pi / 2).epsilon(1e-12));
    CHECK(std::abs(f.col[0] - cdouble(1.0)) < 1e-12);
    CHECK(std::abs(f.col[1] - cdouble(1.0)) < 1e-12);
    // Kronecker ordering i = r * cols + c
    const CVector a = steering_vector({0.0, pi / 2}, g);
    CHECK(std::abs(a[1] - f.row[0] * f.col[1]) < 1e-15);
    CHECK(std::abs(a[2] - f.row[1] * f.col[0]) < 1e-15);
  }
  SUBCASE("unit modulus and centered phases, 1000 random draws") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> n(1, 12);
    for (int i = 0; i < 1000; ++i) {
      const RisGeometry g{n(gen), n(gen), 0.001 + 0.01 * u(gen), 0.001 + 0.02 * u(gen)};
      const AnglePair psi{2 * pi * u(gen) - pi, pi * u(gen)};
      const SteeringFactors f = steering_factors(psi, g);
      CHECK(std::abs(f.row.front() * f.row.back() - cdouble(1.0)) < 1e-12);
      CHECK(std::abs(f.col.front() * f.col.back() - cdouble(1.0)) < 1e-12);
      for (const cdouble& z : steering_vector(psi, g)) CHECK(std::abs(std::abs(z) - 1.0) < 1e-14);
    }
  }
}

TEST_CASE("bistatic range") {
  const Vec3 p0 = Vec3::Zero(), pm(10, 0, 1);
  CHECK(bistatic_range({0, 0, -3}, p0, pm) == doctest::Approx(13.770329614269007).epsilon(1e-15));
  CHECK(bistatic_range(0.3 * pm, p0, pm) == doctest::Approx(pm.norm()).epsilon(1e-15));
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x(nd(gen), nd(gen), nd(gen)), a(nd(gen), nd(gen), nd(gen)), b(nd(gen), nd(gen), nd(gen));
    CHECK(bistatic_range(x, a, b) == doctest::Approx(bistatic_range(x, b, a)).epsilon(1e-15));
    CHECK(bistatic_range(x, a, b) >= (a - b).norm() * (1 - 1e-15));
  }
}
