#include "doctest.h"

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "risloc/bounds.hpp"
#include "risloc/error.hpp"
#include "risloc/random.hpp"

using namespace risloc;
using risloc::testing::small_scenario;

namespace {

std::vector<Vec3> circle(double radius, double height, int count) {
  std::vector<Vec3> out;
  for (int m = 0; m < count; ++m) {
    const double a = 2.0 * std::numbers::pi * m / count;
    out.emplace_back(radius * std::cos(a), radius * std::sin(a), height);
  }
  return out;
}

const CrbInputs kReference{100, 32, 2.6352313834736494e-08, 1.25892541179416721e-20, 120e3, 7.957747154594768e-05};

}  // namespace

TEST_CASE("delay CRB value and scaling laws") {
  CHECK(toa_crb(kReference) == doctest::Approx(2.48841865782514033e-23).epsilon(1e-12));
  CrbInputs in = kReference;
  in.noise_variance *= 4.0;
  CHECK(toa_crb(in) == doctest::Approx(4.0 * toa_crb(kReference)).epsilon(1e-14));
  in = kReference;
  in.beta_mag *= 2.0;
  CHECK(toa_crb(in) == doctest::Approx(toa_crb(kReference) / 4.0).epsilon(1e-14));
  in = kReference;
  in.symbols *= 2;
  CHECK(toa_crb(in) == doctest::Approx(toa_crb(kReference) / 2.0).epsilon(1e-14));
  in = kReference;
  in.symbol_energy *= 10.0;
  CHECK(toa_crb(in) == doctest::Approx(toa_crb(kReference) / 10.0).epsilon(1e-14));
  in = kReference;
  in.subcarriers = 1;
  CHECK_THROWS_AS(toa_crb(in), Error);
  in = kReference;
  in.beta_mag = 0.0;
  CHECK_THROWS_AS(toa_crb(in), Error);
  CHECK(tdoa_covariance(1e-22, 3e-22) == doctest::Approx(9e16 * 4e-22).epsilon(1e-14));
}

TEST_CASE("PEB against a dense-matrix oracle") {
  const auto rxs = circle(10.0, 1.0, 3);
  Eigen::VectorXd var(3);
  var << 1e-4, 2e-4, 3e-4;
  const PebResult r = position_fim(Vec3(10.0, 0.0, -3.0), Vec3::Zero(), rxs, var);
  CHECK_FALSE(r.degenerate);
  CHECK(r.peb == doctest::Approx(0.026978585850555015).epsilon(1e-12));
  CHECK((r.fim - r.fim.transpose()).norm() <= 1e-14 * r.fim.norm());
}

TEST_CASE("Jacobian matches finite differences of the bistatic range") {
  Rng rng(17);
  const auto rxs = circle(12.0, 1.0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 x(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-8, -1));
    const Eigen::MatrixX3d H = ellipsoid_jacobian(x, Vec3::Zero(), rxs);
    for (std::size_t m = 0; m < rxs.size(); ++m) {
      for (int axis = 0; axis < 3; ++axis) {
        const double h = 1e-6;
        Vec3 xp = x, xm = x;
        xp(axis) += h;
        xm(axis) -= h;
        const double fd = (bistatic_range(xp, Vec3::Zero(), rxs[m]) - bistatic_range(xm, Vec3::Zero(), rxs[m])) / (2 * h);
        CHECK(std::abs(fd - H(static_cast<Eigen::Index>(m), axis)) < 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("PEB scales with the square root of the covariance") {
  Rng rng(3);
  const auto rxs = circle(10.0, 1.0, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 x(rng.uniform(-15, 15), rng.uniform(-15, 15), rng.uniform(-6, -1));
    Eigen::VectorXd var(5);
    for (int i = 0; i < 5; ++i) var(i) = rng.uniform(1e-6, 1e-2);
    const double base = position_fim(x, Vec3::Zero(), rxs, var).peb;
    CHECK(position_fim(x, Vec3::Zero(), rxs, 4.0 * var).peb == doctest::Approx(2.0 * base).epsilon(1e-10));
  }
}

TEST_CASE("PEB is invariant to translations and rotations about z") {
  Rng rng(4);
  const auto rxs = circle(10.0, 1.0, 4);
  Eigen::VectorXd var(4);
  var << 1e-4, 5e-4, 2e-4, 8e-4;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 x(rng.uniform(-15, 15), rng.uniform(-15, 15), rng.uniform(-6, -1));
    const double base = position_fim(x, Vec3::Zero(), rxs, var).peb;
    const Vec3 shift(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-5, 5));
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(rng.uniform(0, 6.28), Vec3::UnitZ()).toRotationMatrix();
    std::vector<Vec3> moved;
    for (const Vec3& r : rxs) moved.push_back(rot * r + shift);
    CHECK(position_fim(rot * x + shift, shift, moved, var).peb == doctest::Approx(base).epsilon(1e-8));
  }
}

TEST_CASE("degenerate and under-determined geometries") {
  const std::vector<Vec3> planar{Vec3(10, 0, 0), Vec3(0, 10, 0), Vec3(-10, 0, 0)};
  const PebResult r = position_fim(Vec3(3.0, 4.0, 0.0), Vec3::Zero(), planar, Eigen::VectorXd::Ones(3));
  CHECK(r.degenerate);
  CHECK(std::isinf(r.peb));
  try {
    position_fim(Vec3(1, 1, -1), Vec3::Zero(), std::vector<Vec3>(planar.begin(), planar.begin() + 2),
                 Eigen::VectorXd::Ones(2));
    FAIL("expected UnderDetermined");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnderDetermined);
  }
  Eigen::VectorXd var = Eigen::VectorXd::Ones(3);
  var(1) = std::numeric_limits<double>::infinity();
  CHECK(position_fim(Vec3(3.0, 4.0, -2.0), Vec3::Zero(), planar, var).degenerate);
}

TEST_CASE("more receivers never increase the PEB") {
  Eigen::VectorXd var = Eigen::VectorXd::Constant(8, 1e-4);
  std::vector<Vec3> rxs = circle(10.0, 1.0, 8);
  const Vec3 x(4.0, -3.0, -3.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int m = 3; m <= 8; ++m) {
    const double peb = position_fim(x, Vec3::Zero(), std::span<const Vec3>(rxs.data(), m), var.head(m)).peb;
    CHECK(peb <= prev * (1.0 + 1e-12));
    prev = peb;
  }
}

TEST_CASE("true PEB and the PEB map") {
  const Scenario s = small_scenario({Vec3(10.0, 0.0, -3.0)}, 7, 64);
  const PebResult r = true_peb(s, 1);
  CHECK(std::isfinite(r.peb));
  CHECK(r.peb > 0.0);
  const std::vector<Vec3> grid{Vec3(10.0, 0.0, -3.0), Vec3(0.0, 0.0, 0.0), Vec3(2.0, 2.0, 5.0)};
  const auto map = peb_map(s, grid);
  REQUIRE(map.size() == 3);
  CHECK(map[0].peb == doctest::Approx(r.peb).epsilon(1e-14));
  CHECK(std::isinf(map[1].peb));  // on the Tx
  CHECK(std::isinf(map[2].peb));  // above the array, every NLOS path shadowed
  CHECK_THROWS_AS(peb_map(s, {}), Error);

  Scenario noisier = s;
  noisier.noise.noise_figure_db += 10.0 * std::log10(4.0);
  CHECK(true_peb(noisier, 1).peb == doctest::Approx(2.0 * r.peb).epsilon(1e-10));
}
