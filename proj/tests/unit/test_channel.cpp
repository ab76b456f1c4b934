#include "doctest.h"

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "risloc/channel.hpp"
#include "risloc/error.hpp"

using namespace risloc;
using risloc::testing::small_scenario;

namespace {

double rel_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("delay phasor: unit modulus, origin and period") {
  const double df = 120e3;
  const CVector d = delay_phasor(123.456e-9, 100, df);
  REQUIRE(d.size() == 100);
  CHECK(d[0] == cdouble(1.0, 0.0));
  for (const cdouble& z : d) CHECK(std::abs(z) == doctest::Approx(1.0).epsilon(1e-15));
  const CVector shifted = delay_phasor(123.456e-9 + 1.0 / df, 100, df);
  for (std::size_t k = 0; k < d.size(); ++k) CHECK(std::abs(d[k] - shifted[k]) < 1e-9);
  const double k7 = 2.0 * std::numbers::pi * 7 * df * 123.456e-9;
  CHECK(std::abs(d[7] - std::polar(1.0, k7)) < 1e-12);
}

TEST_CASE("path delay and LOS gain") {
  Scenario s = small_scenario();
  s.rxs[0].position = Vec3(10.0, 0.0, 1.0);
  s.rxs[0].clock_bias = 0.0;
  CHECK(path_delay({0, 0}, s) == doctest::Approx(3.34995854037363e-08).epsilon(1e-14));
  s.rxs[0].clock_bias = 2e-6;
  CHECK(path_delay({0, 0}, s) == doctest::Approx(3.34995854037363e-08 + 2e-6).epsilon(1e-14));
  const double nlos = (Vec3(10, 0, -3).norm() + (Vec3(10, 0, 1) - Vec3(10, 0, -3)).norm()) / kSpeedOfLight;
  CHECK(path_delay({1, 0}, s) == doctest::Approx(nlos + 2e-6).epsilon(1e-14));

  const cdouble a = los_gain(Vec3::Zero(), Vec3(10.0, 0.0, 0.0), 0.01);
  CHECK(std::abs(a) == doctest::Approx(7.957747154594768e-05).epsilon(1e-14));
  CHECK(std::abs(a - cdouble(std::abs(a), 0.0)) < 1e-15);  // 10 m is a whole number of wavelengths
  CHECK_THROWS_AS(los_gain(Vec3::Zero(), Vec3::Zero(), 0.01), Error);
}

TEST_CASE("NLOS gain") {
  const Vec3 p0(0, 0, 0), x(0, 0, -5), pm(0, 7, -5);
  CHECK(nlos_gain(p0, x, pm, std::acos(0.5), std::acos(0.8), 0.01) ==
        doctest::Approx(4.37773227033918630e-08).epsilon(1e-13));
  CHECK(nlos_gain(Vec3(0, 0, 10), Vec3::Zero(), Vec3(0, 10, 0), 0.0, 0.0, 0.01) ==
        doctest::Approx(1.989436788648692e-08).epsilon(1e-13));
  try {
    nlos_gain(p0, x, pm, 0.5 * std::numbers::pi + 0.1, 0.0, 0.01);
    FAIL("expected ShadowedPath");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShadowedPath);
  }
}

TEST_CASE("RIS response matches the brute-force bilinear form") {
  const Scenario s = small_scenario({Vec3(10.0, 0.0, -3.0)}, 3, 24);
  const UserEquipment& u = s.ue(1);
  for (int m = 0; m < s.num_rx(); ++m) {
    const AnglePair theta = angles_of(local_direction(u.orientation, s.rxs[m].position, u.position));
    const AnglePair phi = angles_of(local_direction(u.orientation, s.tx, u.position));
    const CVector at = steering_vector(theta, u.ris);
    const CVector ap = steering_vector(phi, u.ris);
    std::complex<long double> ref = 0.0;
    for (std::size_t i = 0; i < at.size(); ++i) {
      ref += std::complex<long double>(at[i] * u.profile.constant[i] * ap[i]);
    }
    const cdouble fast = ris_response(theta, phi, u.ris, u.profile.constant);
    CHECK(std::abs(fast - cdouble(ref)) <= 1e-12 * std::abs(cdouble(ref)) + 1e-12);
  }
}

TEST_CASE("NLOS symbol gains follow the temporal code") {
  const Scenario s = small_scenario();
  const cdouble beta = path_gain({1, 1}, s);
  const CVector g = nlos_symbol_gains({1, 1}, s);
  REQUIRE(g.size() == 32);
  for (std::size_t t = 0; t < g.size(); ++t) CHECK(std::abs(g[t] - beta * s.ue(1).profile.temporal[t]) < 1e-20);
  CHECK_THROWS_AS(nlos_symbol_gains({0, 1}, s), Error);
}

TEST_CASE("scatterer gain and time invariance") {
  Scenario s = small_scenario();
  s.rxs[0].position = Vec3(10.0, 0.0, 1.0);
  s.rxs[0].clock_bias = 0.0;
  s.scatterers = {{Vec3(0.0, 0.0, -4.0), 0.1}};
  const Eigen::MatrixXcd S = scatterer_terms(s, 0);
  CHECK(std::abs(S(0, 0)) == doctest::Approx(1.58734089835602424e-06).epsilon(1e-12));
  for (int t = 1; t < S.cols(); ++t) CHECK((S.col(t) - S.col(0)).norm() == 0.0);
  CHECK(scatterer_terms(small_scenario(), 0).norm() == 0.0);
}

TEST_CASE("noiseless observation has rank N+1") {
  const Scenario s = small_scenario({Vec3(10.0, 0.0, -3.0), Vec3(-4.0, 6.0, -2.0)});
  for (int m = 0; m < s.num_rx(); ++m) {
    const Eigen::MatrixXcd Y = noiseless_observation(s, m);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(Y).singularValues();
    CHECK(sv(2) > 1e-8 * sv(0));
    CHECK(sv(3) < 1e-10 * sv(0));
  }
}

TEST_CASE("observation is a superposition of the UE contributions") {
  const Scenario both = small_scenario({Vec3(10.0, 0.0, -3.0), Vec3(-4.0, 6.0, -2.0)});
  Scenario first = both, second = both, none = both;
  first.ues = {both.ues[0]};
  second.ues = {both.ues[1]};
  none.ues.clear();
  for (int m = 0; m < both.num_rx(); ++m) {
    const Eigen::MatrixXcd lhs = noiseless_observation(both, m);
    const Eigen::MatrixXcd rhs =
        noiseless_observation(first, m) + noiseless_observation(second, m) - noiseless_observation(none, m);
    CHECK(rel_diff(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("a clock bias multiplies subcarrier k by exp(j 2 pi k df b)") {
  Scenario s = small_scenario();
  s.rxs[1].clock_bias = 0.0;
  const Eigen::MatrixXcd Y0 = noiseless_observation(s, 1);
  const double b = 3.1e-6;
  s.rxs[1].clock_bias = b;
  const Eigen::MatrixXcd Y1 = noiseless_observation(s, 1);
  const CVector rot = delay_phasor(b, s.ofdm.subcarriers, s.ofdm.spacing_hz);
  Eigen::MatrixXcd expected = Y0;
  for (int k = 0; k < Y0.rows(); ++k) expected.row(k) *= rot[static_cast<std::size_t>(k)];
  CHECK(rel_diff(Y1, expected) < 1e-10);
}

TEST_CASE("a shadowed UE contributes nothing") {
  Scenario s = small_scenario({Vec3(10.0, 0.0, 5.0)});
  Scenario none = s;
  none.ues.clear();
  for (int m = 0; m < s.num_rx(); ++m) {
    CHECK_THROWS_AS(path_gain({1, m}, s), Error);
    CHECK(rel_diff(noiseless_observation(s, m), noiseless_observation(none, m)) == 0.0);
  }
}

TEST_CASE("noise statistics and seeding") {
  Scenario s = small_scenario();
  s.seed = 11;
  const auto a = synthesize(s);
  const auto b = synthesize(s);
  REQUIRE(a.size() == 3);
  double power = 0.0, re_im = 0.0;
  long count = 0;
  for (int m = 0; m < s.num_rx(); ++m) {
    CHECK(a[m].samples == b[m].samples);
    const Eigen::MatrixXcd W = a[m].samples - noiseless_observation(s, m);
    power += W.squaredNorm();
    re_im += (W.real().array() * W.imag().array()).sum();
    count += W.size();
  }
  const double n_eff = s.noise.effective();
  CHECK(n_eff == doctest::Approx(1.25892541179416721e-20).epsilon(1e-13));
  CHECK(power / count == doctest::Approx(n_eff).epsilon(0.05));
  CHECK(std::abs(re_im / count) < 0.05 * n_eff);

  s.seed = 12;
  CHECK(synthesize(s)[0].samples != a[0].samples);
  s.noise.enabled = false;
  CHECK(synthesize(s)[0].samples == noiseless_observation(s, 0));
}

TEST_CASE("out-of-range indices") {
  const Scenario s = small_scenario();
  CHECK_THROWS_AS(path_delay({0, 3}, s), Error);
  CHECK_THROWS_AS(path_gain({2, 0}, s), Error);
}
