#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "risloc/bounds.hpp"
#include "risloc/locator.hpp"
#include "risloc/random.hpp"

using namespace risloc;
using risloc::testing::small_scenario;

namespace {

double wrapped(double tau, double window) { return tau - window * std::floor(tau / window); }

// Noise-free ToA grid straight from the geometry.
ToaGrid exact_grid(const Scenario& s, double variance = 1e-22) {
  const double window = s.ofdm.ambiguity_window();
  ToaGrid g(static_cast<std::size_t>(s.num_ue() + 1), std::vector<std::optional<ToaEstimate>>(s.rxs.size()));
  for (int n = 0; n <= s.num_ue(); ++n) {
    for (int m = 0; m < s.num_rx(); ++m) g[n][m] = ToaEstimate{wrapped(path_delay({n, m}, s), window), 1.0, variance};
  }
  return g;
}

Eigen::VectorXd true_ranges(const Scenario& s, const Vec3& x, const std::vector<int>& rx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rx.size()));
  for (std::size_t i = 0; i < rx.size(); ++i) out(i) = bistatic_range(x, s.tx, s.rxs[rx[i]].position);
  return out;
}

}  // namespace

TEST_CASE("noiseless TDOA recovers the bistatic ranges for any clock bias") {
  Scenario s = small_scenario({Vec3(10.0, 0.0, -3.0)}, 1);
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    for (RxNode& r : s.rxs) r.clock_bias = rng.uniform() * s.ofdm.ambiguity_window();
    const TdoaVector t = form_tdoa(exact_grid(s), 1, s);
    REQUIRE(t.size() == 3);
    CHECK((t.delta - true_ranges(s, s.ue(1).position, t.rx)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("TDOA unwrapping near the window edge") {
  Scenario s = small_scenario({Vec3(10.0, 0.0, -3.0)}, 1);
  const double window = s.ofdm.ambiguity_window();
  s.rxs[0].clock_bias = window - 40e-9;  // LOS lands late in the window, NLOS wraps past zero
  ToaGrid g = exact_grid(s);
  CHECK(g[1][0]->tau < g[0][0]->tau);
  const TdoaVector t = form_tdoa(g, 1, s);
  CHECK(std::abs(t.delta(0) - bistatic_range(s.ue(1).position, s.tx, s.rxs[0].position)) < 1e-6);

  // a slightly negative difference from noise is kept, not unwrapped
  s.rxs[0].clock_bias = 0.0;
  g = exact_grid(s);
  g[1][0]->tau = g[0][0]->tau - 1e-9;
  CHECK(form_tdoa(g, 1, s).delta(0) == doctest::Approx(kSpeedOfLight * -1e-9 + (s.rxs[0].position - s.tx).norm()));
}

TEST_CASE("missing paths drop receivers; fewer than three is under-determined") {
  Scenario s = small_scenario({Vec3(10.0, 0.0, -3.0)}, 1, 16);
  s.rxs.push_back({Vec3(0.0, -12.0, 1.5), 0.0});
  ToaGrid g = exact_grid(s);
  g[1][1].reset();
  const TdoaVector t = form_tdoa(g, 1, s);
  CHECK(t.rx == std::vector<int>{0, 2, 3});
  g[0][2].reset();
  try {
    form_tdoa(g, 1, s);
    FAIL("expected UnderDetermined");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnderDetermined);
  }
}

TEST_CASE("zero variances fall back to equal weights") {
  const Scenario s = small_scenario();
  const TdoaVector t = form_tdoa(exact_grid(s, 0.0), 1, s);
  CHECK(t.variance == Eigen::VectorXd::Ones(3));
}

TEST_CASE("closed form contains the true position") {
  Rng rng(21);
  Scenario s = small_scenario();
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 x(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-8, -1));
    s.ues[0].position = x;
    const TdoaVector t = form_tdoa(exact_grid(s), 1, s);
    const auto cands = closed_form_init(t, s);
    REQUIRE(!cands.empty());
    CHECK(cands.size() <= 2);
    double best = 1e9;
    for (const Vec3& c : cands) best = std::min(best, (c - x).norm());
    CHECK(best < 1e-5);
  }
}

TEST_CASE("three coplanar receivers give a mirror pair resolved by the prior") {
  const Scenario s = small_scenario({Vec3(4.0, 3.0, -3.0)});
  const TdoaVector t = form_tdoa(exact_grid(s), 1, s);
  const auto cands = closed_form_init(t, s);
  REQUIRE(cands.size() == 2);
  const Vec3 x = s.ue(1).position;
  const Vec3 chosen = resolve_ambiguity(cands, t, s, below_receivers(s));
  CHECK((chosen - x).norm() < 1e-5);
  try {
    resolve_ambiguity(cands, t, s, [](const Vec3&) { return false; });
    FAIL("expected AmbiguousGeometry");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AmbiguousGeometry);
  }
}

TEST_CASE("a dominant candidate wins regardless of the prior") {
  const Scenario s = small_scenario({Vec3(4.0, 3.0, -3.0)});
  const TdoaVector t = form_tdoa(exact_grid(s), 1, s);
  const Vec3 truth = s.ue(1).position;
  const Vec3 far(25.0, -25.0, 0.5);
  const auto never = [](const Vec3&) { return false; };
  CHECK(resolve_ambiguity({far, truth}, t, s, never) == truth);
  CHECK(resolve_ambiguity({truth}, t, s, never) == truth);
  CHECK_THROWS_AS(resolve_ambiguity({}, t, s, never), Error);
}

TEST_CASE("refinement converges to the truth on noiseless data") {
  Rng rng(33);
  Scenario s = small_scenario();
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 x(rng.uniform(-15, 15), rng.uniform(-15, 15), rng.uniform(-6, -1));
    s.ues[0].position = x;
    const TdoaVector t = form_tdoa(exact_grid(s), 1, s);
    const Vec3 init = x + Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    const PositionEstimate e = refine_ml(init, t, s);
    CHECK(e.converged);
    CHECK((e.position - x).norm() < 1e-6);
    CHECK(e.objective <= ml_objective(init, t, s));
  }
}

TEST_CASE("refinement from the truth stays there") {
  const Scenario s = small_scenario();
  TdoaVector t = form_tdoa(exact_grid(s), 1, s);
  t.delta = true_ranges(s, s.ue(1).position, t.rx);
  const PositionEstimate e = refine_ml(s.ue(1).position, t, s);
  CHECK(e.converged);
  CHECK(e.iterations <= 1);
  CHECK((e.position - s.ue(1).position).norm() < 1e-9);
}

TEST_CASE("the estimate is invariant to a common covariance scale") {
  Scenario s = small_scenario({Vec3(6.0, -2.0, -4.0)});
  s.rxs.push_back({Vec3(0.0, 0.0, 2.0), 0.0});
  TdoaVector t = form_tdoa(exact_grid(s), 1, s);
  Rng rng(12);
  for (int i = 0; i < t.size(); ++i) t.delta(i) += 0.01 * rng.normal();
  t.variance << 1e-4, 2e-4, 3e-4, 4e-4;
  const Vec3 init = s.ue(1).position;
  const PositionEstimate a = refine_ml(init, t, s);
  TdoaVector scaled = t;
  scaled.variance *= 1e3;
  const PositionEstimate b = refine_ml(init, scaled, s);
  CHECK((a.position - b.position).norm() < 1e-8);
  CHECK(b.objective == doctest::Approx(a.objective / 1e3).epsilon(1e-6));
}

TEST_CASE("localize end to end and per-UE failure isolation") {
  Scenario s = small_scenario({Vec3(10.0, 0.0, -3.0), Vec3(-6.0, 4.0, -2.0), Vec3(2.0, -9.0, -5.0)});
  ToaGrid g = exact_grid(s);
  g[2][0].reset();
  g[2][1].reset();
  const auto results = localize_all(g, s);
  REQUIRE(results.size() == 3);
  for (int n : {0, 2}) {
    REQUIRE(results[n].estimate.has_value());
    CHECK((results[n].estimate->position - s.ues[n].position).norm() < 1e-6);
    CHECK(results[n].estimate->converged);
  }
  CHECK_FALSE(results[1].estimate.has_value());
  REQUIRE(results[1].error.has_value());
  CHECK(*results[1].error == ErrorKind::UnderDetermined);
}

TEST_CASE("a custom prior picks between mirror candidates") {
  const Scenario s = small_scenario({Vec3(4.0, 3.0, -3.0)});
  const ToaGrid g = exact_grid(s);
  LocatorOptions opts;
  opts.prior = [](const Vec3& x) { return x.z() < -2.0 && x.z() > -4.0; };
  const PositionEstimate e = localize(g, 1, s, opts);
  CHECK((e.position - s.ue(1).position).norm() < 1e-6);
}

TEST_CASE("localize falls back to multistart when the closed form is degenerate") {
  Scenario s = small_scenario({Vec3(7.0, -4.0, -3.0)});
  for (RxNode& r : s.rxs) r.position.z() = 0.0;  // receivers coplanar with the Tx: P^T P singular
  s.rxs.push_back({Vec3(0.0, 14.0, 0.0), 0.0});
  const ToaGrid g = exact_grid(s);
  const TdoaVector t = form_tdoa(g, 1, s);
  try {
    closed_form_init(t, s);
    FAIL("expected DegenerateGeometry");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateGeometry);
  }
  const PositionEstimate e = localize(g, 1, s);
  CHECK((e.position - s.ue(1).position).norm() < 1e-6);
}
