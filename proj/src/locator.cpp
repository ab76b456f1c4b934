#include "risloc/locator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "risloc/bounds.hpp"

namespace risloc {

namespace {

Eigen::VectorXd predicted_ranges(const Vec3& x, const TdoaVector& tdoa, const Scenario& s) {
  Eigen::VectorXd h(tdoa.size());
  for (int i = 0; i < tdoa.size(); ++i) {
    h(i) = bistatic_range(x, s.tx, s.rxs[static_cast<std::size_t>(tdoa.rx[static_cast<std::size_t>(i)])].position);
  }
  return h;
}

std::vector<Vec3> used_rx_positions(const TdoaVector& tdoa, const Scenario& s) {
  std::vector<Vec3> out;
  out.reserve(tdoa.rx.size());
  for (int m : tdoa.rx) out.push_back(s.rxs[static_cast<std::size_t>(m)].position);
  return out;
}

const RegionPrior& effective_prior(const LocatorOptions& opts, const Scenario& s, RegionPrior& storage) {
  if (opts.prior) return opts.prior;
  storage = below_receivers(s);
  return storage;
}

PositionEstimate multistart(const TdoaVector& tdoa, const Scenario& s, const LocatorOptions& opts,
                            const RegionPrior& prior) {
  constexpr int kPerAxis[3] = {6, 6, 3};
  LocatorOptions coarse = opts;
  coarse.max_iterations = 30;
  std::optional<PositionEstimate> best_in_prior;
  std::optional<PositionEstimate> best_any;
  for (int i = 0; i < kPerAxis[0]; ++i) {
    for (int j = 0; j < kPerAxis[1]; ++j) {
      for (int k = 0; k < kPerAxis[2]; ++k) {
        const Vec3 frac((i + 0.5) / kPerAxis[0], (j + 0.5) / kPerAxis[1], (k + 0.5) / kPerAxis[2]);
        const Vec3 start = opts.region.lo + frac.cwiseProduct(opts.region.hi - opts.region.lo);
        PositionEstimate e;
        try {
          e = refine_ml(start, tdoa, s, coarse);
        } catch (const Error&) {
          continue;
        }
        if (!std::isfinite(e.objective)) continue;
        if (!best_any || e.objective < best_any->objective) best_any = e;
        if (prior(e.position) && (!best_in_prior || e.objective < best_in_prior->objective)) best_in_prior = e;
      }
    }
  }
  const std::optional<PositionEstimate>& pick = best_in_prior ? best_in_prior : best_any;
  if (!pick) throw Error(ErrorKind::InitFailure, "multistart found no finite objective");
  return *pick;
}

}  // namespace

RegionPrior below_receivers(const Scenario& s) {
  double zmin = std::numeric_limits<double>::infinity();
  for (const RxNode& r : s.rxs) zmin = std::min(zmin, r.position.z());
  return [zmin](const Vec3& x) { return x.z() < zmin; };
}

TdoaVector form_tdoa(const ToaGrid& grid, int ue, const Scenario& s) {
  if (ue < 1 || static_cast<std::size_t>(ue) >= grid.size()) {
    throw Error(ErrorKind::OutOfRange, "UE index " + std::to_string(ue));
  }
  const double window = s.ofdm.ambiguity_window();
  TdoaVector out;
  out.ue = ue;
  std::vector<double> delta, variance;
  const auto& los = grid[0];
  const auto& nlos = grid[static_cast<std::size_t>(ue)];
  for (std::size_t m = 0; m < los.size() && m < s.rxs.size(); ++m) {
    if (!los[m] || !nlos[m]) continue;
    double diff = nlos[m]->tau - los[m]->tau;
    if (diff < -kUnwrapMargin * window) diff += window;
    if (diff > (1.0 - kUnwrapMargin) * window) diff -= window;
    out.rx.push_back(static_cast<int>(m));
    delta.push_back(kSpeedOfLight * diff + (s.tx - s.rxs[m].position).norm());
    variance.push_back(tdoa_covariance(nlos[m]->crb_var, los[m]->crb_var));
  }
  if (out.rx.size() < 3) {
    throw Error(ErrorKind::UnderDetermined,
                "UE " + std::to_string(ue) + " has " + std::to_string(out.rx.size()) + " usable receivers");
  }
  out.delta = Eigen::Map<Eigen::VectorXd>(delta.data(), static_cast<Eigen::Index>(delta.size()));
  out.variance = Eigen::Map<Eigen::VectorXd>(variance.data(), static_cast<Eigen::Index>(variance.size()));
  // zero-noise configs carry no CRB; fall back to equal weights
  if ((out.variance.array() <= 0.0).any() || !out.variance.allFinite()) out.variance.setOnes();
  return out;
}

double ml_objective(const Vec3& x, const TdoaVector& tdoa, const Scenario& s) {
  const Eigen::VectorXd r = tdoa.delta - predicted_ranges(x, tdoa, s);
  return (r.array().square() / tdoa.variance.array()).sum();
}

std::vector<Vec3> closed_form_init(const TdoaVector& tdoa, const Scenario& s) {
  const int M = tdoa.size();
  if (M < 3) throw Error(ErrorKind::UnderDetermined, "closed form needs at least 3 receivers");
  Eigen::MatrixX3d P(M, 3);
  Eigen::VectorXd z(M);
  for (int i = 0; i < M; ++i) {
    const Vec3 p = s.rxs[static_cast<std::size_t>(tdoa.rx[static_cast<std::size_t>(i)])].position - s.tx;
    P.row(i) = p.transpose();
    z(i) = 0.5 * (p.squaredNorm() - tdoa.delta(i) * tdoa.delta(i));
  }
  const Eigen::JacobiSVD<Eigen::MatrixX3d> svd(P, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(2) > 1e-9 * sv(0))) throw Error(ErrorKind::DegenerateGeometry, "receiver matrix P^T P is singular");
  const Vec3 a = svd.solve(z);
  const Vec3 b = svd.solve(tdoa.delta);

  // ||a + b s||^2 = s^2  ->  (||b||^2 - 1) s^2 + 2 a.b s + ||a||^2 = 0
  const double qa = b.squaredNorm() - 1.0;
  const double qb = a.dot(b);
  const double qc = a.squaredNorm();
  std::vector<double> roots;
  if (std::abs(qa) < 1e-12) {
    if (qb != 0.0) roots.push_back(-qc / (2.0 * qb));
  } else {
    double disc = qb * qb - qc * qa;
    if (disc < 0.0 && disc > -1e-12 * qb * qb) disc = 0.0;
    if (disc < 0.0) throw Error(ErrorKind::InitFailure, "no real root for the UE range");
    const double sq = std::sqrt(disc);
    roots.push_back((-qb + sq) / qa);
    if (sq > 0.0) roots.push_back((-qb - sq) / qa);
  }
  std::vector<Vec3> out;
  for (double r : roots) {
    if (std::isfinite(r) && r > 0.0) out.push_back(a + b * r + s.tx);
  }
  if (out.empty()) throw Error(ErrorKind::InitFailure, "no positive root for the UE range");
  return out;
}

Vec3 resolve_ambiguity(const std::vector<Vec3>& candidates, const TdoaVector& tdoa, const Scenario& s,
                       const RegionPrior& prior, double dominance_ratio) {
  if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "no candidates to choose from");
  if (candidates.size() == 1) return candidates.front();
  std::vector<std::pair<double, Vec3>> scored;
  for (const Vec3& c : candidates) scored.emplace_back(ml_objective(c, tdoa, s), c);
  std::sort(scored.begin(), scored.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  // Objectives at or below the measurement count are noise-level and never dominate each other.
  const double floor = static_cast<double>(tdoa.size());
  if (scored[1].first > dominance_ratio * std::max(scored[0].first, floor)) return scored[0].second;
  for (const auto& [obj, c] : scored) {
    if (prior && prior(c)) return c;
  }
  throw Error(ErrorKind::AmbiguousGeometry, "candidates have comparable objectives and none satisfies the prior");
}

PositionEstimate refine_ml(const Vec3& init, const TdoaVector& tdoa, const Scenario& s, const LocatorOptions& opts) {
  if (!init.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite initial guess");
  const std::vector<Vec3> rxs = used_rx_positions(tdoa, s);
  const Eigen::VectorXd w = tdoa.variance.cwiseInverse();

  PositionEstimate est;
  est.init = init;
  est.position = init;
  Eigen::VectorXd r = tdoa.delta - predicted_ranges(init, tdoa, s);
  est.objective = r.dot(w.cwiseProduct(r));

  double lambda = 1e-3;
  for (int it = 0; it < opts.max_iterations; ++it) {
    est.iterations = it;
    Eigen::MatrixX3d J;
    try {
      J = ellipsoid_jacobian(est.position, s.tx, rxs);
    } catch (const Error&) {
      break;  // sitting on an anchor; keep the best iterate
    }
    const Eigen::Matrix3d A = J.transpose() * w.asDiagonal() * J;
    const Vec3 g = J.transpose() * w.cwiseProduct(r);  // minus half the gradient
    if (2.0 * g.norm() <= opts.gradient_tolerance) {
      est.converged = true;
      return est;
    }
    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::Matrix3d damped = A;
      damped.diagonal() += lambda * A.diagonal().cwiseMax(1e-12 * A.trace());
      const Vec3 step = damped.ldlt().solve(g);
      const Vec3 next = est.position + step;
      const Eigen::VectorXd r_next = tdoa.delta - predicted_ranges(next, tdoa, s);
      const double obj = r_next.dot(w.cwiseProduct(r_next));
      if (std::isfinite(obj) && obj <= est.objective) {
        est.position = next;
        est.objective = obj;
        r = r_next;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        if (step.norm() < opts.step_tolerance) {
          est.iterations = it + 1;
          est.converged = true;
          return est;
        }
        break;
      }
      if (step.norm() < opts.step_tolerance) {
        // no decrease possible at the resolution we care about
        est.iterations = it + 1;
        est.converged = true;
        return est;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
  }
  est.iterations = std::max(est.iterations, opts.max_iterations);
  return est;
}

PositionEstimate localize(const ToaGrid& grid, int ue, const Scenario& s, const LocatorOptions& opts) {
  const TdoaVector tdoa = form_tdoa(grid, ue, s);
  RegionPrior storage;
  const RegionPrior& prior = effective_prior(opts, s, storage);
  Vec3 init;
  try {
    init = resolve_ambiguity(closed_form_init(tdoa, s), tdoa, s, prior, opts.dominance_ratio);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InitFailure && e.kind() != ErrorKind::AmbiguousGeometry &&
        e.kind() != ErrorKind::DegenerateGeometry) {
      throw;
    }
    init = multistart(tdoa, s, opts, prior).position;
  }
  PositionEstimate est = refine_ml(init, tdoa, s, opts);
  est.init = init;
  return est;
}

std::vector<UeResult> localize_all(const ToaGrid& grid, const Scenario& s, const LocatorOptions& opts) {
  std::vector<UeResult> out;
  for (int n = 1; n < static_cast<int>(grid.size()); ++n) {
    UeResult res;
    res.ue = n;
    try {
      res.estimate = localize(grid, n, s, opts);
    } catch (const Error& e) {
      res.error = e.kind();
      res.message = e.what();
    }
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace risloc
