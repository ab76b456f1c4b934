#include "risloc/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "risloc/error.hpp"
#include "risloc/kernels.hpp"
#include "risloc/random.hpp"

namespace risloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fractional part in [0, 1).
double frac(double x) {
  const double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

const RxNode& rx_at(const Scenario& s, int m) {
  if (m < 0 || m >= s.num_rx()) throw Error(ErrorKind::OutOfRange, "receiver index " + std::to_string(m));
  return s.rxs[static_cast<std::size_t>(m)];
}

const UserEquipment& ue_at(const Scenario& s, int n) {
  if (n < 1 || n > s.num_ue()) throw Error(ErrorKind::OutOfRange, "UE index " + std::to_string(n));
  return s.ue(n);
}

// Adds sqrt(Es) * d(tau) * gains^T into Y.
void add_rank_one(Eigen::MatrixXcd& Y, const CVector& phasor, const CVector& gains, double amplitude) {
  const auto K = static_cast<std::size_t>(Y.rows());
  for (Eigen::Index t = 0; t < Y.cols(); ++t) {
    kernels::axpy(amplitude * gains[static_cast<std::size_t>(t)], phasor, std::span<cdouble>(Y.col(t).data(), K));
  }
}

}  // namespace

void OfdmConfig::validate() const {
  if (subcarriers < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 subcarriers");
  if (symbols < 1) throw Error(ErrorKind::InvalidArgument, "need at least 1 OFDM symbol");
  if (!(spacing_hz > 0.0)) throw Error(ErrorKind::InvalidArgument, "subcarrier spacing must be positive");
  if (!(symbol_energy > 0.0)) throw Error(ErrorKind::InvalidArgument, "symbol energy must be positive");
  if (fft_size < subcarriers) throw Error(ErrorKind::InvalidArgument, "FFT size must be at least K");
}

double NoiseConfig::effective() const { return psd * std::pow(10.0, noise_figure_db / 10.0); }

ProfileSet Scenario::profile_set() const {
  std::vector<int> cols;
  cols.reserve(ues.size());
  for (const UserEquipment& u : ues) cols.push_back(u.code_column);
  return ProfileSet(ofdm.symbols, std::move(cols));
}

CVector delay_phasor(double tau, int K, double spacing_hz) {
  CVector out(static_cast<std::size_t>(std::max(K, 0)));
  const double cycles = frac(spacing_hz * tau);
  for (int k = 0; k < K; ++k) {
    out[static_cast<std::size_t>(k)] = std::polar(1.0, kTwoPi * frac(k * cycles));
  }
  return out;
}

double path_delay(const PathId& path, const Scenario& s) {
  const RxNode& rx = rx_at(s, path.rx);
  double range = 0.0;
  if (path.ue == 0) {
    range = (s.tx - rx.position).norm();
  } else {
    range = bistatic_range(ue_at(s, path.ue).position, s.tx, rx.position);
  }
  return range / kSpeedOfLight + rx.clock_bias;
}

cdouble los_gain(const Vec3& p0, const Vec3& pm, double wavelength) {
  const double d = (p0 - pm).norm();
  if (!(d > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "Tx and Rx coincide");
  return std::polar(wavelength / (4.0 * std::numbers::pi * d), -kTwoPi * frac(d / wavelength));
}

double nlos_gain(const Vec3& p0, const Vec3& x, const Vec3& pm, double theta_el, double phi_el,
                 double wavelength) {
  const double d0 = (p0 - x).norm();
  const double dm = (pm - x).norm();
  if (!(d0 > 0.0) || !(dm > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "UE coincides with an anchor");
  const double ct = std::cos(theta_el);
  const double cp = std::cos(phi_el);
  if (ct <= 0.0 || cp <= 0.0) throw Error(ErrorKind::ShadowedPath, "RIS illuminated from its back side");
  return wavelength * wavelength * std::pow(ct * cp, 0.285) / (16.0 * std::numbers::pi * d0 * dm);
}

cdouble ris_response(const AnglePair& departure, const AnglePair& arrival, const RisGeometry& g,
                     const CVector& constant) {
  if (constant.size() != static_cast<std::size_t>(g.size())) {
    throw Error(ErrorKind::InvalidArgument, "profile length does not match the RIS size");
  }
  SteeringFactors dep = steering_factors(departure, g);
  const SteeringFactors arr = steering_factors(arrival, g);
  // a(theta) o a(phi) = (row_t o row_p) kron (col_t o col_p)
  kernels::hadamard(dep.row, arr.row, dep.row);
  kernels::hadamard(dep.col, arr.col, dep.col);
  const auto cols = static_cast<std::size_t>(g.cols);
  cdouble sum = 0.0;
  for (std::size_t r = 0; r < dep.row.size(); ++r) {
    sum += dep.row[r] * kernels::dot(std::span<const cdouble>(constant.data() + r * cols, cols), dep.col);
  }
  return sum;
}

cdouble nlos_path_gain(const Scenario& s, const UserEquipment& u, const Vec3& x, int rx) {
  const RxNode& node = rx_at(s, rx);
  const AnglePair theta = angles_of(local_direction(u.orientation, node.position, x));
  const AnglePair phi = angles_of(local_direction(u.orientation, s.tx, x));
  const double gamma = nlos_gain(s.tx, x, node.position, theta.elevation, phi.elevation, s.wavelength);
  return gamma * ris_response(theta, phi, u.ris, u.profile.constant);
}

cdouble path_gain(const PathId& path, const Scenario& s) {
  if (path.ue == 0) return los_gain(s.tx, rx_at(s, path.rx).position, s.wavelength);
  const UserEquipment& u = ue_at(s, path.ue);
  return nlos_path_gain(s, u, u.position, path.rx);
}

CVector nlos_symbol_gains(const PathId& path, const Scenario& s) {
  if (path.ue < 1) throw Error(ErrorKind::InvalidArgument, "symbol gains are defined for NLOS paths only");
  const cdouble beta = path_gain(path, s);
  const CVector& code = ue_at(s, path.ue).profile.temporal;
  CVector out(code.size());
  for (std::size_t t = 0; t < code.size(); ++t) out[t] = beta * code[t];
  return out;
}

Eigen::MatrixXcd scatterer_terms(const Scenario& s, int rx) {
  const RxNode& node = rx_at(s, rx);
  const int K = s.ofdm.subcarriers;
  const int T = s.ofdm.symbols;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(K, T);
  if (s.scatterers.empty()) return out;
  CVector sum(static_cast<std::size_t>(K), cdouble(0.0));
  const double four_pi_cubed = std::pow(4.0 * std::numbers::pi, 3);
  for (const Scatterer& sc : s.scatterers) {
    const double d1 = (sc.position - s.tx).norm();
    const double d2 = (node.position - sc.position).norm();
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "scatterer coincides with an anchor");
    const double mag = std::sqrt(s.wavelength * s.wavelength * sc.rcs / (four_pi_cubed * d1 * d1 * d2 * d2));
    const cdouble gain = std::polar(mag, -kTwoPi * frac((d1 + d2) / s.wavelength));
    const double tau = (d1 + d2) / kSpeedOfLight + node.clock_bias;
    kernels::axpy(gain, delay_phasor(tau, K, s.ofdm.spacing_hz), sum);
  }
  for (int t = 0; t < T; ++t) {
    std::copy(sum.begin(), sum.end(), out.col(t).data());
  }
  return out;
}

Eigen::MatrixXcd noiseless_observation(const Scenario& s, int rx) {
  const int K = s.ofdm.subcarriers;
  const int T = s.ofdm.symbols;
  const double amplitude = std::sqrt(s.ofdm.symbol_energy);
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(K, T);

  const PathId los{0, rx};
  add_rank_one(Y, delay_phasor(path_delay(los, s), K, s.ofdm.spacing_hz),
               CVector(static_cast<std::size_t>(T), path_gain(los, s)), amplitude);

  for (int n = 1; n <= s.num_ue(); ++n) {
    const PathId p{n, rx};
    CVector gains;
    try {
      gains = nlos_symbol_gains(p, s);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ShadowedPath) continue;
      throw;
    }
    add_rank_one(Y, delay_phasor(path_delay(p, s), K, s.ofdm.spacing_hz), gains, amplitude);
  }

  if (!s.scatterers.empty()) Y += amplitude * scatterer_terms(s, rx);
  return Y;
}

std::vector<RxSignalBlock> synthesize(const Scenario& s) {
  s.ofdm.validate();
  std::vector<RxSignalBlock> blocks;
  blocks.reserve(s.rxs.size());
  const double sigma = std::sqrt(s.noise.effective() / 2.0);
  for (int m = 0; m < s.num_rx(); ++m) {
    RxSignalBlock b{m, noiseless_observation(s, m)};
    if (s.noise.enabled && sigma > 0.0) {
      Rng rng(derive_seed(derive_seed(s.seed, streams::kNoise), static_cast<std::uint64_t>(m)));
      for (Eigen::Index t = 0; t < b.samples.cols(); ++t) {
        for (Eigen::Index k = 0; k < b.samples.rows(); ++k) {
          const double re = rng.normal();
          const double im = rng.normal();
          b.samples(k, t) += cdouble(sigma * re, sigma * im);
        }
      }
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

}  // namespace risloc
