#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "risloc/geometry.hpp"
#include "risloc/ris_profile.hpp"

namespace risloc {

struct OfdmConfig {
  int subcarriers = 100;       // K
  double spacing_hz = 120e3;   // delta f
  int symbols = 32;            // T
  double symbol_energy = 0.0;  // E_s, joules
  int fft_size = 1024;         // F, used by the delay estimator

  // Length of the delay ambiguity window, 1 / delta f.
  double ambiguity_window() const { return 1.0 / spacing_hz; }
  void validate() const;
};

struct NoiseConfig {
  double psd = 0.0;             // N_0, W/Hz
  double noise_figure_db = 0.0;
  bool enabled = true;          // false keeps the statistics but adds no noise

  // Per-sample variance at each receiver: N_0 * 10^(nf/10).
  double effective() const;
};

struct RxNode {
  Vec3 position = Vec3::Zero();
  double clock_bias = 0.0;  // seconds, in [0, 1/delta f)
};

struct Scatterer {
  Vec3 position = Vec3::Zero();
  double rcs = 0.1;  // m^2
};

struct UserEquipment {
  Vec3 position = Vec3::Zero();
  Rotation orientation;
  RisGeometry ris;
  int code_column = 1;
  RisProfile profile;
};

struct Scenario {
  Vec3 tx = Vec3::Zero();
  std::vector<RxNode> rxs;
  std::vector<UserEquipment> ues;
  std::vector<Scatterer> scatterers;
  OfdmConfig ofdm;
  double wavelength = 0.01;
  NoiseConfig noise;
  std::uint64_t seed = 0;  // noise substreams derive from this

  int num_rx() const { return static_cast<int>(rxs.size()); }
  int num_ue() const { return static_cast<int>(ues.size()); }
  // Temporal codes for LOS + every UE, built from the UEs' DFT columns.
  ProfileSet profile_set() const;
  // UE n is 1-based; n = 0 is not a UE.
  const UserEquipment& ue(int n) const { return ues.at(static_cast<std::size_t>(n - 1)); }
};

// ue = 0 is the LOS path, ue = n >= 1 the reflection off UE n. rx is 0-based.
struct PathId {
  int ue = 0;
  int rx = 0;
};

struct RxSignalBlock {
  int rx_index = 0;
  Eigen::MatrixXcd samples;  // K x T, column t is OFDM symbol t
};

// d(tau)_k = exp(j 2 pi k delta_f tau), k = 0..K-1.
CVector delay_phasor(double tau, int K, double spacing_hz);

// Propagation delay plus the receiver's clock bias.
double path_delay(const PathId& path, const Scenario& s);

// Friis free-space gain with unit directivity; phase exp(-j 2 pi d / lambda).
cdouble los_gain(const Vec3& p0, const Vec3& pm, double wavelength);

// gamma_{n,0} * gamma_{n,m}; theta/phi are the elevation angles (UE frame) of
// the departure towards the Rx and the arrival from the Tx.
// Throws ShadowedPath when either side is illuminated from behind.
double nlos_gain(const Vec3& p0, const Vec3& x, const Vec3& pm, double theta_el, double phi_el,
                 double wavelength);

// a(theta)^T diag(constant) a(phi), evaluated row by row through the kernels.
cdouble ris_response(const AnglePair& departure, const AnglePair& arrival, const RisGeometry& g,
                     const CVector& constant);

// beta_{n,m}: alpha_{0,m} for the LOS path, otherwise gamma*gamma * a^T Omega_n a.
cdouble path_gain(const PathId& path, const Scenario& s);

// NLOS beta of a UE placed at `x` (its orientation and profile kept) towards Rx m.
cdouble nlos_path_gain(const Scenario& s, const UserEquipment& u, const Vec3& x, int rx);

// [alpha_{n,m}]_t for t = 0..T-1 (NLOS only).
CVector nlos_symbol_gains(const PathId& path, const Scenario& s);

// Tx -> scatterer -> Rx m contributions, constant over the T symbols.
Eigen::MatrixXcd scatterer_terms(const Scenario& s, int rx);

// Noise-free part of Y_m.
Eigen::MatrixXcd noiseless_observation(const Scenario& s, int rx);

// Y_m for every receiver. Noise for Rx m is drawn from a substream of (seed, m).
std::vector<RxSignalBlock> synthesize(const Scenario& s);

}  // namespace risloc
