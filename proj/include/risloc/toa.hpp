#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "risloc/channel.hpp"
#include "risloc/ris_profile.hpp"

namespace risloc {

struct ProjectedVector {
  int rx_index = 0;
  int path_index = 0;
  CVector r;  // length K
};

struct ToaEstimate {
  double tau = 0.0;       // seconds, in [0, 1/delta f)
  double beta_mag = 0.0;  // |beta| estimate
  double crb_var = 0.0;   // seconds^2, from the estimated |beta|
};

// r = (1/T) Y conj(code). Throws InvalidArgument on a length mismatch.
ProjectedVector project(const RxSignalBlock& Y, std::span<const cdouble> code, int path_index = 0);

// Coarse F-point FFT peak search followed by a scalar refinement of the
// fractional delay. Holds an FFTW plan; estimate() is safe to call
// concurrently on one instance.
class DelayEstimator {
 public:
  DelayEstimator(int subcarriers, int fft_size, double spacing_hz);
  ~DelayEstimator();
  DelayEstimator(const DelayEstimator&) = delete;
  DelayEstimator& operator=(const DelayEstimator&) = delete;

  struct Result {
    double tau = 0.0;              // refined delay in [0, 1/delta f)
    double coarse_tau = 0.0;       // FFT grid delay
    double objective = 0.0;        // |d(tau)^H r| at the refined delay
    double coarse_objective = 0.0; // |b_k| at the FFT peak
  };

  // Throws NoSignal for an all-zero r.
  Result estimate(std::span<const cdouble> r) const;

  // |sum_k r_k exp(-j 2 pi k delta_f tau)|, the matched-filter magnitude.
  double objective(std::span<const cdouble> r, double tau) const;

  int subcarriers() const { return K_; }
  int fft_size() const { return F_; }
  double spacing_hz() const { return spacing_; }

 private:
  struct Plan;
  int K_;
  int F_;
  double spacing_;
  std::unique_ptr<Plan> plan_;
};

double estimate_toa(const ProjectedVector& r, int fft_size, double spacing_hz);

// |d(tau)^H r| / (sqrt(E_s) K), the conjugated matched-filter reading.
double estimate_beta_mag(const ProjectedVector& r, double tau, double symbol_energy, double spacing_hz);

// (N+1) x M grid, grid[n][m]; empty entries are missing paths.
using ToaGrid = std::vector<std::vector<std::optional<ToaEstimate>>>;

// A path is missing when its matched-filter peak power |d(tau)^H r|^2 is at most
// this multiple of the noise-only expectation K N0 / T.
inline constexpr double kMissingPathFactor = 6.0;

ToaGrid estimate_all(std::span<const RxSignalBlock> blocks, const ProfileSet& profiles, const OfdmConfig& ofdm,
                     double noise_variance);

}  // namespace risloc
