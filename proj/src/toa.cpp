#include "risloc/toa.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "risloc/bounds.hpp"
#include "risloc/error.hpp"
#include "risloc/kernels.hpp"

namespace risloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvPhi = 0.6180339887498949;
constexpr int kGoldenIterations = 50;
constexpr int kNewtonIterations = 50;
constexpr double kDelayTolerance = 1e-15;
constexpr double kLeakageFloor = 1e-24;

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(int n) : data(fftw_alloc_complex(static_cast<std::size_t>(n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

double wrap(double tau, double window) { return tau - window * std::floor(tau / window); }

// Matched-filter output S(tau) = d(tau)^H r and its first two tau-derivatives.
struct Correlation {
  cdouble s, ds, d2s;
  double power() const { return std::norm(s); }
};

class Correlator {
 public:
  Correlator(std::span<const cdouble> r, double spacing_hz)
      : r_(r.begin(), r.end()), kr_(r.size()), k2r_(r.size()), spacing_(spacing_hz) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      kr_[k] = static_cast<double>(k) * r[k];
      k2r_[k] = static_cast<double>(k * k) * r[k];
    }
  }

  double power(double tau) const {
    const CVector d = delay_phasor(tau, static_cast<int>(r_.size()), spacing_);
    return std::norm(kernels::dotc(d, r_));
  }

  Correlation at(double tau) const {
    const CVector d = delay_phasor(tau, static_cast<int>(r_.size()), spacing_);
    const double w = kTwoPi * spacing_;
    return {kernels::dotc(d, r_), cdouble(0.0, -w) * kernels::dotc(d, kr_), -w * w * kernels::dotc(d, k2r_)};
  }

 private:
  CVector r_, kr_, k2r_;
  double spacing_;
};

struct Peak {
  double tau;
  double power;
};

Peak golden_section(const Correlator& c, double lo, double hi) {
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = c.power(x1), f2 = c.power(x2);
  for (int it = 0; it < kGoldenIterations && (b - a) > kDelayTolerance; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = c.power(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = c.power(x1);
    }
  }
  return f1 >= f2 ? Peak{x1, f1} : Peak{x2, f2};
}

// Newton on d|S|^2/dtau = 0, confined to [lo, hi]; never returns a lower power.
Peak newton_polish(const Correlator& c, Peak start, double lo, double hi) {
  Peak best = start;
  for (int it = 0; it < kNewtonIterations; ++it) {
    const Correlation v = c.at(best.tau);
    const double g1 = 2.0 * std::real(std::conj(v.s) * v.ds);
    const double g2 = 2.0 * (std::norm(v.ds) + std::real(std::conj(v.s) * v.d2s));
    if (!(g2 < 0.0)) break;
    const double next = std::clamp(best.tau - g1 / g2, lo, hi);
    const double step = std::abs(next - best.tau);
    const double p = c.power(next);
    if (p < best.power) break;
    best = {next, p};
    if (step < kDelayTolerance) break;
  }
  return best;
}

}  // namespace

struct DelayEstimator::Plan {
  fftw_plan plan = nullptr;
};

DelayEstimator::DelayEstimator(int subcarriers, int fft_size, double spacing_hz)
    : K_(subcarriers), F_(fft_size), spacing_(spacing_hz), plan_(std::make_unique<Plan>()) {
  if (K_ < 1) throw Error(ErrorKind::InvalidArgument, "need at least one subcarrier");
  if (F_ < K_) throw Error(ErrorKind::InvalidArgument, "FFT size must be at least K");
  if (!(spacing_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "subcarrier spacing must be positive");
  FftwBuffer in(F_), out(F_);
  std::lock_guard lock(planner_mutex());
  plan_->plan = fftw_plan_dft_1d(F_, in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
  if (!plan_->plan) throw Error(ErrorKind::InvalidArgument, "FFTW could not plan the transform");
}

DelayEstimator::~DelayEstimator() {
  if (plan_ && plan_->plan) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_->plan);
  }
}

double DelayEstimator::objective(std::span<const cdouble> r, double tau) const {
  return std::abs(kernels::dotc(delay_phasor(tau, static_cast<int>(r.size()), spacing_), r));
}

DelayEstimator::Result DelayEstimator::estimate(std::span<const cdouble> r) const {
  if (static_cast<int>(r.size()) != K_) throw Error(ErrorKind::InvalidArgument, "projected vector length != K");
  bool any = false;
  for (const cdouble& z : r) any = any || z != cdouble(0.0);
  if (!any) throw Error(ErrorKind::NoSignal, "projected vector is identically zero");

  FftwBuffer in(F_), out(F_);
  for (int k = 0; k < F_; ++k) {
    const cdouble z = k < K_ ? r[static_cast<std::size_t>(k)] : cdouble(0.0);
    in.data[k][0] = z.real();
    in.data[k][1] = z.imag();
  }
  fftw_execute_dft(plan_->plan, in.data, out.data);

  int peak = 0;
  double peak_power = -1.0;
  for (int k = 0; k < F_; ++k) {
    const double p = out.data[k][0] * out.data[k][0] + out.data[k][1] * out.data[k][1];
    if (p > peak_power) {
      peak_power = p;
      peak = k;
    }
  }

  const double bin = 1.0 / (F_ * spacing_);
  const double window = 1.0 / spacing_;
  const Correlator corr(r, spacing_);
  const double coarse = peak * bin;
  // tau' = k / (F df) - delta with delta in [0, bin], for k = peak and peak + 1
  const Peak coarse_peak{coarse, corr.power(coarse)};
  const Peak left = golden_section(corr, coarse - bin, coarse);
  const Peak right = golden_section(corr, coarse, coarse + bin);
  Peak best = coarse_peak;
  if (left.power > best.power) best = left;
  if (right.power > best.power) best = right;
  best = newton_polish(corr, best, coarse - bin, coarse + bin);

  Result res;
  res.tau = wrap(best.tau, window);
  if (res.tau >= window) res.tau = 0.0;
  res.coarse_tau = wrap(coarse, window);
  res.objective = std::sqrt(best.power);
  res.coarse_objective = std::sqrt(coarse_peak.power);
  return res;
}

ProjectedVector project(const RxSignalBlock& Y, std::span<const cdouble> code, int path_index) {
  const auto T = static_cast<std::size_t>(Y.samples.cols());
  const auto K = static_cast<std::size_t>(Y.samples.rows());
  if (code.size() != T) throw Error(ErrorKind::InvalidArgument, "code length does not match the symbol count");
  ProjectedVector out{Y.rx_index, path_index, CVector(K, cdouble(0.0))};
  const double inv_t = 1.0 / static_cast<double>(T);
  for (std::size_t t = 0; t < T; ++t) {
    kernels::axpy(std::conj(code[t]) * inv_t, std::span<const cdouble>(Y.samples.col(static_cast<Eigen::Index>(t)).data(), K),
                  out.r);
  }
  return out;
}

double estimate_toa(const ProjectedVector& r, int fft_size, double spacing_hz) {
  const DelayEstimator est(static_cast<int>(r.r.size()), fft_size, spacing_hz);
  return est.estimate(r.r).tau;
}

double estimate_beta_mag(const ProjectedVector& r, double tau, double symbol_energy, double spacing_hz) {
  if (!(symbol_energy > 0.0)) throw Error(ErrorKind::InvalidArgument, "symbol energy must be positive");
  const int K = static_cast<int>(r.r.size());
  if (K == 0) return 0.0;
  const cdouble corr = kernels::dotc(delay_phasor(tau, K, spacing_hz), r.r);
  return std::abs(corr) / (std::sqrt(symbol_energy) * K);
}

ToaGrid estimate_all(std::span<const RxSignalBlock> blocks, const ProfileSet& profiles, const OfdmConfig& ofdm,
                     double noise_variance) {
  ofdm.validate();
  const DelayEstimator est(ofdm.subcarriers, ofdm.fft_size, ofdm.spacing_hz);
  const int paths = profiles.num_ues() + 1;
  // expected |d(tau)^H w|^2 for noise alone: the matched-filter noise floor
  const double detection = kMissingPathFactor * ofdm.subcarriers * noise_variance / ofdm.symbols;
  ToaGrid grid(static_cast<std::size_t>(paths), std::vector<std::optional<ToaEstimate>>(blocks.size()));
  for (int n = 0; n < paths; ++n) {
    for (std::size_t m = 0; m < blocks.size(); ++m) {
      const RxSignalBlock& b = blocks[m];
      if (b.samples.rows() != ofdm.subcarriers || b.samples.cols() != ofdm.symbols) {
        throw Error(ErrorKind::InvalidArgument, "observation block does not match the OFDM config");
      }
      const ProjectedVector r = project(b, profiles.code(n), n);
      double energy = 0.0;
      for (const cdouble& z : r.r) energy += std::norm(z);
      // the relative floor catches code leakage at rounding level when there is no noise
      if (energy <= kLeakageFloor * b.samples.squaredNorm() / ofdm.symbols) continue;
      try {
        const DelayEstimator::Result res = est.estimate(r.r);
        if (res.objective * res.objective <= detection) continue;
        const double beta = estimate_beta_mag(r, res.tau, ofdm.symbol_energy, ofdm.spacing_hz);
        if (!(beta > 0.0)) continue;
        double crb = 0.0;
        if (noise_variance > 0.0) {
          crb = toa_crb({ofdm.subcarriers, ofdm.symbols, ofdm.symbol_energy, noise_variance, ofdm.spacing_hz, beta});
        }
        grid[static_cast<std::size_t>(n)][m] = ToaEstimate{res.tau, beta, crb};
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoSignal) throw;
      }
    }
  }
  return grid;
}

}  // namespace risloc
