#pragma once

#include <cstdint>
#include <vector>

#include "risloc/geometry.hpp"

namespace risloc {

// Column `n` of the T x T DFT matrix, [F]_{t,n} = exp(-2j*pi*t*n/T).
// Throws CapacityExceeded unless 0 <= n < T.
CVector dft_sequence(int n, int T);

// W unit-modulus entries with phases uniform on [0, 2pi), deterministic in seed.
CVector random_constant_profile(int W, std::uint64_t seed);

// Phase profile of one RIS: diag(constant) scaled by temporal[t] at symbol t.
struct RisProfile {
  CVector constant;
  CVector temporal;
  int ue_index = 1;
};

RisProfile make_profile(int ue_index, int code_column, int T, int W, std::uint64_t seed);

// Omega_n[t] diagonal, i.e. temporal[t] * constant. Throws OutOfRange for bad t.
CVector profile_at(const RisProfile& p, int t);

// Temporal codes for the LOS reference (index 0, all ones) and every UE.
class ProfileSet {
 public:
  // columns[n - 1] is the DFT column of UE n. Columns must be distinct, in
  // [1, T), and there must be fewer UEs than symbols.
  ProfileSet(int T, std::vector<int> columns);
  // UE n gets DFT column n.
  static ProfileSet sequential(int num_ues, int T);

  int symbols() const { return T_; }
  int num_ues() const { return static_cast<int>(codes_.size()) - 1; }
  // n = 0 is the LOS code.
  const CVector& code(int n) const { return codes_.at(static_cast<std::size_t>(n)); }
  int column(int n) const { return columns_.at(static_cast<std::size_t>(n)); }

 private:
  int T_;
  std::vector<int> columns_;
  std::vector<CVector> codes_;
};

}  // namespace risloc
