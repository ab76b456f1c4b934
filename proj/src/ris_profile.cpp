#include "risloc/ris_profile.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "risloc/error.hpp"
#include "risloc/random.hpp"

namespace risloc {

CVector dft_sequence(int n, int T) {
  if (T < 1) throw Error(ErrorKind::InvalidArgument, "symbol count must be positive");
  if (n < 0 || n >= T) {
    throw Error(ErrorKind::CapacityExceeded,
                "DFT column " + std::to_string(n) + " does not exist for T = " + std::to_string(T));
  }
  CVector out(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    // reduce t*n mod T first so the phase argument stays small
    const long long idx = (static_cast<long long>(t) * n) % T;
    out[static_cast<std::size_t>(t)] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(idx) / T);
  }
  return out;
}

CVector random_constant_profile(int W, std::uint64_t seed) {
  if (W < 1) throw Error(ErrorKind::InvalidArgument, "RIS must have at least one element");
  Rng rng(seed);
  CVector out(static_cast<std::size_t>(W));
  for (cdouble& z : out) z = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
  return out;
}

RisProfile make_profile(int ue_index, int code_column, int T, int W, std::uint64_t seed) {
  if (code_column == 0) throw Error(ErrorKind::InvalidArgument, "DFT column 0 is reserved for the LOS path");
  return {random_constant_profile(W, seed), dft_sequence(code_column, T), ue_index};
}

CVector profile_at(const RisProfile& p, int t) {
  if (t < 0 || static_cast<std::size_t>(t) >= p.temporal.size()) {
    throw Error(ErrorKind::OutOfRange, "symbol index " + std::to_string(t));
  }
  const cdouble s = p.temporal[static_cast<std::size_t>(t)];
  CVector out(p.constant.size());
  std::transform(p.constant.begin(), p.constant.end(), out.begin(), [s](cdouble z) { return s * z; });
  return out;
}

ProfileSet::ProfileSet(int T, std::vector<int> columns) : T_(T) {
  const int N = static_cast<int>(columns.size());
  if (N >= T) {
    throw Error(ErrorKind::CapacityExceeded,
                std::to_string(N) + " UEs need more than T = " + std::to_string(T) + " symbols");
  }
  std::vector<int> sorted = columns;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::InvalidArgument, "two UEs share a DFT column");
  }
  columns_.reserve(columns.size() + 1);
  columns_.push_back(0);
  codes_.push_back(dft_sequence(0, T));
  for (int c : columns) {
    if (c == 0) throw Error(ErrorKind::InvalidArgument, "DFT column 0 is reserved for the LOS path");
    codes_.push_back(dft_sequence(c, T));
    columns_.push_back(c);
  }
}

ProfileSet ProfileSet::sequential(int num_ues, int T) {
  std::vector<int> cols(static_cast<std::size_t>(std::max(num_ues, 0)));
  for (int n = 0; n < num_ues; ++n) cols[static_cast<std::size_t>(n)] = n + 1;
  return ProfileSet(T, std::move(cols));
}

}  // namespace risloc
