#include "qbm/momentum_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"

namespace qbm {

std::vector<double> MomentumLattice::points() const {
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = k(j);
  return out;
}

std::vector<Complex> shifted_samples(std::span<const Complex> values, double dk, double shift) {
  const auto n = values.size();
  if (n == 0) return {};
  std::vector<Complex> work(values.begin(), values.end());
  if (shift == 0.0) return work;

  const detail::FftPlan fwd(static_cast<int>(n), detail::FftPlan::Direction::forward);
  const detail::FftPlan bwd(static_cast<int>(n), detail::FftPlan::Direction::backward);
  fwd.execute(work.data());

  const double frac = shift / dk;  // shift in lattice units
  const auto half = static_cast<long>(n / 2);
  for (std::size_t q = 0; q < n; ++q) {
    long signed_q = static_cast<long>(q);
    if (signed_q > half) signed_q -= static_cast<long>(n);
    if (n % 2 == 0 && signed_q == half) {
      // Nyquist mode: symmetric split keeps real input real.
      work[q] *= std::cos(std::numbers::pi * frac);
      continue;
    }
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(signed_q) * frac / static_cast<double>(n);
    work[q] *= Complex(std::cos(phase), std::sin(phase));
  }
  bwd.execute(work.data());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& v : work) v *= inv_n;
  return work;
}

Support support_of(std::span<const Complex> values, double rel_threshold) {
  if (values.empty()) throw std::invalid_argument("support_of: empty sample set");
  double peak = 0.0;
  for (const auto& v : values) peak = std::max(peak, std::norm(v));
  const double cut = rel_threshold * peak;
  Support s{values.size(), 0};
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (std::norm(values[j]) >= cut) {
      s.first = std::min(s.first, j);
      s.last = std::max(s.last, j);
    }
  }
  return s;
}

}  // namespace qbm
