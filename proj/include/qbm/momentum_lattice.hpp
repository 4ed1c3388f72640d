#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qbm {

using Complex = std::complex<double>;

/// Uniform momentum lattice k_j = (j - n/2) * dk, j = 0..n-1, centred on zero.
struct MomentumLattice {
  std::size_t n = 512;
  double dk = 1.0 / 32.0;

  double k(std::size_t j) const { return (static_cast<double>(j) - static_cast<double>(n / 2)) * dk; }
  double k_min() const { return k(0); }
  double k_max() const { return k(n - 1); }
  std::vector<double> points() const;
};

/// Values f(k_j + shift) of the band-limited interpolant of the samples f(k_j).
/// Spectrally accurate for smooth samples that decay towards the lattice edges.
std::vector<Complex> shifted_samples(std::span<const Complex> values, double dk, double shift);

/// Index range [first, last] where |f|^2 >= rel_threshold * max|f|^2.
struct Support {
  std::size_t first = 0;
  std::size_t last = 0;
};
Support support_of(std::span<const Complex> values, double rel_threshold = 1e-12);

}  // namespace qbm
