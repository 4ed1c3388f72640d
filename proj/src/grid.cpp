#include "qbm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "qbm/physical_core.hpp"

namespace qbm {

double Grid::dp() const { return 2.0 * std::numbers::pi * hbar / L; }

std::vector<double> Grid::positions() const {
  std::vector<double> out(N);
  for (std::size_t j = 0; j < N; ++j) out[j] = x(j);
  return out;
}

std::vector<double> Grid::momenta() const {
  std::vector<double> out(N);
  for (std::size_t a = 0; a < N; ++a) out[a] = p(a);
  return out;
}

Grid make_grid(std::size_t N, double L, double hbar) {
  if (N < 16 || (N & (N - 1)) != 0) throw InvariantError("grid N ≥ 16 and power of two violated");
  if (!(L > 0)) throw InvariantError("grid L > 0 violated");
  if (!(hbar > 0)) throw InvariantError("ħ > 0 violated");
  return Grid{N, L, hbar};
}

BasisTransform::BasisTransform(const Grid& grid)
    : n_(grid.N),
      forward_(std::make_unique<detail::FftPlan>(static_cast<int>(grid.N), detail::FftPlan::Direction::forward)),
      backward_(std::make_unique<detail::FftPlan>(static_cast<int>(grid.N), detail::FftPlan::Direction::backward)) {}

BasisTransform::~BasisTransform() = default;

// With x_j = -L/2 + j dx and p_a = 2 pi hbar a'/L (a' = a - N/2) the phase is
// p_a x_j / hbar = 2 pi a' j / N - pi a', so U_aj = (-1)^{a'} e^{-2 pi i a' j/N} / sqrt(N):
// an FFT followed by an fftshift and an alternating sign.
void BasisTransform::columns_to_momentum(Eigen::MatrixXcd& m) const {
  const auto n = static_cast<Eigen::Index>(n_);
  const auto half = n / 2;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
#pragma omp parallel
  {
    std::vector<Complex> tmp(n_);
#pragma omp for schedule(static)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      Complex* col = m.col(c).data();
      forward_->execute(col);
      for (Eigen::Index a = 0; a < n; ++a) {
        const double sign = ((a - half) % 2 == 0) ? scale : -scale;
        tmp[static_cast<std::size_t>(a)] = sign * col[(a + half) % n];
      }
      std::copy(tmp.begin(), tmp.end(), col);
    }
  }
}

void BasisTransform::columns_to_position(Eigen::MatrixXcd& m) const {
  const auto n = static_cast<Eigen::Index>(n_);
  const auto half = n / 2;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
#pragma omp parallel
  {
    std::vector<Complex> tmp(n_);
#pragma omp for schedule(static)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      Complex* col = m.col(c).data();
      for (Eigen::Index a = 0; a < n; ++a) {
        const double sign = ((a - half) % 2 == 0) ? scale : -scale;
        tmp[static_cast<std::size_t>((a + half) % n)] = sign * col[a];
      }
      std::copy(tmp.begin(), tmp.end(), col);
      backward_->execute(col);
    }
  }
}

void BasisTransform::to_momentum(Eigen::MatrixXcd& m) const {
  columns_to_momentum(m);
  m.adjointInPlace();
  columns_to_momentum(m);
  m.adjointInPlace();
}

void BasisTransform::to_position(Eigen::MatrixXcd& m) const {
  columns_to_position(m);
  m.adjointInPlace();
  columns_to_position(m);
  m.adjointInPlace();
}

Eigen::MatrixXcd BasisTransform::matrix() const {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  columns_to_momentum(u);
  return u;
}

DensityMatrixState to_momentum(const DensityMatrixState& rho) {
  if (rho.rep == Representation::momentum) return rho;
  DensityMatrixState out = rho;
  BasisTransform(rho.grid).to_momentum(out.values);
  out.rep = Representation::momentum;
  return out;
}

DensityMatrixState to_position(const DensityMatrixState& rho) {
  if (rho.rep == Representation::position) return rho;
  DensityMatrixState out = rho;
  BasisTransform(rho.grid).to_position(out.values);
  out.rep = Representation::position;
  return out;
}

DensityMatrixState gaussian_state(const Grid& grid, double x0, double p0, double sigma_x) {
  if (!(sigma_x > 0)) throw InvariantError("σ_x > 0 violated");
  const auto n = static_cast<Eigen::Index>(grid.N);
  Eigen::VectorXcd psi(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = grid.x(static_cast<std::size_t>(j));
    const double env = std::exp(-(x - x0) * (x - x0) / (4.0 * sigma_x * sigma_x));
    const double phase = p0 * x / grid.hbar;
    psi(j) = env * Complex(std::cos(phase), std::sin(phase));
  }
  psi /= psi.norm();
  return {psi * psi.adjoint(), Representation::position, grid};
}

double trace_of(const DensityMatrixState& rho) { return rho.values.trace().real(); }

double hermiticity_error(const Eigen::MatrixXcd& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

double min_eigenvalue(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void make_hermitian(Eigen::MatrixXcd& m) {
  const Eigen::MatrixXcd adj = m.adjoint();
  m = 0.5 * (m + adj);
}

}  // namespace qbm
