#include <algorithm>
#include <cmath>
#include <limits>

#include "qbm/generator.hpp"
#include "qbm/physical_core.hpp"

namespace qbm {

SpectralGenerator::SpectralGenerator(const Grid& grid, const GeneratorSpec& spec)
    : grid_(grid), spec_(spec), basis_(std::make_unique<BasisTransform>(grid)) {
  validate(spec_);
  const auto n = static_cast<Eigen::Index>(grid.N);
  x_.resize(n);
  p_.resize(n);
  potential_ = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    x_(j) = grid.x(static_cast<std::size_t>(j));
    p_(j) = grid.p(static_cast<std::size_t>(j));
    if (spec_.potential == Potential::harmonic) potential_(j) = 0.5 * spec_.M * spec_.omega * spec_.omega * x_(j) * x_(j);
  }
}

SpectralGenerator::~SpectralGenerator() = default;
SpectralGenerator::SpectralGenerator(SpectralGenerator&&) noexcept = default;
SpectralGenerator& SpectralGenerator::operator=(SpectralGenerator&&) noexcept = default;

double SpectralGenerator::max_energy() const {
  const double kinetic = grid_.p_max() * grid_.p_max() / (2.0 * spec_.M);
  return kinetic + potential_.cwiseAbs().maxCoeff();
}

double SpectralGenerator::suggested_dt() const {
  if (spec_.suppress_hamiltonian) return std::numeric_limits<double>::infinity();
  return 0.1 * grid_.hbar / max_energy();
}

void SpectralGenerator::apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
  const auto n = static_cast<Eigen::Index>(grid_.N);
  const double hbar = grid_.hbar;
  const double h2 = hbar * hbar;
  const bool hamiltonian = !spec_.suppress_hamiltonian;

  double position_diffusion = 0.0;  // coefficient of (x - x')^2
  double momentum_diffusion = 0.0;  // coefficient of (p - p')^2
  double friction = 0.0;
  if (spec_.kind == GeneratorKind::jz) position_diffusion = spec_.lambda;
  if (spec_.kind == GeneratorKind::qfpe) {
    position_diffusion = spec_.D_p / h2;
    momentum_diffusion = spec_.D_x / h2;
    friction = spec_.eta / (2.0 * hbar);
  }
  const bool with_potential = hamiltonian && spec_.potential == Potential::harmonic;

  out.resize(n, n);
  const double* x = x_.data();
  const double* v = potential_.data();
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = x[j] - x[k];
      Complex rate(-position_diffusion * d * d, with_potential ? -(v[j] - v[k]) / hbar : 0.0);
      out(j, k) = rate * rho(j, k);
    }
  }

  const bool kinetic = hamiltonian;
  if (!kinetic && momentum_diffusion == 0.0 && friction == 0.0) return;

  Eigen::MatrixXcd rho_p = rho;
  basis_->to_momentum(rho_p);
  Eigen::MatrixXcd anti;
  if (friction != 0.0) anti.resize(n, n);
  const double* p = p_.data();
  const double inv_2m = 1.0 / (2.0 * spec_.M);
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a < n; ++a) {
      const double dp = p[a] - p[b];
      const double de = kinetic ? (p[a] * p[a] - p[b] * p[b]) * inv_2m / hbar : 0.0;
      const Complex value = rho_p(a, b);
      if (friction != 0.0) anti(a, b) = (p[a] + p[b]) * value;
      rho_p(a, b) = Complex(-momentum_diffusion * dp * dp, -de) * value;
    }
  }
  basis_->to_position(rho_p);
  out += rho_p;

  if (friction != 0.0) {
    basis_->to_position(anti);
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index j = 0; j < n; ++j) {
        // -i (eta / 2 hbar) [X, {P, rho}]
        out(j, k) += Complex(0.0, -friction * (x[j] - x[k])) * anti(j, k);
      }
    }
  }
}

Eigen::MatrixXcd SpectralGenerator::apply(const Eigen::MatrixXcd& rho) const {
  Eigen::MatrixXcd out;
  apply(rho, out);
  return out;
}

DensityMatrixState generator_apply(const DensityMatrixState& rho, const GeneratorSpec& spec) {
  if (rho.rep != Representation::position)
    throw InvariantError("generator_apply requires the position representation (representation mismatch)");
  const SpectralGenerator gen(rho.grid, spec);
  return {gen.apply(rho.values), Representation::position, rho.grid};
}

}  // namespace qbm
