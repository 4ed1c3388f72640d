#pragma once

// Right-hand sides of the positional-decoherence (JZ) master equation and the
// quantum Fokker-Planck equation on a Grid.
//
// Two implementations are kept side by side:
//   reference::generator_apply  serial, literal operator algebra with dense X, P, H
//   SpectralGenerator           OpenMP, element-wise kernels in the position and
//                               momentum representations joined by FFT basis changes
// The reference route exists for testing and benchmarking; propagation uses the
// spectral one.

#include <memory>
#include <string>

#include "qbm/grid.hpp"

namespace qbm {

enum class GeneratorKind { unitary, jz, qfpe };
enum class Potential { free, harmonic };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::jz;
  double lambda = 0.0;  ///< JZ localization rate
  double D_p = 0.0;
  double eta = 0.0;
  double D_x = 0.0;
  double M = 1.0;  ///< dust mass in H = P^2/2M (+ M omega^2 X^2 / 2)
  Potential potential = Potential::free;
  double omega = 0.0;
  /// Drop -i/hbar [H, rho]: the pure-dephasing (infinite mass) limit.
  bool suppress_hamiltonian = false;
};

void validate(const GeneratorSpec& spec);
std::string to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(const std::string& name);

/// Dense position-representation operators. X is diagonal, P = U^dagger diag(p) U.
struct Operators {
  Eigen::MatrixXcd X;
  Eigen::MatrixXcd P;
  Eigen::MatrixXcd H;
};

Operators build_operators(const Grid& grid, double M, Potential potential = Potential::free, double omega = 0.0);

namespace reference {

/// Literal commutator form of the generator, serial dense matrix products.
Eigen::MatrixXcd generator_apply(const Eigen::MatrixXcd& rho, const GeneratorSpec& spec, const Operators& ops,
                                 double hbar);

}  // namespace reference

class SpectralGenerator {
 public:
  SpectralGenerator(const Grid& grid, const GeneratorSpec& spec);
  ~SpectralGenerator();
  SpectralGenerator(SpectralGenerator&&) noexcept;
  SpectralGenerator& operator=(SpectralGenerator&&) noexcept;

  /// out = L[rho], both in the position representation.
  void apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;

  const Grid& grid() const { return grid_; }
  const GeneratorSpec& spec() const { return spec_; }

  /// Largest |eigenvalue| of the kinetic plus potential energy on this grid.
  double max_energy() const;
  /// Documented step heuristic dt <= 0.1 hbar / max|H|; unbounded when H is suppressed.
  double suggested_dt() const;

 private:
  Grid grid_;
  GeneratorSpec spec_;
  std::unique_ptr<BasisTransform> basis_;
  Eigen::VectorXd x_;
  Eigen::VectorXd p_;
  Eigen::VectorXd potential_;
};

/// dρ/dt for a position-representation state. Throws InvariantError for a
/// momentum-representation input.
DensityMatrixState generator_apply(const DensityMatrixState& rho, const GeneratorSpec& spec);

}  // namespace qbm
