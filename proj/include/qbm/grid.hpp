#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace qbm {

using Complex = std::complex<double>;

namespace detail {
class FftPlan;
}

/// Uniform periodic position lattice x_j = -L/2 + j*dx with the matched
/// momentum lattice p_a = 2*pi*hbar*(a - N/2)/L, a = 0..N-1.
struct Grid {
  std::size_t N = 128;
  double L = 40.0;
  double hbar = 1.0;

  double dx() const { return L / static_cast<double>(N); }
  double dp() const;
  double x(std::size_t j) const { return -0.5 * L + static_cast<double>(j) * dx(); }
  double p(std::size_t a) const { return (static_cast<double>(a) - static_cast<double>(N / 2)) * dp(); }
  double p_max() const { return static_cast<double>(N / 2) * dp(); }
  std::vector<double> positions() const;
  std::vector<double> momenta() const;

  bool operator==(const Grid&) const = default;
};

/// Throws InvariantError unless N >= 16 is a power of two and L, hbar > 0.
Grid make_grid(std::size_t N, double L, double hbar = 1.0);

enum class Representation { position, momentum };

/// N x N density matrix on a grid, normalized so that trace = sum of diagonal = 1.
struct DensityMatrixState {
  Eigen::MatrixXcd values;
  Representation rep = Representation::position;
  Grid grid;
};

/// Unitary change of basis between the position and momentum lattices,
/// U_aj = exp(-i p_a x_j / hbar) / sqrt(N), applied with FFTs column by column.
/// Columns are transformed in parallel with OpenMP.
class BasisTransform {
 public:
  explicit BasisTransform(const Grid& grid);
  ~BasisTransform();
  BasisTransform(const BasisTransform&) = delete;
  BasisTransform& operator=(const BasisTransform&) = delete;

  /// psi(x) -> psi(p) for every column.
  void columns_to_momentum(Eigen::MatrixXcd& m) const;
  /// psi(p) -> psi(x) for every column.
  void columns_to_position(Eigen::MatrixXcd& m) const;
  /// rho -> U rho U^dagger
  void to_momentum(Eigen::MatrixXcd& m) const;
  /// rho -> U^dagger rho U
  void to_position(Eigen::MatrixXcd& m) const;

  /// Dense U, for reference computations.
  Eigen::MatrixXcd matrix() const;

 private:
  std::size_t n_;
  std::unique_ptr<detail::FftPlan> forward_;
  std::unique_ptr<detail::FftPlan> backward_;
};

DensityMatrixState to_momentum(const DensityMatrixState& rho);
DensityMatrixState to_position(const DensityMatrixState& rho);

/// Pure Gaussian packet |psi><psi| in the position representation with
/// position standard deviation sigma_x, centred at x0 with mean momentum p0.
DensityMatrixState gaussian_state(const Grid& grid, double x0, double p0, double sigma_x);

double trace_of(const DensityMatrixState& rho);
/// max |rho - rho^dagger|
double hermiticity_error(const Eigen::MatrixXcd& m);
double min_eigenvalue(const Eigen::MatrixXcd& m);
void make_hermitian(Eigen::MatrixXcd& m);

}  // namespace qbm
