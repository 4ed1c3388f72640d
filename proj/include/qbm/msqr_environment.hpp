#pragma once

// Thermal ideal-gas molecule states: the diagonal momentum distribution, its
// square-root (rank-one) regularization, and the equivalent standing Gaussian
// wave packet.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "qbm/collision_engine.hpp"
#include "qbm/momentum_lattice.hpp"

namespace qbm {

/// `half-variance`: rho(k) ~ exp(-k^2 / (m k_B T)), variance m k_B T / 2.
/// `standard`: Maxwell-Boltzmann rho(k) ~ exp(-k^2 / (2 m k_B T)), variance m k_B T.
enum class ThermalConvention { half_variance, standard };

std::string to_string(ThermalConvention c);
ThermalConvention thermal_convention_from_string(const std::string& name);

struct ThermalSpec {
  double m = 1.0;
  double T = 1.0;
  double k_B = 1.0;
  double hbar = 1.0;
  ThermalConvention convention = ThermalConvention::half_variance;

  /// Variance of the molecule momentum distribution under the chosen convention.
  double momentum_variance() const;
};

enum class EnvForm { diagonal, msqr };

struct EnvState {
  MomentumLattice lattice;
  std::vector<double> weights;  ///< rho(k_j), sum * dk = 1
  std::optional<Eigen::MatrixXd> kernel;  ///< rho(k, k') for the msqr form
  EnvForm form = EnvForm::diagonal;
};

/// Default lattice: 512 points spanning +-8 standard deviations.
MomentumLattice default_thermal_lattice(const ThermalSpec& spec, std::size_t points = 512, double half_span_sd = 8.0);

/// Normalized thermal distribution. Throws InvariantError unless the lattice
/// reaches at least 6 standard deviations on both sides of zero.
EnvState thermal_distribution(const ThermalSpec& spec, const MomentumLattice& lattice);

/// rho(k, k') = sqrt(rho(k)) sqrt(rho(k')).
EnvState msqr_density_matrix(const EnvState& env);

/// Purity of the msqr form, sum |rho(k,k')|^2 dk^2.
double purity(const EnvState& env);

/// psi(k) ~ exp(-k^2 / (4 variance)) so that |psi|^2 is the thermal distribution.
MoleculePacket msqr_wave_packet(const ThermalSpec& spec, const MomentumLattice& lattice);

}  // namespace qbm
