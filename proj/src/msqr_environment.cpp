#include "qbm/msqr_environment.hpp"

#include <cmath>
#include <stdexcept>

#include "qbm/physical_core.hpp"

namespace qbm {

std::string to_string(ThermalConvention c) { return c == ThermalConvention::half_variance ? "half-variance" : "standard"; }

ThermalConvention thermal_convention_from_string(const std::string& name) {
  if (name == "half-variance") return ThermalConvention::half_variance;
  if (name == "standard") return ThermalConvention::standard;
  throw std::invalid_argument("unknown thermal_variance_convention '" + name + "' (expected half-variance|standard)");
}

double ThermalSpec::momentum_variance() const {
  const double mkt = m * k_B * T;
  return convention == ThermalConvention::half_variance ? 0.5 * mkt : mkt;
}

namespace {

void validate_spec(const ThermalSpec& spec) {
  if (!(spec.m > 0)) throw InvariantError("m > 0 violated");
  if (!(spec.T > 0)) throw InvariantError("T > 0 violated");
  if (!(spec.k_B > 0) || !(spec.hbar > 0)) throw InvariantError("k_B > 0 and ħ > 0 violated");
}

}  // namespace

MomentumLattice default_thermal_lattice(const ThermalSpec& spec, std::size_t points, double half_span_sd) {
  validate_spec(spec);
  const double sd = std::sqrt(spec.momentum_variance());
  return {points, 2.0 * half_span_sd * sd / static_cast<double>(points)};
}

EnvState thermal_distribution(const ThermalSpec& spec, const MomentumLattice& lattice) {
  validate_spec(spec);
  const double var = spec.momentum_variance();
  const double sd = std::sqrt(var);
  if (lattice.k_min() > -6.0 * sd || lattice.k_max() < 6.0 * sd)
    throw InvariantError("lattice span ≥ 6 standard deviations violated");

  EnvState env{lattice, std::vector<double>(lattice.n), std::nullopt, EnvForm::diagonal};
  double sum = 0.0;
  for (std::size_t j = 0; j < lattice.n; ++j) {
    const double k = lattice.k(j);
    env.weights[j] = std::exp(-k * k / (2.0 * var));
    sum += env.weights[j];
  }
  for (auto& w : env.weights) w /= sum * lattice.dk;
  return env;
}

EnvState msqr_density_matrix(const EnvState& env) {
  if (env.form != EnvForm::diagonal) throw InvariantError("msqr_density_matrix requires a diagonal EnvState");
  const auto n = static_cast<Eigen::Index>(env.lattice.n);
  Eigen::VectorXd root(n);
  for (Eigen::Index j = 0; j < n; ++j) root(j) = std::sqrt(env.weights[static_cast<std::size_t>(j)]);
  EnvState out = env;
  out.kernel = root * root.transpose();
  out.form = EnvForm::msqr;
  return out;
}

double purity(const EnvState& env) {
  if (!env.kernel) throw InvariantError("purity requires the msqr form");
  const double dk = env.lattice.dk;
  return env.kernel->squaredNorm() * dk * dk;
}

MoleculePacket msqr_wave_packet(const ThermalSpec& spec, const MomentumLattice& lattice) {
  const EnvState env = thermal_distribution(spec, lattice);
  MoleculePacket psi{lattice, std::vector<Complex>(lattice.n)};
  for (std::size_t j = 0; j < lattice.n; ++j) psi.amplitudes[j] = std::sqrt(env.weights[j]);
  return psi;
}

}  // namespace qbm
