#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

/// Thrown when an input violates a documented invariant. The message names
/// the violated invariant, e.g. "M >= m violated".
class InvariantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameters of a heavy dust particle (mass M) in an ideal gas of molecules
/// (mass m) at temperature T. Defaults are the natural desk-scale units
/// hbar = k_B = m = k_B T = 1.
struct PhysicalParams {
  double M = 100.0;     ///< dust mass
  double m = 1.0;       ///< molecule mass
  double T = 1.0;       ///< gas temperature
  double eta = 0.1;     ///< friction rate
  double hbar = 1.0;
  double k_B = 1.0;
  double D_p = 10.0;    ///< momentum diffusion
  double D_x = 2.5e-4;  ///< position diffusion

  bool operator==(const PhysicalParams&) const = default;
};

/// Returns `raw` unchanged if every invariant holds, throws InvariantError otherwise.
PhysicalParams validate_params(const PhysicalParams& raw);

/// Joos-Zeh localization rate (1/hbar^2) * flux * k^2 * sigma_eff.
double jz_localization_rate(double flux, double k, double sigma_eff, double hbar);

/// D_p = hbar^2 * Lambda.
double lambda_to_Dp(double lambda, double hbar);
/// Lambda = D_p / hbar^2.
double Dp_to_lambda(double D_p, double hbar);

/// D_p = eta * M * k_B * T.
double fluctuation_dissipation_Dp(const PhysicalParams& params);

/// Smallest position diffusion admitted by the positivity bound,
/// hbar^2 eta^2 / (4 D_p). Throws if D_p = 0 while eta > 0.
double gkls_min_Dx(const PhysicalParams& params);

struct GklsReport {
  double d_x_min = 0.0;
  double d_x_actual = 0.0;
  bool satisfied = false;
  double margin = 0.0;  ///< d_x_actual - d_x_min
};

GklsReport check_gkls(const PhysicalParams& params);

}  // namespace qbm
