#include "qbm/physical_core.hpp"

#include <cmath>

namespace qbm {

namespace {

void require(bool ok, const char* invariant) {
  if (!ok) throw InvariantError(std::string(invariant) + " violated");
}

}  // namespace

PhysicalParams validate_params(const PhysicalParams& raw) {
  // NaN fails every comparison below, so it is rejected by the first check it meets.
  require(raw.M > 0, "M > 0");
  require(raw.m > 0, "m > 0");
  require(raw.M >= raw.m, "M ≥ m");
  require(raw.T >= 0, "T ≥ 0");
  require(raw.eta >= 0, "η ≥ 0");
  require(raw.hbar > 0, "ħ > 0");
  require(raw.k_B > 0, "k_B > 0");
  require(raw.D_p >= 0, "D_p ≥ 0");
  require(raw.D_x >= 0, "D_x ≥ 0");
  require(std::isfinite(raw.M) && std::isfinite(raw.T) && std::isfinite(raw.eta) &&
              std::isfinite(raw.hbar) && std::isfinite(raw.k_B) && std::isfinite(raw.D_p) &&
              std::isfinite(raw.D_x),
          "finite parameters");
  return raw;
}

double jz_localization_rate(double flux, double k, double sigma_eff, double hbar) {
  require(flux >= 0, "flux ≥ 0");
  require(k >= 0, "k ≥ 0");
  require(sigma_eff >= 0, "σ_eff ≥ 0");
  require(hbar > 0, "ħ > 0");
  return flux * k * k * sigma_eff / (hbar * hbar);
}

double lambda_to_Dp(double lambda, double hbar) {
  require(lambda >= 0, "Λ ≥ 0");
  require(hbar > 0, "ħ > 0");
  return hbar * hbar * lambda;
}

double Dp_to_lambda(double D_p, double hbar) {
  require(D_p >= 0, "D_p ≥ 0");
  require(hbar > 0, "ħ > 0");
  return D_p / (hbar * hbar);
}

double fluctuation_dissipation_Dp(const PhysicalParams& params) {
  return params.eta * params.M * params.k_B * params.T;
}

double gkls_min_Dx(const PhysicalParams& params) {
  if (params.eta == 0.0) return 0.0;
  if (params.D_p <= 0.0) throw InvariantError("D_p > 0 violated (bound diverges for η > 0)");
  return params.hbar * params.hbar * params.eta * params.eta / (4.0 * params.D_p);
}

GklsReport check_gkls(const PhysicalParams& params) {
  GklsReport report;
  report.d_x_min = gkls_min_Dx(params);
  report.d_x_actual = params.D_x;
  report.margin = report.d_x_actual - report.d_x_min;
  report.satisfied = report.margin >= 0.0;
  return report;
}

}  // namespace qbm
