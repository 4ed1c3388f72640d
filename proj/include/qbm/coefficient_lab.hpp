#pragma once

// Effective position-diffusion coefficients from single-collision overlaps,
// and a side-by-side table of the competing D_x predictions.

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "qbm/collision_engine.hpp"
#include "qbm/grid.hpp"
#include "qbm/physical_core.hpp"

namespace qbm {

struct DxFit {
  double d_x = 0.0;
  double fit_error = 0.0;   ///< largest relative residual of the used points, times d_x
  double curvature = 0.0;   ///< c in -ln|D(dp)| = c dp^2
  std::size_t points = 0;   ///< separations kept in the fit
};

/// Raised when no separation survives the quadratic-model gate (packet so
/// narrow that single collisions already erase all coherence).
class FitRegionEmpty : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// -ln|decoherence_factor| at dp = j * grid.dp(), j = 1..8, fitted by c dp^2
/// through the origin. Points with |D| < 1e-12 are dropped; the largest
/// separations are dropped until every kept point is within 5% of the
/// model. D_x = c * hbar^2 * collision_rate.
DxFit extract_Dx_from_collisions(const MoleculePacket& psi, double M, double m, double collision_rate, const Grid& grid);

/// Molecule lattice fine enough to resolve the smallest branch shift of the
/// grid (20 points per shift) with 2048 points. Used for the plane-wave limit.
MomentumLattice plane_wave_lattice(const Grid& grid, double M, double m);

/// Narrowest packet width the scan uses on `lattice` (two lattice spacings).
double narrowest_width(const MomentumLattice& lattice);

struct ScanRow {
  double width = 0.0;
  double d_x = 0.0;
  double fit_error = 0.0;
  std::size_t points = 0;
  double smallest_overlap = 1.0;  ///< |D| at the smallest nonzero grid separation
  bool collapsed = false;         ///< fit region empty

  bool operator==(const ScanRow&) const = default;
};

/// Gaussian packets of the given widths on `lattice`, one fit per width.
/// Widths are processed in parallel.
std::vector<ScanRow> cmd_divergence_scan(const std::vector<double>& widths, const MomentumLattice& lattice, double M,
                                         double m, double collision_rate, const Grid& grid);

/// Widths narrowest * 2^i, i = 0..count-1, ordered widest first.
std::vector<double> halving_widths(double narrowest, std::size_t count);

/// (1/3) (tau^2 / M) D_p
double finite_tau_Dx(double tau, double M, double D_p);

struct DxReport {
  double d_x_gkls_min = 0.0;
  double d_x_msqr_fit = 0.0;
  double d_x_msqr_fit_error = 0.0;
  double d_x_finite_tau = 0.0;
  double tau = 0.0;
  std::string tau_source;            ///< which intercollision time was used
  double collision_rate = 0.0;
  std::optional<double> crossover_tau;  ///< tau where finite-tau D_x meets the bound
  PhysicalParams params;
  std::vector<ScanRow> divergence_scan;

  bool operator==(const DxReport&) const = default;
};

/// tau at which finite_tau_Dx equals gkls_min_Dx, by bisection.
double crossover_tau(const PhysicalParams& params);

DxReport compare_dx_models(const PhysicalParams& params, double tau, const std::string& tau_source,
                           const MoleculePacket& psi, double collision_rate, const Grid& grid,
                           const std::vector<double>& scan_widths, const MomentumLattice& scan_lattice);

nlohmann::json to_json(const DxReport& report);
DxReport dx_report_from_json(const nlohmann::json& j);

}  // namespace qbm
