#include "qbm/coefficient_lab.hpp"

#include <algorithm>
#include <cmath>

namespace qbm {

namespace {

constexpr std::size_t kFitSeparations = 8;
constexpr double kOverlapFloor = 1e-12;
constexpr double kResidualGate = 0.05;

}  // namespace

DxFit extract_Dx_from_collisions(const MoleculePacket& psi, double M, double m, double collision_rate,
                                 const Grid& grid) {
  if (!(collision_rate >= 0)) throw InvariantError("collision rate ≥ 0 violated");
  validate_packet(psi);
  std::vector<double> dps(kFitSeparations);
  for (std::size_t j = 0; j < kFitSeparations; ++j) dps[j] = static_cast<double>(j + 1) * grid.dp();
  const auto factors = decoherence_factors(dps, psi, M, m);

  std::vector<double> xs, ys;
  for (const auto& f : factors) {
    const double mag = std::abs(f.value);
    if (mag < kOverlapFloor) break;
    xs.push_back(f.delta_p * f.delta_p);
    ys.push_back(-std::log(std::min(mag, 1.0)));
  }

  for (std::size_t n = xs.size(); n > 0; --n) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += xs[i] * ys[i];
      den += xs[i] * xs[i];
    }
    const double c = num / den;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double model = c * xs[i];
      const double scale = std::max(std::abs(ys[i]), std::abs(model));
      if (scale > 0) worst = std::max(worst, std::abs(ys[i] - model) / scale);
    }
    if (worst <= kResidualGate) {
      const double rate_factor = grid.hbar * grid.hbar * collision_rate;
      return {c * rate_factor, worst * c * rate_factor, c, n};
    }
  }
  throw FitRegionEmpty("no separation passes the quadratic-model gate (packet too narrow)");
}

MomentumLattice plane_wave_lattice(const Grid& grid, double M, double m) {
  if (!(M > m)) throw InvariantError("M > m violated");
  const double smallest_shift = 2.0 * m * grid.dp() / (M - m);
  return {2048, smallest_shift / 20.0};
}

double narrowest_width(const MomentumLattice& lattice) { return 2.0 * lattice.dk; }

std::vector<double> halving_widths(double narrowest, std::size_t count) {
  std::vector<double> w(count);
  for (std::size_t i = 0; i < count; ++i) w[i] = narrowest * std::ldexp(1.0, static_cast<int>(count - 1 - i));
  return w;
}

std::vector<ScanRow> cmd_divergence_scan(const std::vector<double>& widths, const MomentumLattice& lattice, double M,
                                         double m, double collision_rate, const Grid& grid) {
  std::vector<ScanRow> rows(widths.size());
  std::vector<std::string> errors(widths.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < widths.size(); ++i) {
    ScanRow& row = rows[i];
    row.width = widths[i];
    try {
      const MoleculePacket psi = gaussian_packet(lattice, widths[i]);
      row.smallest_overlap = std::abs(decoherence_factor(grid.dp(), 0.0, psi, M, m).value);
      try {
        const DxFit fit = extract_Dx_from_collisions(psi, M, m, collision_rate, grid);
        row.d_x = fit.d_x;
        row.fit_error = fit.fit_error;
        row.points = fit.points;
      } catch (const FitRegionEmpty&) {
        row.collapsed = true;
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw AliasingError(e);
  return rows;
}

double finite_tau_Dx(double tau, double M, double D_p) {
  if (!(tau >= 0)) throw InvariantError("τ ≥ 0 violated");
  return (1.0 / 3.0) * (tau * tau / M) * D_p;
}

double crossover_tau(const PhysicalParams& params) {
  const double target = gkls_min_Dx(params);
  if (target == 0.0) return 0.0;
  auto excess = [&](double tau) { return finite_tau_Dx(tau, params.M, params.D_p) - target; };
  double lo = 0.0, hi = 1.0;
  while (excess(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

DxReport compare_dx_models(const PhysicalParams& params, double tau, const std::string& tau_source,
                           const MoleculePacket& psi, double collision_rate, const Grid& grid,
                           const std::vector<double>& scan_widths, const MomentumLattice& scan_lattice) {
  validate_params(params);
  DxReport r;
  r.params = params;
  r.tau = tau;
  r.tau_source = tau_source;
  r.collision_rate = collision_rate;
  r.d_x_gkls_min = gkls_min_Dx(params);
  const DxFit fit = extract_Dx_from_collisions(psi, params.M, params.m, collision_rate, grid);
  r.d_x_msqr_fit = fit.d_x;
  r.d_x_msqr_fit_error = fit.fit_error;
  r.d_x_finite_tau = finite_tau_Dx(tau, params.M, params.D_p);
  if (params.D_p > 0) r.crossover_tau = crossover_tau(params);
  r.divergence_scan = cmd_divergence_scan(scan_widths, scan_lattice, params.M, params.m, collision_rate, grid);
  return r;
}

nlohmann::json to_json(const DxReport& r) {
  nlohmann::json scan = nlohmann::json::array();
  for (const auto& row : r.divergence_scan)
    scan.push_back({{"width", row.width},
                    {"d_x_fit", row.d_x},
                    {"fit_error", row.fit_error},
                    {"points", row.points},
                    {"smallest_overlap", row.smallest_overlap},
                    {"collapsed", row.collapsed}});
  const auto& p = r.params;
  return {{"d_x_gkls_min", r.d_x_gkls_min},
          {"d_x_msqr_fit", r.d_x_msqr_fit},
          {"d_x_msqr_fit_error", r.d_x_msqr_fit_error},
          {"d_x_finite_tau", r.d_x_finite_tau},
          {"tau", r.tau},
          {"tau_source", r.tau_source},
          {"collision_rate", r.collision_rate},
          {"crossover_tau", r.crossover_tau ? nlohmann::json(*r.crossover_tau) : nlohmann::json(nullptr)},
          {"params",
           {{"M", p.M}, {"m", p.m}, {"T", p.T}, {"eta", p.eta}, {"hbar", p.hbar}, {"k_B", p.k_B}, {"D_p", p.D_p},
            {"D_x", p.D_x}}},
          {"divergence_scan", scan}};
}

DxReport dx_report_from_json(const nlohmann::json& j) {
  DxReport r;
  r.d_x_gkls_min = j.at("d_x_gkls_min").get<double>();
  r.d_x_msqr_fit = j.at("d_x_msqr_fit").get<double>();
  r.d_x_msqr_fit_error = j.at("d_x_msqr_fit_error").get<double>();
  r.d_x_finite_tau = j.at("d_x_finite_tau").get<double>();
  r.tau = j.at("tau").get<double>();
  r.tau_source = j.at("tau_source").get<std::string>();
  r.collision_rate = j.at("collision_rate").get<double>();
  if (!j.at("crossover_tau").is_null()) r.crossover_tau = j.at("crossover_tau").get<double>();
  const auto& p = j.at("params");
  r.params = {p.at("M").get<double>(),   p.at("m").get<double>(),    p.at("T").get<double>(),
              p.at("eta").get<double>(), p.at("hbar").get<double>(), p.at("k_B").get<double>(),
              p.at("D_p").get<double>(), p.at("D_x").get<double>()};
  for (const auto& row : j.at("divergence_scan"))
    r.divergence_scan.push_back({row.at("width").get<double>(), row.at("d_x_fit").get<double>(),
                                 row.at("fit_error").get<double>(), row.at("points").get<std::size_t>(),
                                 row.at("smallest_overlap").get<double>(), row.at("collapsed").get<bool>()});
  return r;
}

}  // namespace qbm
