#include "qbm/cli/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "qbm/classical_oracle.hpp"
#include "qbm/cli/artifacts.hpp"
#include "qbm/coefficient_lab.hpp"
#include "qbm/master_equations.hpp"
#include "qbm/msqr_environment.hpp"
#include "qbm/physical_core.hpp"

namespace qbm::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FlatConfig common_defaults(const std::string& name) {
  return {{"scenario.name", name}, {"scenario.seed", "1"}, {"scenario.out_dir", "out/" + name},
          {"scenario.format", "csv"}};
}

FlatConfig with(FlatConfig base, const FlatConfig& extra) {
  for (const auto& [k, v] : extra) base[k] = v;
  return base;
}

const FlatConfig kPhysics = {{"physics.M", "100"},  {"physics.m", "1"},   {"physics.T", "1"},
                             {"physics.k_B", "1"},  {"physics.hbar", "1"}, {"physics.eta", "0.1"},
                             {"physics.D_p", "auto"}, {"physics.D_x", "auto"}};

// Any library invariant violated while reading parameters is a config error.
template <class F>
auto as_config_error(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

PhysicalParams load_physics(const ScenarioConfig& cfg) {
  return as_config_error([&] {
    PhysicalParams p;
    p.M = cfg.num("physics.M");
    p.m = cfg.num("physics.m");
    p.T = cfg.num("physics.T");
    p.k_B = cfg.num("physics.k_B");
    p.hbar = cfg.num("physics.hbar");
    p.eta = cfg.num("physics.eta");
    p.D_p = cfg.is_auto("physics.D_p") ? fluctuation_dissipation_Dp(p) : cfg.num("physics.D_p");
    if (cfg.has("physics.D_x")) p.D_x = cfg.is_auto("physics.D_x") ? gkls_min_Dx(p) : cfg.num("physics.D_x");
    else p.D_x = gkls_min_Dx(p);
    return validate_params(p);
  });
}

Grid load_grid(const ScenarioConfig& cfg, double hbar) {
  return as_config_error([&] { return make_grid(cfg.count("grid.N"), cfg.num("grid.L"), hbar); });
}

double load_rate(const ScenarioConfig& cfg, const PhysicalParams& p) {
  // Without a gas model the rate is tied to the friction through the mean
  // momentum transfer per collision, 2m/(M+m) of the dust momentum.
  if (cfg.is_auto("dx.collision_rate")) return p.eta * (p.M + p.m) / (2.0 * p.m);
  const double r = cfg.num("dx.collision_rate");
  if (!(r > 0)) throw ConfigError("key 'dx.collision_rate': must be > 0");
  return r;
}

ThermalSpec load_thermal(const ScenarioConfig& cfg, const PhysicalParams& p) {
  return as_config_error([&] {
    ThermalSpec t{p.m, p.T, p.k_B, p.hbar, thermal_convention_from_string(cfg.str("environment.convention"))};
    return t;
  });
}

MomentumLattice load_thermal_lattice(const ScenarioConfig& cfg, const ThermalSpec& t) {
  return as_config_error([&] {
    return default_thermal_lattice(t, cfg.count("environment.points"), cfg.num("environment.half_span_sd"));
  });
}

Check at_most(std::string name, double value, double limit) {
  return {std::move(name), value <= limit, value, limit, "<="};
}
Check at_least(std::string name, double value, double limit) {
  return {std::move(name), value >= limit, value, limit, ">="};
}
Check below(std::string name, double value, double limit) {
  return {std::move(name), value < limit, value, limit, "<"};
}

nlohmann::json checks_json(const std::vector<Check>& checks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : checks)
    out.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold},
                   {"relation", c.relation}});
  return out;
}

// Writes the artifacts of one run into scenario.out_dir.
class Outputs {
 public:
  explicit Outputs(const ScenarioConfig& cfg) : cfg_(cfg), dir_(cfg.str("scenario.out_dir")) {
    const std::string& f = cfg.str("scenario.format");
    if (f != "csv" && f != "json") throw ConfigError("key 'scenario.format': expected csv or json, got '" + f + "'");
    json_ = f == "json";
    stamp_ = utc_timestamp();
  }

  void table(const std::string& stem, const Table& t) {
    Metadata meta{{"generated", stamp_},
                  {"scenario", cfg_.scenario()},
                  {"seed", cfg_.str("scenario.seed")},
                  {"rng", kRngId}};
    for (const auto& [k, v] : cfg_.values())
      if (k.rfind("scenario.", 0) != 0) meta.emplace_back(k, v);
    if (json_) write(stem + ".json", table_to_json(t, meta).dump(2) + "\n");
    else write(stem + ".csv", render_csv(t, meta));
  }

  void json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

  RunReport finish(std::vector<Check> checks, nlohmann::json results) {
    RunReport report{cfg_.scenario(), std::move(checks), {}};
    json("summary.json", {{"scenario", cfg_.scenario()},
                          {"passed", report.passed()},
                          {"checks", checks_json(report.checks)},
                          {"results", std::move(results)}});
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : files_) files.push_back(f.filename().string());
    files.push_back("manifest.json");
    write("manifest.json", nlohmann::json{{"scenario", cfg_.scenario()},
                                          {"generated", stamp_},
                                          {"seed", cfg_.seed()},
                                          {"rng", kRngId},
                                          {"config", cfg_.values()},
                                          {"files", files}}
                                   .dump(2) +
                               "\n");
    report.files = files_;
    return report;
  }

 private:
  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    write_atomic(path, content);
    files_.push_back(path);
  }

  const ScenarioConfig& cfg_;
  std::filesystem::path dir_;
  bool json_ = false;
  std::string stamp_;
  std::vector<std::filesystem::path> files_;
};

double safe_coherence_length(const DensityMatrixState& rho) {
  try {
    return coherence_length(rho);
  } catch (const std::runtime_error&) {
    return kNaN;
  }
}

// ---------------------------------------------------------------- jz-dephasing

struct JzSetup {
  Grid grid;
  GeneratorSpec spec;
  PropagationOptions options;
  double x0, p0, sigma_x;
};

JzSetup load_jz(const ScenarioConfig& cfg) {
  return as_config_error([&] {
    const double hbar = cfg.num("physics.hbar");
    JzSetup s{load_grid(cfg, hbar), {}, {}, cfg.num("initial.x0"), cfg.num("initial.p0"), cfg.num("initial.sigma_x")};
    s.spec.kind = GeneratorKind::jz;
    s.spec.lambda = cfg.num("physics.lambda");
    s.spec.M = cfg.num("physics.M");
    s.spec.suppress_hamiltonian = cfg.flag("integrator.suppress_hamiltonian");
    validate(s.spec);
    s.options.dt = cfg.num("integrator.dt");
    s.options.t_end = cfg.num("integrator.t_end");
    s.options.record_every = cfg.count("integrator.record_every");
    if (!(s.options.dt > 0) || !(s.options.t_end > 0)) throw ConfigError("integrator dt and t_end must be > 0");
    if (!(s.sigma_x > 0)) throw ConfigError("key 'initial.sigma_x': must be > 0");
    return s;
  });
}

RunReport run_jz(const ScenarioConfig& cfg) {
  JzSetup s = load_jz(cfg);
  Outputs out(cfg);
  const DensityMatrixState rho0 = gaussian_state(s.grid, s.x0, s.p0, s.sigma_x);
  const Eigen::Index N = rho0.values.rows();
  const double support = 1e-6 * rho0.values.cwiseAbs().maxCoeff();
  const bool analytic = s.spec.suppress_hamiltonian;

  Table table{{"t", "trace", "hermiticity_error", "max_rel_error", "coherence_length"}, {}};
  double worst_trace = 0, worst_herm = 0, final_err = 0, worst_err = 0;
  s.options.observer = [&](double t, const DensityMatrixState& rho) {
    double err = kNaN;
    if (analytic) {
      err = 0.0;
      for (Eigen::Index j = 0; j < N; ++j)
        for (Eigen::Index i = 0; i < N; ++i) {
          const Complex a = rho0.values(i, j);
          if (std::abs(a) < support) continue;
          const double d = s.grid.x(static_cast<std::size_t>(i)) - s.grid.x(static_cast<std::size_t>(j));
          const Complex expected = a * std::exp(-s.spec.lambda * d * d * t);
          err = std::max(err, std::abs(rho.values(i, j) - expected) / std::abs(expected));
        }
      final_err = err;
      worst_err = std::max(worst_err, err);
    }
    const double tr = trace_of(rho);
    const double herm = hermiticity_error(rho.values);
    worst_trace = std::max(worst_trace, std::abs(tr - 1.0));
    worst_herm = std::max(worst_herm, herm);
    table.add({t, tr, herm, err, safe_coherence_length(rho)});
  };
  propagate(rho0, s.spec, s.options);
  out.table("timeseries", table);

  std::vector<Check> checks{at_most("trace drift", worst_trace, 1e-6), at_most("hermiticity error", worst_herm, 1e-10)};
  if (analytic) checks.push_back(at_most("max relative error vs analytic dephasing", worst_err, 1e-4));
  return out.finish(checks, {{"final_max_rel_error", analytic ? nlohmann::json(final_err) : nlohmann::json(nullptr)},
                             {"analytic_reference", analytic}});
}

// ---------------------------------------------------------------- qfpe-moments

struct QfpeSetup {
  PhysicalParams params;
  Grid grid;
  GeneratorSpec spec;
  PropagationOptions options;
  double x0, p0, sigma_x;
  std::size_t samples;
  double classical_dt;
  double closure_window;
};

GeneratorSpec qfpe_spec(const PhysicalParams& p, const ScenarioConfig& cfg) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::qfpe;
  spec.D_p = p.D_p;
  spec.eta = p.eta;
  spec.D_x = p.D_x;
  spec.M = p.M;
  const std::string& pot = cfg.str("physics.potential");
  if (pot == "free") spec.potential = Potential::free;
  else if (pot == "harmonic") spec.potential = Potential::harmonic;
  else throw ConfigError("key 'physics.potential': expected free or harmonic, got '" + pot + "'");
  spec.omega = cfg.num("physics.omega");
  validate(spec);
  return spec;
}

QfpeSetup load_qfpe(const ScenarioConfig& cfg) {
  return as_config_error([&] {
    QfpeSetup s{load_physics(cfg), {}, {}, {}, cfg.num("initial.x0"), cfg.num("initial.p0"),
                cfg.num("initial.sigma_x"), cfg.count("classical.samples"), cfg.num("classical.dt"),
                cfg.num("check.closure_window")};
    s.grid = load_grid(cfg, s.params.hbar);
    s.spec = qfpe_spec(s.params, cfg);
    s.options.dt = cfg.num("integrator.dt");
    s.options.t_end = cfg.num("integrator.t_end");
    s.options.record_every = cfg.count("integrator.record_every");
    if (!(s.options.dt > 0) || !(s.options.t_end > 0)) throw ConfigError("integrator dt and t_end must be > 0");
    if (!(s.sigma_x > 0)) throw ConfigError("key 'initial.sigma_x': must be > 0");
    if (s.samples > 0 && s.spec.potential != Potential::free)
      throw ConfigError("key 'classical.samples': the Langevin comparison needs physics.potential = free");
    if (s.samples > 0 && !(s.classical_dt > 0)) throw ConfigError("key 'classical.dt': must be > 0");
    return s;
  });
}

double relative_moment_error(const Moments& a, const Moments& b) {
  const double sx = std::sqrt(b.V_xx), sp = std::sqrt(b.V_pp);
  return std::max({std::abs(a.x - b.x) / sx, std::abs(a.p - b.p) / sp, std::abs(a.V_xx - b.V_xx) / b.V_xx,
                   std::abs(a.V_pp - b.V_pp) / b.V_pp, std::abs(a.V_xp - b.V_xp) / (sx * sp)});
}

RunReport run_qfpe(const ScenarioConfig& cfg) {
  QfpeSetup s = load_qfpe(cfg);
  Outputs out(cfg);
  const DensityMatrixState rho0 = gaussian_state(s.grid, s.x0, s.p0, s.sigma_x);
  const Moments m0 = moments(rho0);

  Table table{{"t", "trace", "min_eigenvalue", "x", "p", "V_xx", "V_xp", "V_pp", "oracle_x", "oracle_p",
               "oracle_V_xx", "oracle_V_xp", "oracle_V_pp", "rel_error"},
              {}};
  double worst_trace = 0, worst_closure = 0, min_eig = 1;
  s.options.observer = [&](double t, const DensityMatrixState& rho) {
    const Moments a = moments(rho);
    const Moments b = moment_ode_oracle(m0, s.spec, t);
    const double err = relative_moment_error(a, b);
    const double tr = trace_of(rho);
    const double eig = min_eigenvalue(rho.values);
    worst_trace = std::max(worst_trace, std::abs(tr - 1.0));
    min_eig = std::min(min_eig, eig);
    if (s.params.eta * t <= s.closure_window + 1e-12) worst_closure = std::max(worst_closure, err);
    table.add({t, tr, eig, a.x, a.p, a.V_xx, a.V_xp, a.V_pp, b.x, b.p, b.V_xx, b.V_xp, b.V_pp, err});
  };
  const DensityMatrixState rho = propagate(rho0, s.spec, s.options);
  out.table("moments", table);

  std::vector<Check> checks{at_most("trace drift", worst_trace, 1e-6),
                            at_most("moment closure relative error", worst_closure, 1e-3)};
  nlohmann::json results{{"D_p", s.params.D_p}, {"D_x", s.params.D_x}, {"gkls_min_Dx", gkls_min_Dx(s.params)},
                         {"min_eigenvalue", min_eig}};
  if (s.params.D_x >= gkls_min_Dx(s.params)) checks.push_back(at_least("min eigenvalue at or above the bound", min_eig, -1e-6));

  const double equipartition = s.params.M * s.params.k_B * s.params.T;
  const Moments final_moments = moments(rho);
  results["final_V_pp"] = final_moments.V_pp;
  results["equipartition_V_pp"] = equipartition;
  const bool thermal = std::abs(s.params.D_p - fluctuation_dissipation_Dp(s.params)) <= 1e-12 * s.params.D_p;
  if (thermal && s.spec.potential == Potential::free && s.params.eta * s.options.t_end >= 5.0)
    checks.push_back(at_most("stationary V_pp vs M k_B T", std::abs(final_moments.V_pp / equipartition - 1.0), 0.01));

  if (s.samples > 0) {
    const double var_p = s.params.hbar * s.params.hbar / (4.0 * s.sigma_x * s.sigma_x);
    const auto init = sample_gaussian_ensemble(s.samples, s.x0, s.p0, s.sigma_x * s.sigma_x, var_p, cfg.seed());
    const auto ens = as_config_error([&] {
      return langevin_simulate({s.params.M, s.params.eta, s.params.D_p}, init, s.classical_dt, s.options.t_end, 0,
                               cfg.seed() + 1);
    });
    std::vector<double> xs, ps;
    for (const auto& m : ens.members) {
      xs.push_back(m.x.back());
      ps.push_back(m.p.back());
    }
    const auto mom = to_momentum(rho);
    std::vector<double> wx(s.grid.N), wp(s.grid.N);
    for (std::size_t i = 0; i < s.grid.N; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      wx[i] = std::max(0.0, rho.values(k, k).real());
      wp[i] = std::max(0.0, mom.values(k, k).real());
    }
    const double ks_p = ks_distance_to_lattice(ps, s.grid.momenta(), wp);
    const double ks_x = ks_distance_to_lattice(xs, s.grid.positions(), wx);
    results["ks_momentum"] = ks_p;
    results["ks_position"] = ks_x;
    checks.push_back(at_most("KS distance, momentum marginal vs Langevin", ks_p, 0.05));
    // The Langevin oracle has no position diffusion, so positions only match when D_x = 0.
    if (s.params.D_x == 0.0) checks.push_back(at_most("KS distance, position marginal vs Langevin", ks_x, 0.05));
  }
  return out.finish(checks, results);
}

// ---------------------------------------------------------------- gkls-witness

struct WitnessSetup {
  PhysicalParams params;
  Grid grid;
  double var_x, x0, p0;
  double dt, t_end;
  std::size_t record_every;
  double sub_bound_Dx;
};

WitnessSetup load_witness(const ScenarioConfig& cfg) {
  return as_config_error([&] {
    WitnessSetup s{load_physics(cfg), {}, 0, cfg.num("initial.x0"), cfg.num("initial.p0"), 0, 0, 0,
                   cfg.num("witness.sub_bound_Dx")};
    s.grid = load_grid(cfg, s.params.hbar);
    const auto& p = s.params;
    if (!(p.eta > 0)) throw ConfigError("key 'physics.eta': the witness needs friction > 0");
    s.var_x = cfg.is_auto("initial.var_x") ? 0.01 * p.hbar / std::sqrt(p.M * p.eta * p.k_B * p.T)
                                           : cfg.num("initial.var_x");
    if (!(s.var_x > 0)) throw ConfigError("key 'initial.var_x': must be > 0");
    if (!(s.sub_bound_Dx >= 0) || s.sub_bound_Dx >= gkls_min_Dx(p))
      throw ConfigError("key 'witness.sub_bound_Dx': must lie in [0, bound)");
    GeneratorSpec probe;
    probe.kind = GeneratorKind::qfpe;
    probe.M = p.M;
    s.dt = cfg.is_auto("integrator.dt") ? SpectralGenerator(s.grid, probe).suggested_dt() : cfg.num("integrator.dt");
    s.t_end = cfg.num("integrator.t_end");
    if (!(s.dt > 0) || !(s.t_end > 0)) throw ConfigError("integrator dt and t_end must be > 0");
    const std::size_t steps = static_cast<std::size_t>(std::ceil(s.t_end / s.dt - 1e-9));
    s.record_every = cfg.is_auto("integrator.record_every") ? std::max<std::size_t>(1, steps / 20)
                                                            : cfg.count("integrator.record_every");
    return s;
  });
}

RunReport run_witness(const ScenarioConfig& cfg) {
  WitnessSetup s = load_witness(cfg);
  Outputs out(cfg);
  const DensityMatrixState rho0 = gaussian_state(s.grid, s.x0, s.p0, std::sqrt(s.var_x));
  const double bound = gkls_min_Dx(s.params);

  struct Track {
    std::vector<double> t, eig, trace;
  };
  auto run = [&](double D_x) {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::qfpe;
    spec.M = s.params.M;
    spec.eta = s.params.eta;
    spec.D_p = s.params.D_p;
    spec.D_x = D_x;
    Track tr;
    PropagationOptions o;
    o.dt = s.dt;
    o.t_end = s.t_end;
    o.record_every = s.record_every;
    o.observer = [&](double t, const DensityMatrixState& rho) {
      tr.t.push_back(t);
      tr.eig.push_back(min_eigenvalue(rho.values));
      tr.trace.push_back(trace_of(rho));
    };
    propagate(rho0, spec, o);
    return tr;
  };
  const Track at = run(bound);
  const Track sub = run(s.sub_bound_Dx);

  Table table{{"t", "min_eigenvalue_at_bound", "min_eigenvalue_sub_bound", "trace_at_bound", "trace_sub_bound"}, {}};
  for (std::size_t i = 0; i < at.t.size(); ++i) table.add({at.t[i], at.eig[i], sub.eig[i], at.trace[i], sub.trace[i]});
  out.table("eigenvalues", table);

  const double min_at = *std::min_element(at.eig.begin(), at.eig.end());
  const double min_sub = *std::min_element(sub.eig.begin(), sub.eig.end());
  double drift = 0;
  for (std::size_t i = 0; i < at.t.size(); ++i)
    drift = std::max({drift, std::abs(at.trace[i] - 1.0), std::abs(sub.trace[i] - 1.0)});
  return out.finish({at_least("min eigenvalue at the bound", min_at, -1e-6),
                     below("min eigenvalue below the bound", min_sub, -1e-4), at_most("trace drift", drift, 1e-6)},
                    {{"D_x_bound", bound},
                     {"D_x_sub_bound", s.sub_bound_Dx},
                     {"initial_var_x", s.var_x},
                     {"dt", s.dt},
                     {"min_eigenvalue_at_bound", min_at},
                     {"min_eigenvalue_sub_bound", min_sub}});
}

// ---------------------------------------------------------------- cmd-scan

double gaussian_overlap_Dx(double M, double m, double variance, double rate, double hbar) {
  return hbar * hbar * rate * m * m / (2.0 * (M - m) * (M - m) * variance);
}

struct ScanSetup {
  PhysicalParams params;
  Grid grid;
  double rate;
  std::size_t halvings;
};

ScanSetup load_scan(const ScenarioConfig& cfg) {
  return as_config_error([&] {
    ScanSetup s{load_physics(cfg), {}, 0, cfg.count("dx.halvings")};
    s.grid = load_grid(cfg, s.params.hbar);
    s.rate = load_rate(cfg, s.params);
    if (s.halvings < 1 || s.halvings > 8) throw ConfigError("key 'dx.halvings': must be in [1, 8]");
    if (!(s.params.M > s.params.m)) throw ConfigError("the plane-wave scan needs physics.M > physics.m");
    return s;
  });
}

RunReport run_scan(const ScenarioConfig& cfg) {
  ScanSetup s = load_scan(cfg);
  Outputs out(cfg);
  const auto& p = s.params;
  const MomentumLattice lattice = plane_wave_lattice(s.grid, p.M, p.m);
  const auto widths = halving_widths(narrowest_width(lattice), s.halvings + 1);
  const auto rows = cmd_divergence_scan(widths, lattice, p.M, p.m, s.rate, s.grid);

  Table table{{"width", "d_x_fit", "fit_error", "points", "smallest_overlap", "collapsed", "d_x_gaussian_overlap"}, {}};
  for (const auto& r : rows)
    table.add({r.width, r.d_x, r.fit_error, static_cast<double>(r.points), r.smallest_overlap,
               r.collapsed ? 1.0 : 0.0, gaussian_overlap_Dx(p.M, p.m, r.width * r.width, s.rate, p.hbar)});
  out.table("divergence_scan", table);

  // rows run widest to narrowest
  bool increasing = true;
  double worst_ratio = 0;
  std::size_t usable = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].collapsed) continue;
    ++usable;
    if (i > 0 && !rows[i - 1].collapsed) {
      if (!(rows[i].d_x > rows[i - 1].d_x)) increasing = false;
      worst_ratio = std::max(worst_ratio, std::abs(rows[i].d_x / rows[i - 1].d_x / 4.0 - 1.0));
    }
  }
  return out.finish({at_least("fitted D_x strictly increasing as the width halves", increasing ? 1.0 : 0.0, 1.0),
                     at_least("halvings with a fit", static_cast<double>(usable) - 1.0, static_cast<double>(s.halvings)),
                     at_most("growth per halving vs inverse-variance scaling", worst_ratio, 0.10),
                     below("narrowest packet overlap at the smallest separation", rows.back().smallest_overlap, 1e-3)},
                    {{"collision_rate", s.rate}, {"lattice_dk", lattice.dk}, {"lattice_points", lattice.n}});
}

// ---------------------------------------------------------------- msqr-collision

struct MsqrSetup {
  PhysicalParams params;
  Grid grid;
  double rate;
  ThermalSpec thermal;
  MomentumLattice lattice;
  double x0, p0, sigma_x;
};

MsqrSetup load_msqr(const ScenarioConfig& cfg) {
  return as_config_error([&] {
    MsqrSetup s{load_physics(cfg), {}, 0, {}, {}, cfg.num("initial.x0"), cfg.num("initial.p0"),
                cfg.num("initial.sigma_x")};
    s.grid = load_grid(cfg, s.params.hbar);
    s.rate = load_rate(cfg, s.params);
    s.thermal = load_thermal(cfg, s.params);
    s.lattice = load_thermal_lattice(cfg, s.thermal);
    if (!(s.sigma_x > 0)) throw ConfigError("key 'initial.sigma_x': must be > 0");
    if (!(s.params.M > s.params.m)) throw ConfigError("the overlap fit needs physics.M > physics.m");
    return s;
  });
}

RunReport run_msqr(const ScenarioConfig& cfg) {
  MsqrSetup s = load_msqr(cfg);
  Outputs out(cfg);
  const auto& p = s.params;
  const MoleculePacket psi = as_config_error([&] { return msqr_wave_packet(s.thermal, s.lattice); });
  const EnvState env = msqr_density_matrix(thermal_distribution(s.thermal, s.lattice));
  const double pur = purity(env);

  const DxFit fit = extract_Dx_from_collisions(psi, p.M, p.m, s.rate, s.grid);
  const double analytic = gaussian_overlap_Dx(p.M, p.m, s.thermal.momentum_variance(), s.rate, p.hbar);
  const double bound = gkls_min_Dx(p);

  Table table{{"delta_p", "overlap_abs", "minus_log_overlap", "quadratic_model"}, {}};
  std::vector<double> dps;
  for (std::size_t j = 1; j <= 16; ++j) dps.push_back(static_cast<double>(j) * s.grid.dp());
  for (const auto& f : decoherence_factors(dps, psi, p.M, p.m)) {
    const double mag = std::abs(f.value);
    table.add({f.delta_p, mag, -std::log(mag), fit.curvature * f.delta_p * f.delta_p});
  }
  out.table("overlaps", table);

  // One collision of the whole packet with a Gaussian dust state.
  const DensityMatrixState dust = to_momentum(gaussian_state(s.grid, s.x0, s.p0, s.sigma_x));
  const DensityMatrixState after = apply_collision_to_dust(dust, psi, p.M, p.m);
  const double trace_after = after.values.trace().real();
  const double eig_after = min_eigenvalue(after.values);

  return out.finish({at_most("fitted vs Gaussian-overlap D_x, relative", std::abs(fit.d_x / analytic - 1.0), 0.02),
                     at_least("fitted D_x vs bound (within fit error)", fit.d_x + fit.fit_error, bound),
                     at_most("purity of the square-root state", std::abs(pur - 1.0), 1e-10),
                     at_most("collision map trace error", std::abs(trace_after - 1.0), 1e-10),
                     at_least("collision map min eigenvalue", eig_after, -1e-10)},
                    {{"d_x_fit", fit.d_x},
                     {"fit_error", fit.fit_error},
                     {"fit_points", fit.points},
                     {"d_x_gaussian_overlap", analytic},
                     {"gkls_min_Dx", bound},
                     {"collision_rate", s.rate},
                     {"momentum_variance", s.thermal.momentum_variance()},
                     {"convention", to_string(s.thermal.convention)},
                     {"purity", pur},
                     {"collision_map_trace", trace_after},
                     {"collision_map_min_eigenvalue", eig_after}});
}

// ---------------------------------------------------------------- classical-fd

struct FdSetup {
  double M;
  GasModel gas;
  std::size_t collisions;
  double p0;
};

FdSetup load_fd(const ScenarioConfig& cfg) {
  return as_config_error([&] {
    FdSetup s{cfg.num("physics.M"), {}, cfg.count("gas.collisions"), cfg.num("initial.p0")};
    s.gas.m = cfg.num("gas.m");
    s.gas.T = cfg.num("gas.T");
    s.gas.k_B = cfg.num("gas.k_B");
    s.gas.rate_model = rate_model_from_string(cfg.str("gas.rate_model"));
    s.gas.density = cfg.num("gas.density");
    s.gas.tau = cfg.num("gas.tau");
    s.gas.seed = cfg.seed();
    collision_rate(s.gas, s.M, 0.0);  // validates the gas
    if (!(s.M >= s.gas.m)) throw ConfigError("M ≥ m violated");
    if (s.collisions < 1000) throw ConfigError("key 'gas.collisions': the fit needs at least 1000");
    return s;
  });
}

RunReport run_fd(const ScenarioConfig& cfg) {
  FdSetup s = load_fd(cfg);
  Outputs out(cfg);
  const auto ens = collision_gas_simulate(s.M, s.p0, s.gas, s.collisions);
  const auto fit = fit_friction_diffusion(ens);
  const double ratio = fit.D_p / (fit.eta * s.M * s.gas.k_B * s.gas.T);

  Table table{{"t", "x", "p", "member"}, {}};
  for (std::size_t m = 0; m < ens.members.size(); ++m) {
    const auto& tr = ens.members[m];
    for (std::size_t i = 0; i < tr.t.size(); ++i) table.add({tr.t[i], tr.x[i], tr.p[i], static_cast<double>(m)});
  }
  out.table("trajectory", table);
  const double lo = 0.9, hi = 1.1;
  return out.finish({at_least("D_p / (eta M k_B T) lower", ratio, lo), at_most("D_p / (eta M k_B T) upper", ratio, hi)},
                    {{"eta", fit.eta},
                     {"eta_se", fit.eta_se},
                     {"D_p", fit.D_p},
                     {"D_p_se", fit.D_p_se},
                     {"resample_interval", fit.lag},
                     {"records", fit.records},
                     {"ratio", ratio},
                     {"rate_model", to_string(s.gas.rate_model)},
                     {"model", ens.model}});
}

// ---------------------------------------------------------------- dx-compare

struct CompareSetup {
  MsqrSetup msqr;
  double tau;
  std::string tau_source;
  std::size_t halvings;
};

CompareSetup load_compare(const ScenarioConfig& cfg) {
  return as_config_error([&] {
    CompareSetup s{{load_physics(cfg), {}, 0, {}, {}, 0, 0, 1}, 0, {}, cfg.count("dx.halvings")};
    auto& m = s.msqr;
    m.grid = load_grid(cfg, m.params.hbar);
    m.rate = load_rate(cfg, m.params);
    m.thermal = load_thermal(cfg, m.params);
    m.lattice = load_thermal_lattice(cfg, m.thermal);
    if (!(m.params.M > m.params.m)) throw ConfigError("the comparison needs physics.M > physics.m");
    if (cfg.is_auto("dx.tau")) {
      s.tau = 1.0 / m.rate;
      s.tau_source = "inverse of dx.collision_rate";
    } else {
      s.tau = cfg.num("dx.tau");
      s.tau_source = "dx.tau";
    }
    if (!(s.tau >= 0)) throw ConfigError("key 'dx.tau': must be ≥ 0");
    if (s.halvings < 1 || s.halvings > 8) throw ConfigError("key 'dx.halvings': must be in [1, 8]");
    return s;
  });
}

RunReport run_compare(const ScenarioConfig& cfg) {
  CompareSetup s = load_compare(cfg);
  Outputs out(cfg);
  const auto& m = s.msqr;
  const MoleculePacket psi = msqr_wave_packet(m.thermal, m.lattice);
  const MomentumLattice scan_lattice = plane_wave_lattice(m.grid, m.params.M, m.params.m);
  const DxReport report = compare_dx_models(m.params, s.tau, s.tau_source, psi, m.rate, m.grid,
                                            halving_widths(narrowest_width(scan_lattice), s.halvings + 1),
                                            scan_lattice);
  const nlohmann::json j = to_json(report);
  out.json("dx_report.json", j);

  Table table{{"width", "d_x_fit", "fit_error", "points", "smallest_overlap", "collapsed"}, {}};
  for (const auto& r : report.divergence_scan)
    table.add({r.width, r.d_x, r.fit_error, static_cast<double>(r.points), r.smallest_overlap, r.collapsed ? 1.0 : 0.0});
  out.table("divergence_scan", table);

  double smallest = std::min({report.d_x_gkls_min, report.d_x_msqr_fit, report.d_x_finite_tau});
  for (const auto& r : report.divergence_scan) smallest = std::min(smallest, r.d_x);
  const bool round_trip = dx_report_from_json(nlohmann::json::parse(j.dump())) == report;
  return out.finish({at_least("smallest D_x entry", smallest, 0.0),
                     at_most("bound entry vs gkls_min_Dx", std::abs(report.d_x_gkls_min - gkls_min_Dx(m.params)), 0.0),
                     at_least("report survives a JSON round trip", round_trip ? 1.0 : 0.0, 1.0)},
                    j);
}

// ---------------------------------------------------------------- registry

struct Scenario {
  ScenarioInfo info;
  FlatConfig defaults;
  std::function<void(const ScenarioConfig&)> validate;
  std::function<RunReport(const ScenarioConfig&)> run;
};

const std::vector<Scenario>& registry() {
  static const std::vector<Scenario> scenarios = [] {
    std::vector<Scenario> v;
    v.push_back({{"jz-dephasing",
                  "Positional decoherence of a Gaussian packet; compares the propagated density matrix with the "
                  "closed-form dephasing factor.",
                  "d rho/dt = -i/hbar [H, rho] - Lambda [x, [x, rho]];  rho(x, x', t) = rho0 exp(-Lambda (x - x')^2 t)"},
                 with(common_defaults("jz-dephasing"),
                      {{"physics.lambda", "0.5"},
                       {"physics.hbar", "1"},
                       {"physics.M", "1"},
                       {"grid.N", "128"},
                       {"grid.L", "40"},
                       {"integrator.dt", "1e-3"},
                       {"integrator.t_end", "4"},
                       {"integrator.record_every", "250"},
                       {"integrator.suppress_hamiltonian", "true"},
                       {"initial.x0", "0"},
                       {"initial.p0", "0"},
                       {"initial.sigma_x", "1"}}),
                 [](const ScenarioConfig& c) { load_jz(c); }, run_jz});
    v.push_back({{"qfpe-moments",
                  "Quantum Fokker-Planck propagation; moments against the closed moment equations, stationary "
                  "momentum variance, and diagonal marginals against a Langevin ensemble.",
                  "d rho/dt = -i/hbar [H, rho] - D_p/hbar^2 [x, [x, rho]] - D_x/hbar^2 [p, [p, rho]] "
                  "- i eta/(2 hbar) [x, {p, rho}]"},
                 with(with(common_defaults("qfpe-moments"), kPhysics),
                      {{"physics.M", "1"},
                       {"physics.eta", "1"},
                       {"physics.potential", "free"},
                       {"physics.omega", "0"},
                       {"grid.N", "128"},
                       {"grid.L", "40"},
                       {"integrator.dt", "1e-3"},
                       {"integrator.t_end", "5"},
                       {"integrator.record_every", "100"},
                       {"initial.x0", "0"},
                       {"initial.p0", "1"},
                       {"initial.sigma_x", "1"},
                       {"classical.samples", "10000"},
                       {"classical.dt", "1e-3"},
                       {"check.closure_window", "2"}}),
                 [](const ScenarioConfig& c) { load_qfpe(c); }, run_qfpe});
    FlatConfig witness = with(with(common_defaults("gkls-witness"), kPhysics),
                              {{"physics.M", "1"},
                               {"physics.eta", "1"},
                               {"witness.sub_bound_Dx", "0"},
                               {"grid.N", "128"},
                               {"grid.L", "12.8"},
                               {"integrator.dt", "auto"},
                               {"integrator.t_end", "0.1"},
                               {"integrator.record_every", "auto"},
                               {"initial.x0", "0"},
                               {"initial.p0", "0"},
                               {"initial.var_x", "auto"}});
    witness.erase("physics.D_x");  // both runs fix their own D_x
    v.push_back({{"gkls-witness",
                  "Minimum eigenvalue of a squeezed state under the quantum Fokker-Planck equation, with D_x at "
                  "the positivity bound and below it.",
                  "D_x >= hbar^2 eta^2 / (4 D_p)"},
                 witness, [](const ScenarioConfig& c) { load_witness(c); }, run_witness});
    v.push_back({{"cmd-scan",
                  "Overlap of post-collision molecule states for ever narrower packets; the fitted D_x grows "
                  "without bound towards the plane-wave limit.",
                  "D(p, p') = integral psi(k) psi*(k + 2m(p - p')/(m - M)) dk"},
                 with(with(common_defaults("cmd-scan"), kPhysics),
                      {{"grid.N", "128"}, {"grid.L", "40"}, {"dx.collision_rate", "auto"}, {"dx.halvings", "5"}}),
                 [](const ScenarioConfig& c) { load_scan(c); }, run_scan});
    v.push_back({{"msqr-collision",
                  "Thermal molecule state replaced by its square-root pure state; D_x from the single-collision "
                  "overlap against the Gaussian-overlap formula and the positivity bound.",
                  "rho(k, k') = sqrt(rho(k)) sqrt(rho(k'))"},
                 with(with(common_defaults("msqr-collision"), kPhysics),
                      {{"grid.N", "128"},
                       {"grid.L", "30"},
                       {"dx.collision_rate", "auto"},
                       {"environment.convention", "half-variance"},
                       {"environment.points", "512"},
                       {"environment.half_span_sd", "8"},
                       {"initial.x0", "0"},
                       {"initial.p0", "0"},
                       {"initial.sigma_x", "2"}}),
                 [](const ScenarioConfig& c) { load_msqr(c); }, run_msqr});
    v.push_back({{"classical-fd",
                  "One-dimensional collision-gas Monte Carlo; friction and momentum diffusion fitted from the "
                  "trajectory and compared through the fluctuation-dissipation relation.",
                  "D_p = eta M k_B T"},
                 with(common_defaults("classical-fd"),
                      {{"physics.M", "100"},
                       {"gas.m", "1"},
                       {"gas.T", "1"},
                       {"gas.k_B", "1"},
                       {"gas.rate_model", "flux-weighted"},
                       {"gas.density", "1"},
                       {"gas.tau", "1"},
                       {"gas.collisions", "100000"},
                       {"initial.p0", "0"}}),
                 [](const ScenarioConfig& c) { load_fd(c); }, run_fd});
    v.push_back({{"dx-compare",
                  "Side-by-side position-diffusion coefficients: positivity bound, square-root-state fit, "
                  "finite intercollision time, and the plane-wave divergence table.",
                  "D_x = (1/3)(tau^2 / M) D_p"},
                 with(with(common_defaults("dx-compare"), kPhysics),
                      {{"grid.N", "128"},
                       {"grid.L", "40"},
                       {"dx.collision_rate", "auto"},
                       {"dx.tau", "auto"},
                       {"dx.halvings", "5"},
                       {"environment.convention", "half-variance"},
                       {"environment.points", "512"},
                       {"environment.half_span_sd", "8"}}),
                 [](const ScenarioConfig& c) { load_compare(c); }, run_compare});
    return v;
  }();
  return scenarios;
}

const Scenario& find(const std::string& name) {
  for (const auto& s : registry())
    if (s.info.name == name) return s;
  throw ConfigError("unknown scenario '" + name + "'");
}

}  // namespace

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog = [] {
    std::vector<ScenarioInfo> out;
    for (const auto& s : registry()) out.push_back(s.info);
    return out;
  }();
  return catalog;
}

const FlatConfig* scenario_defaults(const std::string& name) {
  for (const auto& s : registry())
    if (s.info.name == name) return &s.defaults;
  return nullptr;
}

void validate_scenario(const ScenarioConfig& cfg) {
  const Scenario& s = find(cfg.scenario());
  const std::string& f = cfg.str("scenario.format");
  if (f != "csv" && f != "json") throw ConfigError("key 'scenario.format': expected csv or json, got '" + f + "'");
  s.validate(cfg);
}

RunReport run_scenario(const ScenarioConfig& cfg) {
  validate_scenario(cfg);
  return find(cfg.scenario()).run(cfg);
}

}  // namespace qbm::cli
