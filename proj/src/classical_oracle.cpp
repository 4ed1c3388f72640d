#include "qbm/classical_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "qbm/collision_engine.hpp"
#include "qbm/physical_core.hpp"

namespace qbm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)));
}

std::vector<PhasePoint> sample_gaussian_ensemble(std::size_t count, double x0, double p0, double var_x, double var_p,
                                                 std::uint64_t seed) {
  if (!(var_x >= 0) || !(var_p >= 0)) throw InvariantError("ensemble variances ≥ 0 violated");
  Rng rng = make_rng(seed, 0xE11);
  std::normal_distribution<double> normal;
  const double sx = std::sqrt(var_x), sp = std::sqrt(var_p);
  std::vector<PhasePoint> out(count);
  for (auto& pt : out) {
    pt.x = x0 + sx * normal(rng);
    pt.p = p0 + sp * normal(rng);
  }
  return out;
}

namespace {

void validate_langevin(const LangevinParams& params, std::span<const PhasePoint> initial, double dt, double t_end) {
  if (initial.empty()) throw InvariantError("ensemble size ≥ 1 violated");
  if (!(params.M > 0) || !(params.eta >= 0) || !(params.D_p >= 0)) throw InvariantError("M > 0, η ≥ 0, D_p ≥ 0 violated");
  if (!(dt > 0) || !(t_end >= 0)) throw InvariantError("dt > 0 and t_end ≥ 0 violated");
  if (params.eta > 0 && dt > 0.01 / params.eta * (1.0 + 1e-12)) throw InvariantError("dt ≤ 0.01/η violated");
}

Trajectory langevin_member(const LangevinParams& params, PhasePoint start, double dt, std::size_t steps,
                           std::size_t record_every, std::uint64_t seed, std::uint64_t member) {
  Rng rng = make_rng(seed, member);
  std::normal_distribution<double> normal;
  const double kick = std::sqrt(2.0 * params.D_p * dt);
  const double drag = params.eta * dt;
  const double drift = dt / params.M;
  Trajectory tr;
  const std::size_t records = 2 + (record_every > 0 ? steps / record_every : 0);
  tr.t.reserve(records);
  tr.x.reserve(records);
  tr.p.reserve(records);
  double x = start.x, p = start.p;
  tr.t.push_back(0.0);
  tr.x.push_back(x);
  tr.p.push_back(p);
  for (std::size_t s = 1; s <= steps; ++s) {
    const double xi = normal(rng);
    x += p * drift;
    p += -drag * p + kick * xi;
    if ((record_every > 0 && s % record_every == 0) || s == steps) {
      tr.t.push_back(static_cast<double>(s) * dt);
      tr.x.push_back(x);
      tr.p.push_back(p);
    }
  }
  return tr;
}

std::size_t step_count(double dt, double t_end) {
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

}  // namespace

TrajectoryEnsemble langevin_simulate(const LangevinParams& params, std::span<const PhasePoint> initial, double dt,
                                     double t_end, std::size_t record_every, std::uint64_t seed) {
  validate_langevin(params, initial, dt, t_end);
  const std::size_t steps = step_count(dt, t_end);
  TrajectoryEnsemble ens;
  ens.seed = seed;
  ens.model = "langevin-euler-maruyama";
  ens.members.resize(initial.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < initial.size(); ++i)
    ens.members[i] = langevin_member(params, initial[i], dt, steps, record_every, seed, i);
  return ens;
}

namespace reference {

TrajectoryEnsemble langevin_simulate(const LangevinParams& params, std::span<const PhasePoint> initial, double dt,
                                     double t_end, std::size_t record_every, std::uint64_t seed) {
  validate_langevin(params, initial, dt, t_end);
  const std::size_t steps = step_count(dt, t_end);
  TrajectoryEnsemble ens;
  ens.seed = seed;
  ens.model = "langevin-euler-maruyama";
  ens.members.reserve(initial.size());
  for (std::size_t i = 0; i < initial.size(); ++i)
    ens.members.push_back(langevin_member(params, initial[i], dt, steps, record_every, seed, i));
  return ens;
}

}  // namespace reference

std::string to_string(RateModel model) { return model == RateModel::flux_weighted ? "flux-weighted" : "fixed-rate"; }

RateModel rate_model_from_string(const std::string& name) {
  if (name == "flux-weighted") return RateModel::flux_weighted;
  if (name == "fixed-rate") return RateModel::fixed_rate;
  throw std::invalid_argument("unknown collision rate model '" + name + "' (expected flux-weighted|fixed-rate)");
}

namespace {

void validate_gas(const GasModel& gas) {
  if (!(gas.m > 0) || !(gas.T >= 0) || !(gas.k_B > 0)) throw InvariantError("gas m > 0, T ≥ 0, k_B > 0 violated");
  if (gas.rate_model == RateModel::fixed_rate && !(gas.tau > 0)) throw InvariantError("τ > 0 violated");
  if (gas.rate_model == RateModel::flux_weighted && !(gas.density > 0)) throw InvariantError("density n > 0 violated");
}

}  // namespace

double collision_rate(const GasModel& gas, double M, double p) {
  validate_gas(gas);
  if (gas.rate_model == RateModel::fixed_rate) return 1.0 / gas.tau;
  // E|Y| for Y ~ N(mu, s^2), Y the molecule velocity relative to the dust.
  const double s = std::sqrt(gas.k_B * gas.T / gas.m);
  const double mu = -p / M;
  if (s == 0.0) return gas.density * std::abs(mu);
  const double folded = s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-mu * mu / (2.0 * s * s)) +
                        mu * std::erf(mu / (s * std::numbers::sqrt2));
  return gas.density * folded;
}

TrajectoryEnsemble collision_gas_simulate(double M, double p0, const GasModel& gas, std::size_t n_collisions) {
  validate_gas(gas);
  if (!(M > 0) || M < gas.m) throw InvariantError("M ≥ m violated");
  Rng rng = make_rng(gas.seed, 0xC011);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double s = std::sqrt(gas.k_B * gas.T / gas.m);  // molecule velocity spread

  TrajectoryEnsemble ens;
  ens.seed = gas.seed;
  ens.model = "collision-gas/" + to_string(gas.rate_model);
  Trajectory tr;
  tr.t.reserve(n_collisions + 1);
  tr.x.reserve(n_collisions + 1);
  tr.p.reserve(n_collisions + 1);
  double t = 0.0, x = 0.0, p = p0;
  tr.t.push_back(t);
  tr.x.push_back(x);
  tr.p.push_back(p);

  for (std::size_t c = 0; c < n_collisions; ++c) {
    const double rate = collision_rate(gas, M, p);
    if (!(rate > 0)) break;  // cold gas and a dust particle at rest: nothing ever arrives
    const double wait = std::exponential_distribution<double>(rate)(rng);

    double v = 0.0;  // molecule velocity
    if (gas.rate_model == RateModel::fixed_rate || s == 0.0) {
      v = s * normal(rng);
    } else {
      // Relative velocity y = v - p/M has density ~ |y| phi((y - mu)/s). Propose
      // from (|mu| + |y - mu|) phi((y - mu)/s), a two-component mixture, and
      // accept with |y| / (|mu| + |y - mu|).
      const double mu = -p / M;
      const double w_shift = std::abs(mu);
      const double w_fold = s * std::sqrt(2.0 / std::numbers::pi);
      for (;;) {
        double z;
        if (uniform(rng) * (w_shift + w_fold) < w_shift) {
          z = normal(rng);
        } else {
          const double r = std::sqrt(-2.0 * std::log1p(-uniform(rng)));
          z = uniform(rng) < 0.5 ? -r : r;
        }
        const double y = mu + s * z;
        if (uniform(rng) * (w_shift + std::abs(y - mu)) < std::abs(y)) {
          v = y - mu;
          break;
        }
      }
    }

    x += p / M * wait;
    t += wait;
    p = collide_1d(p, gas.m * v, M, gas.m).p_f;
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.p.push_back(p);
  }
  ens.members.push_back(std::move(tr));
  return ens;
}

namespace {

// Sufficient statistics of one block of a uniformly resampled series.
struct BlockStats {
  double n = 0, s1 = 0, s2 = 0;
  std::vector<double> lag_sum, lag_count;
  double inc2 = 0, inc_count = 0;

  explicit BlockStats(std::size_t max_lag) : lag_sum(max_lag + 1, 0.0), lag_count(max_lag + 1, 0.0) {}

  void add(const BlockStats& o) {
    n += o.n;
    s1 += o.s1;
    s2 += o.s2;
    for (std::size_t l = 0; l < lag_sum.size(); ++l) {
      lag_sum[l] += o.lag_sum[l];
      lag_count[l] += o.lag_count[l];
    }
    inc2 += o.inc2;
    inc_count += o.inc_count;
  }
};

BlockStats block_stats(std::span<const double> p, std::size_t max_lag) {
  BlockStats b(max_lag);
  for (std::size_t i = 0; i < p.size(); ++i) {
    b.n += 1;
    b.s1 += p[i];
    b.s2 += p[i] * p[i];
    for (std::size_t l = 1; l <= max_lag && i + l < p.size(); ++l) {
      b.lag_sum[l] += p[i] * p[i + l];
      b.lag_count[l] += 1;
    }
    if (i + 1 < p.size()) {
      const double d = p[i + 1] - p[i];
      b.inc2 += d * d;
      b.inc_count += 1;
    }
  }
  return b;
}

struct Estimate {
  double eta;
  double D_p;
};

Estimate estimate(const BlockStats& s, std::size_t window, double h) {
  const double mean = s.s1 / s.n;
  const double var = s.s2 / s.n - mean * mean;
  double num = 0.0, den = 0.0;
  for (std::size_t l = 1; l <= window; ++l) {
    const double c = (s.lag_sum[l] / s.lag_count[l] - mean * mean) / var;
    if (!(c > 0)) break;
    const double tau = static_cast<double>(l) * h;
    num += -std::log(c) * tau;
    den += tau * tau;
  }
  const double eta = den > 0 ? num / den : 0.0;
  const double m2 = s.inc2 / s.inc_count;
  const double eh = eta * h;
  const double correction = eh > 1e-12 ? eh / (-std::expm1(-eh)) : 1.0;
  return {eta, m2 / (2.0 * h) * correction};
}

}  // namespace

FrictionDiffusionFit fit_friction_diffusion(const TrajectoryEnsemble& traj, std::uint64_t bootstrap_seed) {
  std::size_t records = 0;
  double span = 0.0;
  std::size_t intervals = 0;
  for (const auto& m : traj.members) {
    if (m.t.size() != m.p.size()) throw std::runtime_error("fit: trajectory time/momentum length mismatch");
    records += m.p.size();
    if (m.t.size() >= 2) {
      span += m.t.back() - m.t.front();
      intervals += m.t.size() - 1;
    }
  }
  if (records < 1000) throw std::runtime_error("fit: need at least 1000 momentum records");
  if (!(span > 0)) throw std::runtime_error("fit: degenerate timestamps");
  const double h = span / static_cast<double>(intervals);

  // Uniform resampling, holding the last recorded value.
  std::vector<std::vector<double>> series;
  for (const auto& m : traj.members) {
    if (m.t.size() < 2) continue;
    std::vector<double> s;
    std::size_t k = 0;
    for (double t = m.t.front(); t <= m.t.back(); t += h) {
      while (k + 1 < m.t.size() && m.t[k + 1] <= t) ++k;
      s.push_back(m.p[k]);
    }
    series.push_back(std::move(s));
  }

  // Fit window: lags while the pooled autocorrelation stays above 0.3.
  std::size_t shortest = series.front().size();
  for (const auto& s : series) shortest = std::min(shortest, s.size());
  const std::size_t probe_lag = std::max<std::size_t>(1, std::min<std::size_t>(shortest / 4, 2000));
  BlockStats pooled(probe_lag);
  for (const auto& s : series) pooled.add(block_stats(s, probe_lag));
  const double mean = pooled.s1 / pooled.n;
  const double var = pooled.s2 / pooled.n - mean * mean;
  if (!(var > 0)) throw std::runtime_error("fit: zero momentum variance (degenerate data)");
  std::size_t window = 0;
  for (std::size_t l = 1; l <= probe_lag; ++l) {
    const double c = (pooled.lag_sum[l] / pooled.lag_count[l] - mean * mean) / var;
    if (c < 0.3) break;
    window = l;
  }
  if (window == 0) {
    const double c1 = (pooled.lag_sum[1] / pooled.lag_count[1] - mean * mean) / var;
    if (!(c1 > 0)) throw std::runtime_error("fit: no positive autocorrelation at the first lag");
    window = 1;
  }

  // Blocks for the bootstrap: several correlation windows long.
  const std::size_t block_len = std::max<std::size_t>(50, 10 * window);
  std::vector<BlockStats> blocks;
  for (const auto& s : series) {
    for (std::size_t start = 0; start < s.size(); start += block_len) {
      const std::size_t len = std::min(block_len, s.size() - start);
      if (len <= window) continue;
      blocks.push_back(block_stats(std::span<const double>(s).subspan(start, len), window));
    }
  }
  if (blocks.empty()) throw std::runtime_error("fit: series too short for the correlation window");

  BlockStats total(window);
  for (const auto& b : blocks) total.add(b);
  const Estimate point = estimate(total, window, h);

  Rng rng = make_rng(bootstrap_seed, 0xB007);
  std::uniform_int_distribution<std::size_t> pick(0, blocks.size() - 1);
  constexpr int kReplicates = 200;
  double se_eta = 0, se_eta2 = 0, se_d = 0, se_d2 = 0;
  for (int r = 0; r < kReplicates; ++r) {
    BlockStats agg(window);
    for (std::size_t i = 0; i < blocks.size(); ++i) agg.add(blocks[pick(rng)]);
    const Estimate e = estimate(agg, window, h);
    se_eta += e.eta;
    se_eta2 += e.eta * e.eta;
    se_d += e.D_p;
    se_d2 += e.D_p * e.D_p;
  }
  const double inv = 1.0 / kReplicates;
  FrictionDiffusionFit fit;
  fit.eta = point.eta;
  fit.D_p = point.D_p;
  fit.eta_se = std::sqrt(std::max(0.0, se_eta2 * inv - (se_eta * inv) * (se_eta * inv)));
  fit.D_p_se = std::sqrt(std::max(0.0, se_d2 * inv - (se_d * inv) * (se_d * inv)));
  fit.lag = h;
  fit.records = records;
  return fit;
}

double ks_distance_to_lattice(std::vector<double> samples, std::span<const double> lattice_points,
                              std::span<const double> weights) {
  if (samples.empty() || lattice_points.size() < 2 || lattice_points.size() != weights.size())
    throw std::invalid_argument("ks_distance_to_lattice: bad input sizes");
  std::sort(samples.begin(), samples.end());
  const double h = lattice_points[1] - lattice_points[0];
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> cum(weights.size() + 1, 0.0);
  for (std::size_t j = 0; j < weights.size(); ++j) cum[j + 1] = cum[j] + weights[j] / total;
  const double left = lattice_points[0] - 0.5 * h;

  auto cdf = [&](double x) {
    const double u = (x - left) / h;
    if (u <= 0) return 0.0;
    const auto j = static_cast<std::size_t>(u);
    if (j >= weights.size()) return 1.0;
    return cum[j] + (u - static_cast<double>(j)) * (cum[j + 1] - cum[j]);
  };

  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace qbm
