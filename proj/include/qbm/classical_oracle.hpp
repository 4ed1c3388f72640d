#pragma once

// Classical reference dynamics: Ornstein-Uhlenbeck (Langevin) sample paths of
// the classical Fokker-Planck equation and a one-dimensional test-particle
// collision gas built on collide_1d.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace qbm {

/// Random engine used by every stochastic routine. Member streams are seeded
/// with splitmix64(seed, member) so results do not depend on the thread count.
using Rng = std::mt19937_64;
inline constexpr const char* kRngId = "mt19937_64 seeded by splitmix64(seed ^ stream); libstdc++ normal_distribution";

std::uint64_t splitmix64(std::uint64_t x);
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> p;
};

struct TrajectoryEnsemble {
  std::vector<Trajectory> members;
  std::uint64_t seed = 0;
  std::string generator_id = kRngId;
  std::string model;  ///< short description of the producing model
};

/// Samples of a Gaussian phase-space density (independent x and p).
std::vector<PhasePoint> sample_gaussian_ensemble(std::size_t count, double x0, double p0, double var_x, double var_p,
                                                 std::uint64_t seed);

struct LangevinParams {
  double M = 1.0;
  double eta = 0.1;
  double D_p = 10.0;
};

/// Euler-Maruyama steps dp = -eta p dt + sqrt(2 D_p) dW, dx = (p/M) dt, one
/// member per initial point, recording every `record_every` steps, at t = 0 and at the
/// final step (`record_every` = 0 records only the end points).
/// Members run in parallel; output is identical for any thread count.
TrajectoryEnsemble langevin_simulate(const LangevinParams& params, std::span<const PhasePoint> initial, double dt,
                                     double t_end, std::size_t record_every, std::uint64_t seed);

namespace reference {
/// Same recurrence, serial.
TrajectoryEnsemble langevin_simulate(const LangevinParams& params, std::span<const PhasePoint> initial, double dt,
                                     double t_end, std::size_t record_every, std::uint64_t seed);
}  // namespace reference

enum class RateModel { flux_weighted, fixed_rate };

std::string to_string(RateModel model);
RateModel rate_model_from_string(const std::string& name);

/// Ideal gas of molecules with Maxwell-Boltzmann momenta of variance m k_B T.
struct GasModel {
  double m = 1.0;
  double T = 1.0;
  double k_B = 1.0;
  RateModel rate_model = RateModel::flux_weighted;
  double density = 1.0;  ///< flux-weighted: 1D number density n
  double tau = 1.0;      ///< fixed-rate: mean intercollision time
  std::uint64_t seed = 0;
};

/// Collision rate seen by a dust particle of momentum p.
double collision_rate(const GasModel& gas, double M, double p);

/// One member: the dust momentum after each of `n_collisions` collisions with
/// the collision times. Under `flux_weighted` the waiting time is exponential
/// with rate n E|v_mol - p/M| and the partner is drawn with weight
/// |v_mol - p/M|; under `fixed_rate` waiting times have mean tau and partners
/// are drawn from the plain thermal distribution.
TrajectoryEnsemble collision_gas_simulate(double M, double p0, const GasModel& gas, std::size_t n_collisions);

struct FrictionDiffusionFit {
  double eta = 0.0;
  double eta_se = 0.0;
  double D_p = 0.0;
  double D_p_se = 0.0;
  double lag = 0.0;  ///< uniform resampling interval
  std::size_t records = 0;
};

/// eta from an exponential fit to the momentum autocorrelation; D_p from the
/// mean-squared momentum increment over one resampling interval (with the
/// Ornstein-Uhlenbeck finite-lag correction). Trajectories are resampled on a
/// uniform grid with the mean record spacing, holding the last value.
/// Standard errors come from a block bootstrap. Throws std::runtime_error for
/// fewer than 1000 records or degenerate data.
FrictionDiffusionFit fit_friction_diffusion(const TrajectoryEnsemble& traj, std::uint64_t bootstrap_seed = 7);

/// Kolmogorov-Smirnov distance between the empirical distribution of `samples`
/// and a lattice distribution whose weight w_j is spread uniformly over
/// [x_j - h/2, x_j + h/2] (h the lattice spacing).
double ks_distance_to_lattice(std::vector<double> samples, std::span<const double> lattice_points,
                              std::span<const double> weights);

}  // namespace qbm
