#pragma once

#include <functional>
#include <stdexcept>

#include "qbm/generator.hpp"
#include "qbm/grid.hpp"

namespace qbm {

/// Raised when a propagation blows up (trace drift or non-finite entries).
class NumericalInstability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PropagationOptions {
  double dt = 1e-3;
  double t_end = 1.0;
  /// Call the observer every `record_every` steps (0: only at start and end).
  std::size_t record_every = 0;
  std::function<void(double t, const DensityMatrixState& rho)> observer;
  /// Abort when |tr rho - 1| exceeds this.
  double trace_abort = 1e-3;
};

/// Classical fourth-order Runge-Kutta integration of d rho/dt = L[rho] with
/// uniform steps landing exactly on t_end. Hermiticity is restored after each
/// step by rho <- (rho + rho^dagger)/2; positivity is not enforced.
DensityMatrixState propagate(const DensityMatrixState& rho0, const GeneratorSpec& spec, const PropagationOptions& options);

struct Moments {
  double x = 0.0;
  double p = 0.0;
  double V_xx = 0.0;
  double V_xp = 0.0;  ///< symmetrized <(xp + px)/2> - <x><p>
  double V_pp = 0.0;
};

Moments moments(const DensityMatrixState& rho);

/// Ehrenfest closure of the QFPE for a quadratic Hamiltonian:
///   d<x>/dt = <p>/M,  d<p>/dt = -M w^2 <x> - eta <p>
///   dV_xx/dt = 2 V_xp / M + 2 D_x
///   dV_xp/dt = V_pp / M - M w^2 V_xx - eta V_xp
///   dV_pp/dt = -2 M w^2 V_xp - 2 eta V_pp + 2 D_p
/// integrated with fine RK4 steps. Requires kind == qfpe.
Moments moment_ode_oracle(const Moments& init, const GeneratorSpec& spec, double t);

/// 1/e decay length of |rho(c + s/2, c - s/2)| along the antidiagonal through
/// the most probable lattice point c, from a Gaussian fit ln|rho(s)/rho(0)| = -(s/l)^2.
/// Returns dx when the profile already falls below 1/e at the first lattice
/// separation; throws std::runtime_error when it never does (flat profile).
double coherence_length(const DensityMatrixState& rho);

}  // namespace qbm
