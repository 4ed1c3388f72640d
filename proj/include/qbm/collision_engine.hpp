#pragma once

// Exact elastic collision kinematics between the dust (mass M) and a gas
// molecule (mass m), the overlap of post-collision molecule states that
// decides whether dust momentum coherences survive, and the resulting
// single-collision map on the dust density matrix.

#include <Eigen/Dense>

#include <vector>

#include "qbm/grid.hpp"
#include "qbm/momentum_lattice.hpp"

namespace qbm {

struct CollisionOutcome {
  double p_f = 0.0;     ///< dust final momentum
  double k_f = 0.0;     ///< molecule final momentum
  double k_star = 0.0;  ///< centre-of-mass momentum of the incoming molecule
};

/// k* = (M k - m p) / (M + m)
double com_momentum(double p, double k, double M, double m);

/// Hard-wall collision in one dimension: p -> p + 2k*, k -> k - 2k*.
CollisionOutcome collide_1d(double p, double k, double M, double m);

/// mu_+ k_i + mu_- k_f with mu_pm = (M/m +- 1)/2. Equals the dust final
/// momentum of any kinematically consistent pair (k_i, k_f), whatever p_i was.
double final_momentum_mu_form(double k_i, double k_f, double M, double m);

struct Collision3d {
  Eigen::Vector3d p_f;
  Eigen::Vector3d k_f;
};

/// Elastic scattering in the centre-of-mass frame: the molecule's relative
/// momentum keeps its magnitude and is redirected along `n_hat`.
/// Throws InvariantError unless |n_hat| = 1 (to 1e-12).
Collision3d collide_3d_elastic(const Eigen::Vector3d& p_i, const Eigen::Vector3d& k_i, const Eigen::Vector3d& n_hat,
                               double M, double m);

/// Normalized molecule wave packet psi(k) sampled on a lattice.
struct MoleculePacket {
  MomentumLattice lattice;
  std::vector<Complex> amplitudes;

  /// sum |psi|^2 dk
  double norm() const;
};

/// Throws InvariantError when the packet norm is not within 1e-10 of one.
const MoleculePacket& validate_packet(const MoleculePacket& psi);

/// Gaussian packet with |psi|^2 of standard deviation `sigma` centred at k0.
MoleculePacket gaussian_packet(const MomentumLattice& lattice, double sigma, double k0 = 0.0);

/// Raised when a shifted packet or a pushed-forward momentum leaves its lattice.
class AliasingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DecoherenceFactor {
  Complex value{1.0, 0.0};
  double delta_p = 0.0;  ///< p - p'
};

/// Momentum shift k' - k between molecule branches that end in the same final
/// state after scattering off dust momenta p and p': 2 m (p - p') / (m - M).
double branch_shift(double delta_p, double M, double m);

/// Overlap sum_k psi(k) conj(psi(k + s)) dk of the two post-collision molecule
/// states, s = branch_shift(p - p'). The shifted packet is evaluated by
/// band-limited interpolation on the packet lattice.
DecoherenceFactor decoherence_factor(double p, double p_prime, const MoleculePacket& psi, double M, double m);

/// Factors for many separations at once; entries are independent and computed in parallel.
std::vector<DecoherenceFactor> decoherence_factors(const std::vector<double>& delta_ps, const MoleculePacket& psi,
                                                   double M, double m);

/// One collision of the whole packet with every momentum component of the
/// dust state (momentum representation). Written as a Kraus sum over the
/// molecule's final momentum, so the map is completely positive and
/// trace preserving; each pushed-forward dust momentum is assigned to the
/// nearest grid momentum.
DensityMatrixState apply_collision_to_dust(const DensityMatrixState& rho, const MoleculePacket& psi, double M,
                                           double m);

}  // namespace qbm
