#include "qbm/collision_engine.hpp"

#include <omp.h>

#include <cmath>
#include <sstream>

#include "qbm/physical_core.hpp"

namespace qbm {

namespace {

void require_masses(double M, double m) {
  if (!(M > 0) || !(m > 0)) throw InvariantError("M > 0 and m > 0 violated");
}

// Nearest grid index of a momentum, or -1 when it falls outside the grid.
long nearest_momentum_index(const Grid& grid, double p) {
  const long b = std::lround(p / grid.dp()) + static_cast<long>(grid.N / 2);
  if (b < 0 || b >= static_cast<long>(grid.N)) return -1;
  return b;
}

// Largest fraction of |psi|^2 allowed to wrap around the lattice under a shift.
constexpr double kAliasMass = 1e-10;

void require_shift_inside(const MoleculePacket& psi, double shift) {
  double lost = 0.0, total = 0.0;
  for (std::size_t j = 0; j < psi.lattice.n; ++j) {
    const double w = std::norm(psi.amplitudes[j]);
    total += w;
    const double k = psi.lattice.k(j) - shift;
    if (k < psi.lattice.k_min() || k > psi.lattice.k_max()) lost += w;
  }
  if (lost > kAliasMass * total) {
    std::ostringstream msg;
    msg << "shifted packet leaves the lattice [" << psi.lattice.k_min() << ", " << psi.lattice.k_max()
        << "]: fraction " << lost / total << " of the norm wraps around (shift " << shift << ")";
    throw AliasingError(msg.str());
  }
}

}  // namespace

double com_momentum(double p, double k, double M, double m) {
  require_masses(M, m);
  return (M * k - m * p) / (M + m);
}

CollisionOutcome collide_1d(double p, double k, double M, double m) {
  if (M == m) return {k, p, com_momentum(p, k, M, m)};  // exact exchange
  const double ks = com_momentum(p, k, M, m);
  return {p + 2.0 * ks, k - 2.0 * ks, ks};
}

double final_momentum_mu_form(double k_i, double k_f, double M, double m) {
  require_masses(M, m);
  const double ratio = M / m;
  const double mu_plus = 0.5 * (ratio + 1.0);
  const double mu_minus = 0.5 * (ratio - 1.0);
  return mu_plus * k_i + mu_minus * k_f;
}

Collision3d collide_3d_elastic(const Eigen::Vector3d& p_i, const Eigen::Vector3d& k_i, const Eigen::Vector3d& n_hat,
                               double M, double m) {
  require_masses(M, m);
  if (std::abs(n_hat.norm() - 1.0) > 1e-12) throw InvariantError("|n_hat| = 1 violated");
  const double total = M + m;
  const Eigen::Vector3d k_star = (M * k_i - m * p_i) / total;
  const Eigen::Vector3d k_star_f = k_star.norm() * n_hat;
  Collision3d out;
  out.k_f = (m / total) * (p_i + k_i) + k_star_f;
  out.p_f = p_i + k_i - out.k_f;
  return out;
}

double MoleculePacket::norm() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s * lattice.dk;
}

const MoleculePacket& validate_packet(const MoleculePacket& psi) {
  if (psi.amplitudes.size() != psi.lattice.n) throw InvariantError("packet sample count = lattice size violated");
  if (!(psi.lattice.dk > 0)) throw InvariantError("lattice dk > 0 violated");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw InvariantError("packet norm within 1e-10 of 1 violated");
  return psi;
}

MoleculePacket gaussian_packet(const MomentumLattice& lattice, double sigma, double k0) {
  if (!(sigma > 0)) throw InvariantError("packet σ > 0 violated");
  MoleculePacket psi{lattice, std::vector<Complex>(lattice.n)};
  double s = 0.0;
  for (std::size_t j = 0; j < lattice.n; ++j) {
    const double d = lattice.k(j) - k0;
    const double a = std::exp(-d * d / (4.0 * sigma * sigma));
    psi.amplitudes[j] = a;
    s += a * a;
  }
  const double scale = 1.0 / std::sqrt(s * lattice.dk);
  for (auto& a : psi.amplitudes) a *= scale;
  return psi;
}

double branch_shift(double delta_p, double M, double m) {
  require_masses(M, m);
  if (M == m) throw InvariantError("branch shift undefined for M = m (branches always orthogonal)");
  return 2.0 * m * delta_p / (m - M);
}

namespace {

Complex overlap(const MoleculePacket& psi, double shift) {
  require_shift_inside(psi, shift);
  const auto shifted = shifted_samples(psi.amplitudes, psi.lattice.dk, shift);
  Complex sum = 0.0;
  for (std::size_t j = 0; j < psi.lattice.n; ++j) sum += psi.amplitudes[j] * std::conj(shifted[j]);
  return sum * psi.lattice.dk;
}

}  // namespace

DecoherenceFactor decoherence_factor(double p, double p_prime, const MoleculePacket& psi, double M, double m) {
  validate_packet(psi);
  require_masses(M, m);
  const double delta_p = p - p_prime;
  if (delta_p == 0.0) return {Complex(1.0, 0.0), 0.0};
  if (M == m) return {Complex(0.0, 0.0), delta_p};
  return {overlap(psi, branch_shift(delta_p, M, m)), delta_p};
}

std::vector<DecoherenceFactor> decoherence_factors(const std::vector<double>& delta_ps, const MoleculePacket& psi,
                                                   double M, double m) {
  validate_packet(psi);
  require_masses(M, m);
  std::vector<DecoherenceFactor> out(delta_ps.size());
  // Aliasing errors are collected and rethrown outside the parallel region.
  std::vector<std::string> errors(delta_ps.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < delta_ps.size(); ++i) {
    const double dp = delta_ps[i];
    try {
      if (dp == 0.0) {
        out[i] = {Complex(1.0, 0.0), 0.0};
      } else if (M == m) {
        out[i] = {Complex(0.0, 0.0), dp};
      } else {
        out[i] = {overlap(psi, branch_shift(dp, M, m)), dp};
      }
    } catch (const AliasingError& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw AliasingError(e);
  return out;
}

DensityMatrixState apply_collision_to_dust(const DensityMatrixState& rho, const MoleculePacket& psi, double M,
                                           double m) {
  if (rho.rep != Representation::momentum)
    throw InvariantError("apply_collision_to_dust requires the momentum representation");
  validate_packet(psi);
  require_masses(M, m);

  const Grid& grid = rho.grid;
  const auto N = static_cast<Eigen::Index>(grid.N);
  const std::size_t n = psi.lattice.n;
  const double dk = psi.lattice.dk;
  const double sqrt_dk = std::sqrt(dk);
  const double w_max = rho.values.diagonal().real().maxCoeff();
  const double active_cut = 1e-15 * w_max;
  const double alias_cut = 1e-14;

  DensityMatrixState out{Eigen::MatrixXcd::Zero(N, N), Representation::momentum, grid};

  if (M == m) {
    // Exchange: the molecule leaves with the dust momentum, so branches never
    // overlap and the dust inherits the packet's momentum distribution.
    const double total = rho.values.trace().real();
    for (std::size_t j = 0; j < n; ++j) {
      const double w = std::norm(psi.amplitudes[j]) * dk;
      const long b = nearest_momentum_index(grid, psi.lattice.k(j));
      if (b < 0) {
        if (w > alias_cut) throw AliasingError("pushed-forward dust momentum leaves the grid");
        continue;
      }
      out.values(b, b) += w * total;
    }
    return out;
  }

  // Kraus index: molecule final momentum k_f(j) = (m - M) k_j / (M + m). For dust
  // momentum p_a the incoming molecule momentum is k_j + delta_a.
  std::vector<Eigen::Index> active;
  for (Eigen::Index a = 0; a < N; ++a)
    if (rho.values(a, a).real() > active_cut) active.push_back(a);
  const auto n_active = static_cast<Eigen::Index>(active.size());

  Eigen::MatrixXcd amp(static_cast<Eigen::Index>(n), n_active);
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> bin(static_cast<Eigen::Index>(n), n_active);
  for (Eigen::Index c = 0; c < n_active; ++c) {
    const double p = grid.p(static_cast<std::size_t>(active[static_cast<std::size_t>(c)]));
    const double delta = 2.0 * m * p / (M - m);
    require_shift_inside(psi, delta);
    const auto shifted = shifted_samples(psi.amplitudes, dk, delta);
    const double weight = rho.values(active[static_cast<std::size_t>(c)], active[static_cast<std::size_t>(c)]).real();
    for (std::size_t j = 0; j < n; ++j) {
      const double k = psi.lattice.k(j) + delta;
      const double p_f = ((M - m) * p + 2.0 * M * k) / (M + m);
      const long b = nearest_momentum_index(grid, p_f);
      const auto row = static_cast<Eigen::Index>(j);
      if (b < 0) {
        if (std::norm(shifted[j]) * dk * weight > alias_cut)
          throw AliasingError("pushed-forward dust momentum leaves the grid");
        amp(row, c) = 0.0;
        bin(row, c) = 0;
        continue;
      }
      amp(row, c) = shifted[j] * sqrt_dk;
      bin(row, c) = b;
    }
  }

  Eigen::MatrixXcd sub(n_active, n_active);
  for (Eigen::Index c2 = 0; c2 < n_active; ++c2)
    for (Eigen::Index c1 = 0; c1 < n_active; ++c1)
      sub(c1, c2) = rho.values(active[static_cast<std::size_t>(c1)], active[static_cast<std::size_t>(c2)]);

  const double amp_cut = 1e-300;
#pragma omp parallel
  {
    Eigen::MatrixXcd local = Eigen::MatrixXcd::Zero(N, N);
#pragma omp for schedule(dynamic, 8)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
      for (Eigen::Index c2 = 0; c2 < n_active; ++c2) {
        const Complex right = std::conj(amp(j, c2));
        if (std::abs(right) < amp_cut) continue;
        const Eigen::Index b2 = bin(j, c2);
        for (Eigen::Index c1 = 0; c1 < n_active; ++c1) {
          const Complex left = amp(j, c1);
          local(bin(j, c1), b2) += left * sub(c1, c2) * right;
        }
      }
    }
#pragma omp critical
    out.values += local;
  }
  return out;
}

}  // namespace qbm
