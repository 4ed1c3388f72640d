#include <stdexcept>

#include "qbm/generator.hpp"
#include "qbm/physical_core.hpp"

namespace qbm {

void validate(const GeneratorSpec& spec) {
  if (!(spec.M > 0)) throw InvariantError("generator M > 0 violated");
  if (spec.kind == GeneratorKind::jz && !(spec.lambda >= 0)) throw InvariantError("Λ ≥ 0 violated");
  if (spec.kind == GeneratorKind::qfpe) {
    if (!(spec.D_p >= 0)) throw InvariantError("D_p ≥ 0 violated");
    if (!(spec.eta >= 0)) throw InvariantError("η ≥ 0 violated");
    if (!(spec.D_x >= 0)) throw InvariantError("D_x ≥ 0 violated");
  }
  if (spec.potential == Potential::harmonic && !(spec.omega >= 0)) throw InvariantError("ω ≥ 0 violated");
}

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::unitary: return "unitary";
    case GeneratorKind::jz: return "jz";
    case GeneratorKind::qfpe: return "qfpe";
  }
  return "unknown";
}

GeneratorKind generator_kind_from_string(const std::string& name) {
  if (name == "unitary") return GeneratorKind::unitary;
  if (name == "jz") return GeneratorKind::jz;
  if (name == "qfpe") return GeneratorKind::qfpe;
  throw std::invalid_argument("unknown generator kind '" + name + "'");
}

Operators build_operators(const Grid& grid, double M, Potential potential, double omega) {
  const auto n = static_cast<Eigen::Index>(grid.N);
  const BasisTransform basis(grid);
  const Eigen::MatrixXcd u = basis.matrix();

  Eigen::VectorXd x(n), p(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    x(j) = grid.x(static_cast<std::size_t>(j));
    p(j) = grid.p(static_cast<std::size_t>(j));
  }

  Operators ops;
  ops.X = x.cast<Complex>().asDiagonal();
  ops.P = u.adjoint() * p.cast<Complex>().asDiagonal() * u;
  make_hermitian(ops.P);
  const Eigen::VectorXd kinetic = p.array().square() / (2.0 * M);
  ops.H = u.adjoint() * kinetic.cast<Complex>().asDiagonal() * u;
  if (potential == Potential::harmonic) {
    const Eigen::VectorXd v = 0.5 * M * omega * omega * x.array().square();
    ops.H.diagonal() += v.cast<Complex>();
  }
  make_hermitian(ops.H);
  return ops;
}

namespace reference {

namespace {

Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return a * b - b * a; }

}  // namespace

Eigen::MatrixXcd generator_apply(const Eigen::MatrixXcd& rho, const GeneratorSpec& spec, const Operators& ops,
                                 double hbar) {
  const Complex i(0.0, 1.0);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  if (!spec.suppress_hamiltonian) out -= (i / hbar) * commutator(ops.H, rho);

  switch (spec.kind) {
    case GeneratorKind::unitary:
      break;
    case GeneratorKind::jz:
      out -= spec.lambda * commutator(ops.X, commutator(ops.X, rho));
      break;
    case GeneratorKind::qfpe: {
      const double h2 = hbar * hbar;
      out -= (spec.D_p / h2) * commutator(ops.X, commutator(ops.X, rho));
      const Eigen::MatrixXcd anti = ops.P * rho + rho * ops.P;
      out -= i * (spec.eta / (2.0 * hbar)) * commutator(ops.X, anti);
      out -= (spec.D_x / h2) * commutator(ops.P, commutator(ops.P, rho));
      break;
    }
  }
  return out;
}

}  // namespace reference

}  // namespace qbm
