#include <doctest.h>

#include <cmath>
#include <random>

#include "qbm/generator.hpp"
#include "qbm/physical_core.hpp"

using namespace qbm;

namespace {

Eigen::MatrixXcd random_hermitian(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace();
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("position, momentum and energy operators") {
  const Grid g = make_grid(64, 20);
  const double M = 2.0;
  const Operators ops = build_operators(g, M);

  for (std::size_t j = 0; j < g.N; ++j) CHECK(ops.X(j, j).real() == g.x(j));
  CHECK(max_abs(ops.X - ops.X.adjoint()) <= 1e-12);
  CHECK(max_abs(ops.P - ops.P.adjoint()) <= 1e-12);

  SUBCASE("free-particle spectrum is p^2 / 2M") {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ops.H);
    std::vector<double> expected;
    for (std::size_t a = 0; a < g.N; ++a) expected.push_back(g.p(a) * g.p(a) / (2 * M));
    std::sort(expected.begin(), expected.end());
    for (std::size_t a = 0; a < g.N; ++a) CHECK(std::abs(es.eigenvalues()(static_cast<Eigen::Index>(a)) - expected[a]) <= 1e-10);
  }

  SUBCASE("[X, P] acts as i hbar on smooth interior states") {
    // The lattice commutator cannot equal i hbar everywhere (its trace is zero);
    // on band-limited states localized away from the boundary it does.
    Eigen::VectorXcd psi(64);
    for (std::size_t j = 0; j < g.N; ++j) psi(static_cast<Eigen::Index>(j)) = std::exp(-g.x(j) * g.x(j) / 2.0);
    psi.normalize();
    const Eigen::VectorXcd lhs = (ops.X * ops.P - ops.P * ops.X) * psi;
    const Eigen::VectorXcd rhs = Complex(0, g.hbar) * psi;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("generator structure") {
  const Grid g = make_grid(32, 12);
  const Eigen::MatrixXcd rho = random_hermitian(32, 7);

  for (auto kind : {GeneratorKind::unitary, GeneratorKind::jz, GeneratorKind::qfpe}) {
    GeneratorSpec spec;
    spec.kind = kind;
    spec.lambda = 0.3;
    spec.D_p = 0.4;
    spec.eta = 0.5;
    spec.D_x = 0.2;
    spec.M = 1.3;
    const SpectralGenerator gen(g, spec);
    const Eigen::MatrixXcd out = gen.apply(rho);
    CAPTURE(to_string(kind));
    CHECK(std::abs(out.trace()) <= 1e-10);
    CHECK(max_abs(out - out.adjoint()) <= 1e-10 * max_abs(out));
  }
}

TEST_CASE("energy eigenprojector is stationary without dephasing") {
  const Grid g = make_grid(32, 12);
  const BasisTransform t(g);
  const Eigen::MatrixXcd u = t.matrix();
  const Eigen::VectorXcd plane = u.adjoint().col(19);  // momentum eigenstate
  const Eigen::MatrixXcd proj = plane * plane.adjoint();
  GeneratorSpec spec;
  spec.kind = GeneratorKind::jz;
  spec.lambda = 0.0;
  spec.M = 0.8;
  CHECK(max_abs(SpectralGenerator(g, spec).apply(proj)) <= 1e-12);
  CHECK(max_abs(reference::generator_apply(proj, spec, build_operators(g, spec.M), g.hbar)) <= 1e-12);
}

TEST_CASE("QFPE without friction and D_x is the JZ equation with Lambda = D_p / hbar^2") {
  const Grid g = make_grid(64, 16, 0.8);
  const Eigen::MatrixXcd rho = random_hermitian(64, 8);
  GeneratorSpec qfpe;
  qfpe.kind = GeneratorKind::qfpe;
  qfpe.D_p = 0.37;
  qfpe.M = 2.0;
  GeneratorSpec jz;
  jz.kind = GeneratorKind::jz;
  jz.lambda = Dp_to_lambda(qfpe.D_p, g.hbar);
  jz.M = 2.0;
  CHECK(max_abs(SpectralGenerator(g, qfpe).apply(rho) - SpectralGenerator(g, jz).apply(rho)) <= 1e-12);
  const Operators ops = build_operators(g, 2.0);
  CHECK(max_abs(reference::generator_apply(rho, qfpe, ops, g.hbar) - reference::generator_apply(rho, jz, ops, g.hbar)) <=
        1e-12);
}

TEST_CASE("harmonic potential matches the reference") {
  const Grid g = make_grid(32, 12);
  const Eigen::MatrixXcd rho = random_hermitian(32, 9);
  GeneratorSpec spec;
  spec.kind = GeneratorKind::qfpe;
  spec.D_p = 0.2;
  spec.eta = 0.3;
  spec.D_x = 0.1;
  spec.potential = Potential::harmonic;
  spec.omega = 0.7;
  const Eigen::MatrixXcd a = SpectralGenerator(g, spec).apply(rho);
  const Eigen::MatrixXcd b = reference::generator_apply(rho, spec, build_operators(g, 1.0, Potential::harmonic, 0.7), 1.0);
  CHECK(max_abs(a - b) <= 1e-10 * max_abs(b));
}

TEST_CASE("spec validation and representation guard") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::jz;
  spec.lambda = -1;
  CHECK_THROWS_AS(validate(spec), InvariantError);
  spec = {};
  spec.kind = GeneratorKind::qfpe;
  spec.D_x = -1;
  CHECK_THROWS_AS(validate(spec), InvariantError);
  CHECK(generator_kind_from_string("qfpe") == GeneratorKind::qfpe);
  CHECK_THROWS(generator_kind_from_string("lindblad"));

  const Grid g = make_grid(16, 4);
  DensityMatrixState rho{Eigen::MatrixXcd::Identity(16, 16) / 16.0, Representation::momentum, g};
  CHECK_THROWS_AS(generator_apply(rho, GeneratorSpec{}), InvariantError);
  rho.rep = Representation::position;
  CHECK(max_abs(generator_apply(rho, GeneratorSpec{}).values) <= 1e-12);
}

TEST_CASE("step heuristic") {
  const Grid g = make_grid(64, 20);
  GeneratorSpec spec;
  spec.M = 2.0;
  const SpectralGenerator gen(g, spec);
  CHECK(gen.max_energy() == doctest::Approx(g.p_max() * g.p_max() / 4.0));
  CHECK(gen.suggested_dt() == doctest::Approx(0.1 / gen.max_energy()));
  spec.suppress_hamiltonian = true;
  CHECK(std::isinf(SpectralGenerator(g, spec).suggested_dt()));
}
