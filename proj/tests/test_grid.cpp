#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qbm/grid.hpp"
#include "qbm/physical_core.hpp"

using namespace qbm;

namespace {

Eigen::MatrixXcd random_density(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("grid layout") {
  const Grid g = make_grid(128, 40);
  CHECK(g.dx() == 40.0 / 128);
  CHECK(g.dp() == doctest::Approx(2 * std::numbers::pi / 40).epsilon(1e-15));
  CHECK(g.x(0) == -20.0);
  CHECK(g.x(64) == 0.0);
  CHECK(g.p(64) == 0.0);
  CHECK(g.positions().size() == 128);
  CHECK_THROWS_AS(make_grid(100, 40), InvariantError);
  CHECK_THROWS_AS(make_grid(8, 40), InvariantError);
  CHECK_THROWS_AS(make_grid(64, -1), InvariantError);
}

TEST_CASE("basis change is unitary and matches the dense matrix") {
  const Grid g = make_grid(32, 10, 0.7);
  const BasisTransform t(g);
  const Eigen::MatrixXcd U = t.matrix();
  CHECK((U * U.adjoint() - Eigen::MatrixXcd::Identity(32, 32)).cwiseAbs().maxCoeff() <= 1e-12);

  // U_aj = exp(-i p_a x_j / hbar) / sqrt(N)
  double err = 0;
  for (std::size_t a = 0; a < g.N; ++a)
    for (std::size_t j = 0; j < g.N; ++j)
      err = std::max(err, std::abs(U(a, j) - std::polar(1.0 / std::sqrt(32.0), -g.p(a) * g.x(j) / g.hbar)));
  CHECK(err <= 1e-12);

  const Eigen::MatrixXcd rho = random_density(32, 3);
  Eigen::MatrixXcd m = rho;
  t.to_momentum(m);
  CHECK((m - U * rho * U.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
  t.to_position(m);
  CHECK((m - rho).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Gaussian state") {
  const Grid g = make_grid(128, 40);
  const auto rho = gaussian_state(g, 1.0, 0.5, 1.5);
  CHECK(std::abs(trace_of(rho) - 1.0) <= 1e-12);
  CHECK(hermiticity_error(rho.values) <= 1e-14);
  CHECK(min_eigenvalue(rho.values) >= -1e-12);
  // pure
  CHECK(std::abs((rho.values * rho.values).trace().real() - 1.0) <= 1e-12);

  const auto mom = to_momentum(rho);
  CHECK(mom.rep == Representation::momentum);
  CHECK(std::abs(trace_of(mom) - 1.0) <= 1e-12);
  const auto back = to_position(mom);
  CHECK((back.values - rho.values).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("hermitian helpers") {
  Eigen::MatrixXcd m = random_density(16, 4);
  m(0, 1) += Complex(0.1, 0.2);
  CHECK(hermiticity_error(m) > 0.1);
  make_hermitian(m);
  CHECK(hermiticity_error(m) == 0.0);
}
