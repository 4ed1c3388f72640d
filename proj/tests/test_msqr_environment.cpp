#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qbm/momentum_lattice.hpp"
#include "qbm/msqr_environment.hpp"
#include "qbm/physical_core.hpp"

using namespace qbm;

TEST_CASE("band-limited shift of lattice samples") {
  const MomentumLattice lattice{256, 0.05};
  std::vector<Complex> f(lattice.n);
  auto g = [](double k) { return std::exp(-k * k / 0.5) * std::polar(1.0, 0.3 * k); };
  for (std::size_t j = 0; j < lattice.n; ++j) f[j] = g(lattice.k(j));
  for (double shift : {0.0, 0.013, -0.2, 1.37}) {
    const auto h = shifted_samples(f, lattice.dk, shift);
    double err = 0;
    for (std::size_t j = 0; j < lattice.n; ++j) err = std::max(err, std::abs(h[j] - g(lattice.k(j) + shift)));
    CHECK(err <= 1e-12);
  }
  const Support s = support_of(f);
  CHECK(s.first > 0);
  CHECK(s.last < lattice.n - 1);
  CHECK(std::abs(f[s.first]) >= std::abs(f[s.first - 1]));
}

TEST_CASE("thermal distribution") {
  ThermalSpec t;
  const MomentumLattice lattice = default_thermal_lattice(t);
  CHECK(lattice.n == 512);
  const EnvState env = thermal_distribution(t, lattice);

  double sum = 0, k2 = 0, peak = 0;
  std::size_t arg = 0;
  for (std::size_t j = 0; j < lattice.n; ++j) {
    sum += env.weights[j] * lattice.dk;
    k2 += lattice.k(j) * lattice.k(j) * env.weights[j] * lattice.dk;
    if (env.weights[j] > peak) {
      peak = env.weights[j];
      arg = j;
    }
  }
  CHECK(std::abs(sum - 1.0) <= 1e-10);
  CHECK(lattice.k(arg) == 0.0);
  for (std::size_t j = 1; j < lattice.n; ++j) CHECK(env.weights[j] == doctest::Approx(env.weights[lattice.n - j]));
  CHECK(k2 == doctest::Approx(t.m * t.k_B * t.T / 2).epsilon(1e-6));

  SUBCASE("standard convention doubles the variance") {
    ThermalSpec s = t;
    s.convention = ThermalConvention::standard;
    CHECK(s.momentum_variance() == 2 * t.momentum_variance());
  }

  SUBCASE("too narrow a lattice is rejected") {
    const MomentumLattice narrow{64, 5.0 * std::sqrt(t.momentum_variance()) * 2 / 64};
    CHECK_THROWS_AS(thermal_distribution(t, narrow), InvariantError);
  }
  CHECK_THROWS_AS(thermal_distribution(ThermalSpec{1, 0}, lattice), InvariantError);
}

TEST_CASE("square-root state") {
  ThermalSpec t;
  t.T = 2.5;
  const MomentumLattice lattice = default_thermal_lattice(t, 64, 8.0);
  const EnvState diag = thermal_distribution(t, lattice);
  const EnvState sq = msqr_density_matrix(diag);
  REQUIRE(sq.kernel.has_value());
  const Eigen::MatrixXd& K = *sq.kernel;

  for (std::size_t j = 0; j < lattice.n; ++j)
    CHECK(std::abs(K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) - diag.weights[j]) <= 1e-12);
  CHECK(std::abs(purity(sq) - 1.0) <= 1e-10);
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("one nonzero eigenvalue with eigenvector sqrt(rho)") {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K * lattice.dk);
    const auto& ev = es.eigenvalues();
    CHECK(ev(ev.size() - 1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(ev(ev.size() - 2)) <= 1e-12);
    Eigen::VectorXd v = es.eigenvectors().col(ev.size() - 1);
    Eigen::VectorXd root(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) root(j) = std::sqrt(diag.weights[static_cast<std::size_t>(j)]);
    root.normalize();
    CHECK(std::abs(std::abs(v.dot(root)) - 1.0) <= 1e-10);
  }

  SUBCASE("outer product of the wave packet") {
    const MoleculePacket psi = msqr_wave_packet(t, lattice);
    double err = 0;
    for (Eigen::Index a = 0; a < K.rows(); ++a)
      for (Eigen::Index b = 0; b < K.cols(); ++b)
        err = std::max(err, std::abs(K(a, b) - std::real(psi.amplitudes[static_cast<std::size_t>(a)] *
                                                         std::conj(psi.amplitudes[static_cast<std::size_t>(b)]))));
    CHECK(err <= 1e-10);
  }
  CHECK_THROWS_AS(purity(diag), InvariantError);
}

TEST_CASE("square-root wave packet") {
  ThermalSpec t;
  const MomentumLattice lattice = default_thermal_lattice(t);
  const MoleculePacket psi = msqr_wave_packet(t, lattice);
  const EnvState env = thermal_distribution(t, lattice);
  CHECK(std::abs(psi.norm() - 1.0) <= 1e-10);
  for (std::size_t j = 0; j < lattice.n; ++j) CHECK(std::abs(std::norm(psi.amplitudes[j]) - env.weights[j]) <= 1e-10);

  // psi(x) = sum_k psi(k) exp(i k x / hbar) dk / sqrt(2 pi hbar), evaluated directly.
  const double hbar = t.hbar;
  const double expected_var = hbar * hbar / (2 * t.m * t.k_B * t.T);
  const double h = 0.01;
  double norm = 0, mean = 0, second = 0;
  for (int i = -1500; i <= 1500; ++i) {
    const double x = i * h;
    Complex amp = 0;
    for (std::size_t j = 0; j < lattice.n; ++j)
      amp += psi.amplitudes[j] * std::polar(1.0, lattice.k(j) * x / hbar) * lattice.dk;
    const double w = std::norm(amp) / (2 * std::numbers::pi * hbar) * h;
    norm += w;
    mean += x * w;
    second += x * x * w;
  }
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(mean) <= 1e-12);
  CHECK(second / norm == doctest::Approx(expected_var).epsilon(1e-6));

  double k_mean = 0;
  for (std::size_t j = 0; j < lattice.n; ++j) k_mean += lattice.k(j) * std::norm(psi.amplitudes[j]) * lattice.dk;
  CHECK(std::abs(k_mean) <= 1e-12);

  SUBCASE("square-root state never decoheres completely") {
    for (double dp : {0.1, 1.0, 10.0, 50.0}) CHECK(std::abs(decoherence_factor(dp, 0, psi, 100, 1).value) > 0.0);
  }
}
