// Parallel kernels against their serial reference implementations.

#include <doctest.h>
#include <omp.h>

#include <random>

#include "qbm/classical_oracle.hpp"
#include "qbm/collision_engine.hpp"
#include "qbm/generator.hpp"

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

TEST_CASE("spectral generator agrees with the dense commutators") {
  for (std::size_t n : {16, 64, 128}) {
    const Grid g = make_grid(n, 0.3 * static_cast<double>(n), 1.1);
    const Eigen::MatrixXcd rho = random_density(static_cast<Eigen::Index>(n), static_cast<unsigned>(n));
    const Operators ops = build_operators(g, 1.7);
    for (auto kind : {GeneratorKind::unitary, GeneratorKind::jz, GeneratorKind::qfpe}) {
      GeneratorSpec spec;
      spec.kind = kind;
      spec.lambda = 0.6;
      spec.D_p = 0.5;
      spec.eta = 0.25;
      spec.D_x = 0.15;
      spec.M = 1.7;
      const Eigen::MatrixXcd a = SpectralGenerator(g, spec).apply(rho);
      const Eigen::MatrixXcd b = reference::generator_apply(rho, spec, ops, g.hbar);
      CAPTURE(n);
      CAPTURE(to_string(kind));
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * b.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("spectral generator output does not depend on the thread count") {
  const Grid g = make_grid(64, 20);
  const Eigen::MatrixXcd rho = random_density(64, 1);
  GeneratorSpec spec;
  spec.kind = GeneratorKind::qfpe;
  spec.D_p = 0.5;
  spec.eta = 0.25;
  spec.D_x = 0.15;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Eigen::MatrixXcd one = SpectralGenerator(g, spec).apply(rho);
  omp_set_num_threads(4);
  const Eigen::MatrixXcd four = SpectralGenerator(g, spec).apply(rho);
  omp_set_num_threads(saved);
  CHECK((one - four).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parallel Langevin ensemble is bit-identical to the serial one") {
  const auto init = sample_gaussian_ensemble(37, 0.5, -1.0, 2.0, 0.3, 4);
  const LangevinParams params{2.0, 0.5, 1.5};
  const int saved = omp_get_max_threads();
  for (int threads : {1, 3, 8}) {
    omp_set_num_threads(threads);
    const auto par = langevin_simulate(params, init, 0.01, 3.0, 7, 99);
    const auto ser = reference::langevin_simulate(params, init, 0.01, 3.0, 7, 99);
    REQUIRE(par.members.size() == ser.members.size());
    for (std::size_t i = 0; i < par.members.size(); ++i) {
      CHECK(par.members[i].t == ser.members[i].t);
      CHECK(par.members[i].x == ser.members[i].x);
      CHECK(par.members[i].p == ser.members[i].p);
    }
  }
  omp_set_num_threads(saved);
}

TEST_CASE("parallel overlap batch equals one-at-a-time evaluation") {
  const MomentumLattice lattice{512, 0.02};
  const MoleculePacket psi = gaussian_packet(lattice, 0.4);
  std::vector<double> dps;
  for (int j = 1; j <= 20; ++j) dps.push_back(0.7 * j);
  const auto batch = decoherence_factors(dps, psi, 50, 1);
  for (std::size_t i = 0; i < dps.size(); ++i)
    CHECK(batch[i].value == decoherence_factor(dps[i], 0, psi, 50, 1).value);
}
