#include <doctest.h>

#include <cmath>

#include "qbm/master_equations.hpp"
#include "qbm/physical_core.hpp"

using namespace qbm;

namespace {

// max |rho(x, x', t) - rho0(x, x') exp(-Lambda (x - x')^2 t)| over all elements
double dephasing_error(const DensityMatrixState& rho0, const DensityMatrixState& rho, double lambda, double t) {
  double err = 0;
  const auto n = rho0.values.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = rho0.grid.x(static_cast<std::size_t>(i)) - rho0.grid.x(static_cast<std::size_t>(j));
      err = std::max(err, std::abs(rho.values(i, j) - rho0.values(i, j) * std::exp(-lambda * d * d * t)));
    }
  return err;
}

GeneratorSpec dephasing(double lambda) {
  GeneratorSpec s;
  s.kind = GeneratorKind::jz;
  s.lambda = lambda;
  s.suppress_hamiltonian = true;
  return s;
}

}  // namespace

TEST_CASE("energy eigenprojector stays put") {
  const Grid g = make_grid(32, 10);
  const BasisTransform t(g);
  const Eigen::VectorXcd plane = t.matrix().adjoint().col(13);
  const DensityMatrixState rho0{plane * plane.adjoint(), Representation::position, g};
  GeneratorSpec spec;
  spec.kind = GeneratorKind::unitary;
  PropagationOptions o;
  o.dt = 0.01;
  o.t_end = 1.0;
  const auto rho = propagate(rho0, spec, o);
  CHECK((rho.values - rho0.values).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("pure dephasing has a closed form") {
  const Grid g = make_grid(64, 20);
  const auto rho0 = gaussian_state(g, 0.5, 0.3, 1.2);
  const double lambda = 0.5;

  PropagationOptions o;
  o.dt = 1e-3;
  o.t_end = 2.0;
  double drift = 0, herm = 0;
  std::size_t calls = 0;
  o.record_every = 100;
  o.observer = [&](double, const DensityMatrixState& r) {
    ++calls;
    drift = std::max(drift, std::abs(trace_of(r) - 1.0));
    herm = std::max(herm, hermiticity_error(r.values));
  };
  const auto rho = propagate(rho0, dephasing(lambda), o);
  CHECK(calls == 21);
  CHECK(drift <= 1e-6);
  CHECK(herm <= 1e-10);

  const double support = 1e-6 * rho0.values.cwiseAbs().maxCoeff();
  double rel = 0;
  for (Eigen::Index j = 0; j < 64; ++j)
    for (Eigen::Index i = 0; i < 64; ++i) {
      if (std::abs(rho0.values(i, j)) < support) continue;
      const double d = g.x(static_cast<std::size_t>(i)) - g.x(static_cast<std::size_t>(j));
      const Complex expected = rho0.values(i, j) * std::exp(-lambda * d * d * 2.0);
      rel = std::max(rel, std::abs(rho.values(i, j) - expected) / std::abs(expected));
    }
  CHECK(rel <= 1e-4);
}

TEST_CASE("fourth-order convergence") {
  const Grid g = make_grid(32, 8);
  const auto rho0 = gaussian_state(g, 0.0, 0.0, 1.0);
  const double lambda = 0.5, t_end = 1.0;
  auto error_at = [&](double dt) {
    PropagationOptions o;
    o.dt = dt;
    o.t_end = t_end;
    return dephasing_error(rho0, propagate(rho0, dephasing(lambda), o), lambda, t_end);
  };
  const double coarse = error_at(0.02), fine = error_at(0.01);
  CAPTURE(coarse);
  CAPTURE(fine);
  CHECK(coarse / fine == doctest::Approx(16.0).epsilon(0.25));
}

TEST_CASE("instability is detected") {
  const Grid g = make_grid(64, 20);
  GeneratorSpec spec;
  spec.kind = GeneratorKind::unitary;
  PropagationOptions o;
  o.dt = 50 * SpectralGenerator(g, spec).suggested_dt();
  o.t_end = 200 * o.dt;
  CHECK_THROWS_AS(propagate(gaussian_state(g, 0, 0, 0.4), spec, o), NumericalInstability);
}

TEST_CASE("moments") {
  const Grid g = make_grid(128, 40);

  SUBCASE("minimum-uncertainty Gaussian") {
    const auto rho = gaussian_state(g, 1.0, -0.5, 1.3);
    const Moments m = moments(rho);
    CHECK(m.x == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(m.p == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(m.V_xx == doctest::Approx(1.3 * 1.3).epsilon(1e-8));
    CHECK(std::abs(m.V_xp) <= 1e-10);
    CHECK(std::abs(m.V_xx * m.V_pp - 0.25) <= 1e-6);
  }

  SUBCASE("symmetric state has zero means") {
    const Moments m = moments(gaussian_state(g, 0.0, 0.0, 2.0));
    CHECK(std::abs(m.x) <= 1e-12);
    CHECK(std::abs(m.p) <= 1e-12);
  }

  SUBCASE("either representation gives the same moments") {
    // a chirped packet has V_xp != 0
    auto rho = gaussian_state(g, 0.7, 0.4, 1.5);
    for (Eigen::Index i = 0; i < 128; ++i)
      for (Eigen::Index j = 0; j < 128; ++j) {
        const double xi = g.x(static_cast<std::size_t>(i)), xj = g.x(static_cast<std::size_t>(j));
        rho.values(i, j) *= std::polar(1.0, 0.1 * (xi * xi - xj * xj));
      }
    const Moments a = moments(rho), b = moments(to_momentum(rho));
    CHECK(std::abs(a.V_xp) > 0.1);
    CHECK(std::abs(a.x - b.x) <= 1e-8);
    CHECK(std::abs(a.p - b.p) <= 1e-8);
    CHECK(std::abs(a.V_xx - b.V_xx) <= 1e-8);
    CHECK(std::abs(a.V_xp - b.V_xp) <= 1e-8);
    CHECK(std::abs(a.V_pp - b.V_pp) <= 1e-8);
    CHECK(a.V_xx * a.V_pp - a.V_xp * a.V_xp >= 0.25 - 1e-8);
  }
}

TEST_CASE("moment equations") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::qfpe;
  spec.M = 2.0;
  spec.eta = 0.5;
  spec.D_p = 1.0;  // = eta M k_B T with k_B T = 1

  SUBCASE("stationary momentum variance is D_p / eta") {
    const Moments m = moment_ode_oracle({0, 1, 1, 0, 0.2}, spec, 60.0);
    CHECK(m.V_pp == doctest::Approx(spec.D_p / spec.eta).epsilon(1e-10));
  }

  SUBCASE("pure damping") {
    spec.D_p = 0;
    const Moments m = moment_ode_oracle({0, 3, 1, 0, 0.2}, spec, 2.0);
    CHECK(m.p == doctest::Approx(3 * std::exp(-1.0)).epsilon(1e-12));
  }

  SUBCASE("grid propagation follows the moment equations") {
    spec.D_x = 0.1;
    const Grid g = make_grid(64, 24);
    const auto rho0 = gaussian_state(g, 0.3, 0.5, 1.0);
    const Moments m0 = moments(rho0);
    PropagationOptions o;
    o.dt = 2e-3;
    o.t_end = 2.0;
    o.record_every = 100;
    double worst = 0;
    o.observer = [&](double t, const DensityMatrixState& r) {
      const Moments a = moments(r), b = moment_ode_oracle(m0, spec, t);
      worst = std::max({worst, std::abs(a.V_xx / b.V_xx - 1), std::abs(a.V_pp / b.V_pp - 1),
                        std::abs(a.p - b.p), std::abs(a.x - b.x), std::abs(a.V_xp - b.V_xp)});
    };
    propagate(rho0, spec, o);
    CHECK(worst <= 1e-6);
  }

  SUBCASE("harmonic potential") {
    spec.potential = Potential::harmonic;
    spec.omega = 0.8;
    spec.D_x = 0.05;
    const Grid g = make_grid(64, 24);
    const auto rho0 = gaussian_state(g, 1.0, 0.0, 0.8);
    PropagationOptions o;
    o.dt = 2e-3;
    o.t_end = 1.0;
    const Moments a = moments(propagate(rho0, spec, o));
    const Moments b = moment_ode_oracle(moments(rho0), spec, 1.0);
    CHECK(std::abs(a.x - b.x) <= 1e-6);
    CHECK(std::abs(a.V_xx / b.V_xx - 1) <= 1e-6);
    CHECK(std::abs(a.V_xp - b.V_xp) <= 1e-6);
  }
}

TEST_CASE("coherence length") {
  const Grid g = make_grid(128, 40);

  SUBCASE("pure Gaussian: 2 sqrt(2) sigma") {
    const double sigma = 1.5;
    CHECK(coherence_length(gaussian_state(g, 0, 0, sigma)) == doctest::Approx(2 * std::sqrt(2.0) * sigma).epsilon(0.05));
  }

  SUBCASE("after dephasing an initially flat profile: (Lambda t)^(-1/2)") {
    const double lambda = 0.5, t = 2.0;
    PropagationOptions o;
    o.dt = 1e-3;
    o.t_end = t;
    const auto rho = propagate(gaussian_state(g, 0, 0, 5.0), dephasing(lambda), o);
    CHECK(coherence_length(rho) == doctest::Approx(1.0 / std::sqrt(lambda * t)).epsilon(0.10));
  }

  SUBCASE("diagonal matrix sits at the resolution floor") {
    auto rho = gaussian_state(g, 0, 0, 2.0);
    rho.values = Eigen::MatrixXcd(rho.values.diagonal().asDiagonal());
    CHECK(coherence_length(rho) <= 2 * g.dx());
  }

  SUBCASE("flat profile cannot be fitted") {
    DensityMatrixState flat{Eigen::MatrixXcd::Constant(128, 128, 1.0 / 128), Representation::position, g};
    CHECK_THROWS_AS(coherence_length(flat), std::runtime_error);
  }
}
