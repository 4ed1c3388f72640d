#include "qbm/master_equations.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qbm/physical_core.hpp"

namespace qbm {

DensityMatrixState propagate(const DensityMatrixState& rho0, const GeneratorSpec& spec,
                             const PropagationOptions& options) {
  if (rho0.rep != Representation::position)
    throw InvariantError("propagate requires the position representation (representation mismatch)");
  if (!(options.dt > 0) || !(options.t_end >= 0)) throw InvariantError("dt > 0 and t_end ≥ 0 violated");

  const SpectralGenerator gen(rho0.grid, spec);
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(options.t_end / options.dt - 1e-9)));
  const double dt = options.t_end / static_cast<double>(steps);

  DensityMatrixState rho = rho0;
  if (options.observer) options.observer(0.0, rho);
  if (options.t_end == 0.0) return rho;

  const auto n = rho.values.rows();
  Eigen::MatrixXcd k1(n, n), k2(n, n), k3(n, n), k4(n, n), stage(n, n);
  for (std::size_t step = 1; step <= steps; ++step) {
    auto& y = rho.values;
    gen.apply(y, k1);
    stage = y + (0.5 * dt) * k1;
    gen.apply(stage, k2);
    stage = y + (0.5 * dt) * k2;
    gen.apply(stage, k3);
    stage = y + dt * k3;
    gen.apply(stage, k4);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    make_hermitian(y);

    const double t = static_cast<double>(step) * dt;
    const double tr = y.trace().real();
    if (!std::isfinite(tr) || !y.allFinite() || std::abs(tr - 1.0) > options.trace_abort) {
      std::ostringstream msg;
      msg << "propagation unstable at step " << step << " (t = " << t << "): trace = " << tr
          << ", dt = " << dt << ", suggested dt <= " << gen.suggested_dt();
      throw NumericalInstability(msg.str());
    }
    const bool record = options.record_every > 0 && step % options.record_every == 0;
    if (options.observer && (record || step == steps)) options.observer(t, rho);
  }
  return rho;
}

Moments moments(const DensityMatrixState& rho) {
  const DensityMatrixState pos = to_position(rho);
  const DensityMatrixState mom = to_momentum(rho);
  const Grid& g = rho.grid;
  const auto n = static_cast<Eigen::Index>(g.N);

  Moments m;
  double xx = 0.0, pp = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double w = pos.values(j, j).real();
    const double x = g.x(static_cast<std::size_t>(j));
    m.x += w * x;
    xx += w * x * x;
    const double wp = mom.values(j, j).real();
    const double p = g.p(static_cast<std::size_t>(j));
    m.p += wp * p;
    pp += wp * p * p;
  }
  m.V_xx = xx - m.x * m.x;
  m.V_pp = pp - m.p * m.p;

  // Re tr(X P rho) = Re sum_j x_j (P rho)_jj, with P rho evaluated spectrally.
  Eigen::MatrixXcd p_rho = pos.values;
  const BasisTransform basis(g);
  basis.columns_to_momentum(p_rho);
  for (Eigen::Index a = 0; a < n; ++a) p_rho.row(a) *= g.p(static_cast<std::size_t>(a));
  basis.columns_to_position(p_rho);
  double xp = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) xp += g.x(static_cast<std::size_t>(j)) * p_rho(j, j).real();
  m.V_xp = xp - m.x * m.p;
  return m;
}

namespace {

Moments derivative(const Moments& s, const GeneratorSpec& spec) {
  const double k = spec.potential == Potential::harmonic ? spec.M * spec.omega * spec.omega : 0.0;
  return {
      s.p / spec.M,
      -k * s.x - spec.eta * s.p,
      2.0 * s.V_xp / spec.M + 2.0 * spec.D_x,
      s.V_pp / spec.M - k * s.V_xx - spec.eta * s.V_xp,
      -2.0 * k * s.V_xp - 2.0 * spec.eta * s.V_pp + 2.0 * spec.D_p,
  };
}

Moments axpy(const Moments& y, double h, const Moments& d) {
  return {y.x + h * d.x, y.p + h * d.p, y.V_xx + h * d.V_xx, y.V_xp + h * d.V_xp, y.V_pp + h * d.V_pp};
}

}  // namespace

Moments moment_ode_oracle(const Moments& init, const GeneratorSpec& spec, double t) {
  if (spec.kind != GeneratorKind::qfpe) throw InvariantError("moment_ode_oracle requires a qfpe generator");
  validate(spec);
  if (t == 0.0) return init;
  // Rates are bounded by eta, 1/M and omega; 1e-4 of the slowest scale is far
  // below the tolerance of any comparison made against this oracle.
  const double rate = std::max({spec.eta, 1.0 / spec.M, spec.omega, 1.0});
  const auto steps = static_cast<std::size_t>(std::max(2000.0, std::ceil(std::abs(t) * rate * 1e3)));
  const double h = t / static_cast<double>(steps);
  Moments y = init;
  for (std::size_t i = 0; i < steps; ++i) {
    const Moments d1 = derivative(y, spec);
    const Moments d2 = derivative(axpy(y, 0.5 * h, d1), spec);
    const Moments d3 = derivative(axpy(y, 0.5 * h, d2), spec);
    const Moments d4 = derivative(axpy(y, h, d3), spec);
    y = {
        y.x + h / 6.0 * (d1.x + 2 * d2.x + 2 * d3.x + d4.x),
        y.p + h / 6.0 * (d1.p + 2 * d2.p + 2 * d3.p + d4.p),
        y.V_xx + h / 6.0 * (d1.V_xx + 2 * d2.V_xx + 2 * d3.V_xx + d4.V_xx),
        y.V_xp + h / 6.0 * (d1.V_xp + 2 * d2.V_xp + 2 * d3.V_xp + d4.V_xp),
        y.V_pp + h / 6.0 * (d1.V_pp + 2 * d2.V_pp + 2 * d3.V_pp + d4.V_pp),
    };
  }
  return y;
}

double coherence_length(const DensityMatrixState& rho) {
  const DensityMatrixState pos = to_position(rho);
  const auto n = static_cast<Eigen::Index>(rho.grid.N);
  const double dx = rho.grid.dx();

  Eigen::Index c = 0;
  pos.values.diagonal().real().maxCoeff(&c);
  const double peak = std::abs(pos.values(c, c));
  if (!(peak > 0)) throw std::runtime_error("coherence_length: empty diagonal");

  // s = step * dx realized by (c + ceil(step/2), c - floor(step/2)).
  double sum_s2_y = 0.0, sum_s4 = 0.0;
  bool crossed = false;
  for (Eigen::Index step = 1;; ++step) {
    const Eigen::Index hi = c + (step + 1) / 2;
    const Eigen::Index lo = c - step / 2;
    if (hi >= n || lo < 0) break;
    const double ratio = std::abs(pos.values(hi, lo)) / peak;
    if (ratio < std::exp(-1.0)) crossed = true;
    if (ratio < std::exp(-2.0)) break;
    const double s = static_cast<double>(step) * dx;
    const double y = -std::log(ratio);
    sum_s2_y += s * s * y;
    sum_s4 += s * s * s * s;
  }
  if (!crossed) throw std::runtime_error("coherence_length: profile never decays below 1/e (flat profile)");
  if (sum_s4 == 0.0 || sum_s2_y <= 0.0) return dx;  // resolution floor
  const double a = sum_s2_y / sum_s4;
  return 1.0 / std::sqrt(a);
}

}  // namespace qbm
