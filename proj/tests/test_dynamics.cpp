#include "atmos/dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace atmos;

namespace
{

WaveState zero_state(const WeightedGrid& g)
{
  WaveState s;
  s.y.assign(g.n(), 0.0);
  s.yt.assign(g.n(), 0.0);
  return s;
}

double sup_abs(const std::vector<double>& v)
{
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

// Wave operator with a smooth bump in b2; b1, b0 default to L1, L0.
LinearOperatorCoeffs bumped(const ModelParams& p)
{
  auto c = build_L_coeffs(p);
  const double xc = 0.5 * c.x_R();
  c.set_wave_fields([xc](double x) { return 1.0 + 0.2 * std::exp(-(x - xc) * (x - xc)); }, nullptr, nullptr);
  return c;
}

struct Manufactured
{
  std::vector<double> profile; // g / sin t
  std::vector<double> shape;   // (x_R - x) x
};

Manufactured manufactured(const LinearOperatorCoeffs& c, const WeightedGrid& g)
{
  Manufactured m;
  const double xR = c.x_R(), N = c.N();
  for (int i = 0; i < g.n(); ++i) {
    const double x = g.x()[i];
    const double s = (xR - x) * x;
    m.shape.push_back(s);
    m.profile.push_back(-s - c.b2(x) * (0.5 * N * xR - (N + 2) * x) + c.b1(x) * x * (xR - 2 * x) + c.b0(x) * s);
  }
  return m;
}

std::vector<double> manufactured_final(const LinearOperatorCoeffs& c, const WeightedGrid& g, double T, double dt)
{
  const Manufactured m = manufactured(c, g);
  WaveState s = zero_state(g);
  s.yt = m.shape;
  TimeOptions o;
  o.T = T;
  o.dt = dt;
  const Forcing f = [&](double t, std::vector<double>& out) {
    out.resize(g.n());
    for (int i = 0; i < g.n(); ++i)
      out[i] = std::sin(t) * m.profile[i];
  };
  return linear_wave_solve(c, g, f, s, o).final_state.y;
}

} // namespace

TEST(Linear, ZeroStaysZero)
{
  const auto c = build_L_coeffs(make_params(1.5, 2.0));
  const WeightedGrid g(c, 64);
  TimeOptions o;
  o.T = 3.0;
  const auto tr = linear_wave_solve(c, g, nullptr, zero_state(g), o);
  for (double v : tr.final_state.y)
    EXPECT_EQ(v, 0.0);
  for (double E : tr.energy)
    EXPECT_EQ(E, 0.0);
  EXPECT_EQ(tr.t.size(), std::size_t(tr.steps + 1));
  EXPECT_NEAR(tr.t.back(), 3.0, 1e-12);
}

TEST(Linear, ModeReturnsAfterOnePeriod)
{
  const auto c = build_L_coeffs(make_params(1.5, 2.0));
  std::vector<double> err, hs;
  for (int n : {65, 129, 257}) {
    const WeightedGrid g(c, n);
    const auto m = collocation_spectrum(c, g, 1)[0];
    WaveState s = zero_state(g);
    s.y = m.phi;
    TimeOptions o;
    o.T = 2 * std::numbers::pi / std::sqrt(m.lambda);
    const auto tr = linear_wave_solve(c, g, nullptr, s, o);
    double e = 0.0;
    for (int i = 0; i < n; ++i)
      e = std::max(e, std::abs(tr.final_state.y[i] - m.phi[i]) + std::abs(tr.final_state.yt[i]) / std::sqrt(m.lambda));
    err.push_back(e / sup_abs(m.phi));
    hs.push_back(g.h());
  }
  for (int k = 1; k < 3; ++k)
    EXPECT_GE(std::log(err[k - 1] / err[k]) / std::log(hs[k - 1] / hs[k]), 1.9);
}

TEST(Linear, ManufacturedSpatialOrder)
{
  const auto p = make_params(1.5, 2.0);
  const auto c = bumped(p);
  const double T = 2.0;
  const WeightedGrid finest(c, 257);
  const double dt = 0.5 * auto_time_step(assemble_wave_operator(c, finest), finest, 1.2, 0.5);
  std::vector<double> err;
  for (int n : {65, 129, 257}) {
    const WeightedGrid g(c, n);
    const auto y = manufactured_final(c, g, T, dt);
    double e = 0.0;
    for (int i = 0; i < n; ++i)
      e = std::max(e, std::abs(y[i] - std::sin(T) * (c.x_R() - g.x()[i]) * g.x()[i]));
    err.push_back(e);
  }
  EXPECT_GE(std::log2(err[0] / err[1]), 1.9);
  EXPECT_GE(std::log2(err[1] / err[2]), 1.9);
}

TEST(Linear, ManufacturedTemporalOrder)
{
  const auto p = make_params(1.5, 2.0);
  const auto c = bumped(p);
  const WeightedGrid g(c, 129);
  const double dt = auto_time_step(assemble_wave_operator(c, g), g, 1.2, 0.5);
  const auto a = manufactured_final(c, g, 2.0, dt);
  const auto b = manufactured_final(c, g, 2.0, dt / 2);
  const auto d = manufactured_final(c, g, 2.0, dt / 4);
  double e1 = 0.0, e2 = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    e1 = std::max(e1, std::abs(a[i] - b[i]));
    e2 = std::max(e2, std::abs(b[i] - d[i]));
  }
  EXPECT_GE(std::log2(e1 / e2), 3.5);
}

TEST(Linear, FreeOscillationEnergyDrift)
{
  const auto c = laplacian_coeffs(6.0, 1.0);
  const WeightedGrid g(c, 129);
  const auto m = collocation_spectrum(c, g, 1)[0];
  WaveState s = zero_state(g);
  s.y = m.phi;
  std::vector<double> drift;
  const double dt0 = auto_time_step(assemble_wave_operator(c, g), g, 1.0, 0.5);
  for (double dt : {dt0, dt0 / 2}) {
    TimeOptions o;
    o.T = 3 * 2 * std::numbers::pi / std::sqrt(m.lambda_grid);
    o.dt = dt;
    const auto tr = linear_wave_solve(c, g, nullptr, s, o);
    double d = 0.0;
    for (double E : tr.energy)
      d = std::max(d, std::abs(E - tr.energy[0]) / tr.energy[0]);
    drift.push_back(d);
  }
  EXPECT_LT(drift[0], 1e-6);
  EXPECT_GE(std::log2(drift[0] / drift[1]), 3.5);
}

TEST(Linear, ForcedEnergyConstantIsMeshStable)
{
  const auto p = make_params(1.5, 2.0);
  const auto c = bumped(p);
  std::vector<double> C;
  for (int n : {128, 256, 512}) {
    const WeightedGrid g(c, n);
    std::vector<double> prof(n);
    for (int i = 0; i < n; ++i)
      prof[i] = (c.x_R() - g.x()[i]) * std::exp(-g.x()[i]);
    const Forcing f = [&](double t, std::vector<double>& out) {
      out.resize(n);
      const double a = smooth_ramp(t, 0.5, 1.5) * std::sin(1.3 * t);
      for (int i = 0; i < n; ++i)
        out[i] = a * prof[i];
    };
    TimeOptions o;
    o.T = 8.0;
    const auto tr = linear_wave_solve(c, g, f, zero_state(g), o);
    // nothing moves before the ramp starts
    for (std::size_t k = 0; k < tr.t.size() && tr.t[k] <= 0.5; ++k)
      EXPECT_EQ(tr.energy[k], 0.0);
    const auto rep = energy_inequality_check(tr);
    EXPECT_TRUE(std::isfinite(rep.C));
    EXPECT_GT(rep.C, 0.0);
    C.push_back(rep.C);
  }
  EXPECT_LT(std::abs(C[1] - C[0]) / C[2], 0.1);
  EXPECT_LT(std::abs(C[2] - C[1]) / C[2], 0.1);
}

TEST(Linear, OversizedStepIsDetected)
{
  const auto c = build_L_coeffs(make_params(1.5, 2.0));
  const WeightedGrid g(c, 128);
  const auto m = collocation_spectrum(c, g, 1)[0];
  WaveState s = zero_state(g);
  s.y = m.phi;
  TimeOptions o;
  o.dt = 3.0 * auto_time_step(assemble_L(c, g).A, g, 1.0, 10.0);
  o.T = 400 * o.dt;
  EXPECT_THROW(linear_wave_solve(c, g, nullptr, s, o), StabilityError);
}

TEST(Linear, Preconditions)
{
  auto c = build_L_coeffs(make_params(1.5, 2.0));
  c.set_wave_fields([](double) { return 1.7; }, nullptr, nullptr);
  const WeightedGrid g(c, 64);
  TimeOptions o;
  EXPECT_THROW(linear_wave_solve(c, g, nullptr, zero_state(g), o), DomainError);
  WaveState bad;
  bad.y.assign(10, 0.0);
  bad.yt.assign(10, 0.0);
  EXPECT_THROW(linear_wave_solve(build_L_coeffs(make_params(1.5, 2.0)), g, nullptr, bad, o), GridError);
}

TEST(Ramp, Smooth)
{
  EXPECT_EQ(smooth_ramp(0.4, 0.5, 1.5), 0.0);
  EXPECT_EQ(smooth_ramp(1.6, 0.5, 1.5), 1.0);
  EXPECT_NEAR(smooth_ramp(1.0, 0.5, 1.5), 0.5, 1e-15);
  double prev = 0.0;
  for (double t = 0.5; t <= 1.5; t += 0.01) {
    const double a = smooth_ramp(t, 0.5, 1.5);
    EXPECT_GE(a, prev);
    prev = a;
  }
}

class Nonlinear : public ::testing::Test
{
protected:
  ModelParams p = make_params(1.5, 2.0);
  LinearOperatorCoeffs c = build_L_coeffs(p);
  WeightedGrid g{c, 128};
  EigenMode mode = collocation_spectrum(c, g, 1)[0];
  double period = 2 * std::numbers::pi / std::sqrt(mode.lambda_grid);

  NonlinearRun run(double eps, double periods)
  {
    TimeOptions o;
    o.T = periods * period;
    return nonlinear_simulate(p, c, g, LinearModeSolution::single(mode), eps, o);
  }
};

TEST_F(Nonlinear, ZeroAmplitudeStaysZero)
{
  const auto r = run(0.0, 0.5);
  for (double v : r.traj.final_state.y)
    EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.report.e_sup, 0.0);
}

TEST_F(Nonlinear, QuadraticDeviation)
{
  const auto a = run(4e-3, 2.0);
  const auto b = run(2e-3, 2.0);
  const double ratio = a.report.e_sup / b.report.e_sup;
  EXPECT_GE(ratio, 3.2);
  EXPECT_LE(ratio, 4.8);
  const double wr = a.report.w_sup / b.report.w_sup;
  EXPECT_GE(wr, 1.6);
  EXPECT_LE(wr, 2.4);
  EXPECT_GT(a.report.min_margin, 0.9);
}

TEST_F(Nonlinear, PeriodAndFreeBoundary)
{
  const double eps = 1e-3;
  const auto r = run(eps, 5.5);
  const auto pe = period_measure(r.traj.t, r.traj.boundary);
  EXPECT_NEAR(pe.period, period, 0.01 * period);
  // R_F - R against eps R sin(sqrt(lambda) t) Phi(0)
  double worst = 0.0;
  const double w = std::sqrt(mode.lambda_grid);
  for (std::size_t k = 0; k < r.traj.t.size(); ++k) {
    const double lin = eps * p.R() * std::sin(w * r.traj.t[k]) * mode.phi0;
    const double RF = p.R() * (1.0 + r.traj.boundary[k]);
    worst = std::max(worst, std::abs(RF - p.R() - lin));
  }
  EXPECT_LT(worst / (eps * p.R() * mode.phi0), 20 * eps);
}

TEST_F(Nonlinear, InadmissibleAmplitudeAborts)
{
  EXPECT_THROW(run(5.0, 1.0), AdmissibilityError);
  EXPECT_THROW(run(-1.0, 1.0), DomainError);
}

TEST_F(Nonlinear, EulerFieldsOfRun)
{
  const double eps = 1e-3;
  TimeOptions o;
  o.T = 0.3 * period;
  const auto r = nonlinear_simulate(p, c, g, LinearModeSolution::single(mode), eps, o);
  const auto f = euler_reconstruct(p, g, r.traj.final_state);
  EXPECT_NEAR(f.R_F, p.R() * (1 + r.traj.final_state.y[0]), 1e-15);
  const double kappa = boundary_ordering_kappa(p, f);
  EXPECT_GT(kappa, 1.0);
  EXPECT_LT(kappa - 1.0, 50 * eps);
  for (std::size_t i = 0; i < f.r.size(); ++i)
    EXPECT_NEAR(f.u[i], f.rbar[i] * r.traj.final_state.yt[i], 1e-15);
}

TEST(Euler, EquilibriumState)
{
  for (double gam : {1.5, 5.0 / 3.0}) {
    const auto p = make_params(gam, 2.0);
    const auto c = build_L_coeffs(p);
    const WeightedGrid g(c, 256);
    const auto f = euler_reconstruct(p, g, zero_state(g));
    EXPECT_EQ(f.R_F, p.R());
    for (std::size_t i = 0; i < f.r.size(); ++i) {
      EXPECT_EQ(f.rho[i], equilibrium_density(p, f.rbar[i]));
      EXPECT_EQ(f.u[i], 0.0);
      EXPECT_EQ(f.r[i], f.rbar[i]);
    }
    EXPECT_NEAR(f.m[0], total_mass(p), 1e-9 * total_mass(p));
    EXPECT_EQ(f.m.back(), 0.0);
    const auto e = vacuum_exponent_fit(p, f);
    EXPECT_NEAR(e.exponent, 1.0 / (gam - 1.0), 0.02 / (gam - 1.0));
    EXPECT_GE(e.points, 3);
    EXPECT_EQ(boundary_ordering_kappa(p, f), 1.0);
  }
}

TEST(Euler, CrossingIsAMappingError)
{
  const auto p = make_params(1.5, 2.0);
  const auto c = build_L_coeffs(p);
  const WeightedGrid g(c, 64);
  WaveState s = zero_state(g);
  s.y[20] = 0.5;
  EXPECT_THROW(euler_reconstruct(p, g, s), MappingError);
  EXPECT_THROW(vacuum_exponent_fit(p, euler_reconstruct(p, WeightedGrid(c, 8), zero_state(WeightedGrid(c, 8)))),
               InsufficientDataError);
}

TEST(Series, PeriodOfSinusoid)
{
  std::vector<double> t, s;
  const double P = 2.7;
  for (int k = 0; k <= 2000; ++k) {
    t.push_back(0.01 * k);
    s.push_back(std::sin(2 * std::numbers::pi * t.back() / P + 0.3));
  }
  const auto e = period_measure(t, s);
  EXPECT_NEAR(e.period, P, 1e-3);
  EXPECT_GE(e.crossings, 10);
  std::vector<double> ts(t.begin(), t.begin() + 50), ss(s.begin(), s.begin() + 50);
  EXPECT_THROW(period_measure(ts, ss), InsufficientDataError);
}

TEST(Series, TwoModePeaks)
{
  std::vector<double> t, s;
  for (int k = 0; k <= 20000; ++k) {
    t.push_back(0.01 * k);
    s.push_back(std::sin(1.3 * t.back()) + 0.5 * std::sin(2.9 * t.back() + 1.0));
  }
  const auto pk = spectral_peaks(t, s, 2, 5.0);
  ASSERT_EQ(pk.size(), 2u);
  EXPECT_NEAR(pk[0].omega, 1.3, 5e-3);
  EXPECT_NEAR(pk[1].omega, 2.9, 5e-3);
  EXPECT_GT(pk[0].amplitude, pk[1].amplitude);
}
