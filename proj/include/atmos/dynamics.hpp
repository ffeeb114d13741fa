#ifndef ATMOS_DYNAMICS_HPP
#define ATMOS_DYNAMICS_HPP

// Method-of-lines time integration on a WeightedGrid.
//
//   linear:     h_tt + A h = g,  A = -b2 Lap + b1 x d/dx + b0  (A = L by default)
//   nonlinear:  y_tt + (1 + G_I(y, v)) L y + G_II(y, v) = 0,  v = r y_r
//
// Classical RK4 with a fixed step; the Dirichlet node x = x_R is pinned.

#include "atmos/errors.hpp"
#include "atmos/model.hpp"
#include "atmos/nonlinearity.hpp"
#include "atmos/operator.hpp"
#include "atmos/spectral.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace atmos
{

struct WaveState
{
  double t = 0.0;
  std::vector<double> y;
  std::vector<double> yt;
};

/// Fills g(t, x_i) at the grid nodes (size n).
using Forcing = std::function<void(double t, std::vector<double>& g)>;

struct TimeOptions
{
  double T = 1.0;
  double dt = 0.0; ///< <= 0 selects the automatic step
  double cfl = 0.5;
  int snapshot_every = 0; ///< steps between stored snapshots, 0 for none
};

/// Per-step series plus optional snapshots.
struct Trajectory
{
  std::vector<double> t;
  std::vector<double> boundary;   ///< y(t, x = 0)
  std::vector<double> energy;     ///< E(t)
  std::vector<double> h_norm;     ///< ||h(t)||
  std::vector<double> g_integral; ///< int_0^t ||g||
  std::vector<WaveState> snapshots;
  WaveState final_state;
  double dt = 0.0;
  long steps = 0;
};

/// Smooth cut-off: 0 for t <= t1, 1 for t >= t2, C-infinity in between.
inline double smooth_ramp(double t, double t1, double t2)
{
  if (t <= t1)
    return 0.0;
  if (t >= t2)
    return 1.0;
  const double s = (t - t1) / (t2 - t1);
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

/// E = int (h_t^2 + b2 (Ddot h)^2) x^{N/2-1} dx on the finite-volume masses.
inline double energy(const WeightedGrid& g, const std::vector<double>& b2_face, const WaveState& s)
{
  const int n = g.n();
  const double h = g.h();
  double kin = 0.0, pot = 0.0;
  for (int i = 0; i < n; ++i)
    kin += g.mass()[i] * s.yt[i] * s.yt[i];
  for (int i = 0; i + 1 < n; ++i) {
    const double d = (s.y[i + 1] - s.y[i]) / h;
    pot += b2_face[i] * d * d * g.face_density()[i] * h;
  }
  return kin + pot;
}

inline std::vector<double> face_b2(const LinearOperatorCoeffs& c, const WeightedGrid& g)
{
  std::vector<double> b(g.n() - 1);
  for (int i = 0; i + 1 < g.n(); ++i) {
    const double xf = 0.25 * g.zeta_face(i) * g.zeta_face(i);
    b[i] = c.b2(xf);
  }
  return b;
}

/// Automatic step: CFL in zeta against the wave speed sqrt(b2), capped by the
/// RK4 imaginary-axis limit 2 sqrt 2 on a Gershgorin bound of A.
inline double auto_time_step(const Tridiagonal& A, const WeightedGrid& g, double max_b2, double cfl)
{
  const double dt_cfl = cfl * g.h() / std::sqrt(max_b2);
  const double dt_stab = 0.9 * 2.0 * std::numbers::sqrt2 / std::sqrt(std::max(A.gershgorin(), 1e-300));
  return std::min(dt_cfl, dt_stab);
}

namespace detail
{

inline void check_state(const WeightedGrid& g, const WaveState& s)
{
  if (int(s.y.size()) != g.n() || int(s.yt.size()) != g.n())
    throw GridError("state size does not match grid");
}

inline void pack(const WaveState& s, std::vector<double>& u)
{
  const std::size_t n = s.y.size();
  u.resize(2 * n);
  std::copy(s.y.begin(), s.y.end(), u.begin());
  std::copy(s.yt.begin(), s.yt.end(), u.begin() + n);
}

inline void unpack(const std::vector<double>& u, double t, WaveState& s)
{
  const std::size_t n = u.size() / 2;
  s.t = t;
  s.y.assign(u.begin(), u.begin() + n);
  s.yt.assign(u.begin() + n, u.end());
}

inline double forcing_norm(const WeightedGrid& g, const std::vector<double>& f)
{
  return f.empty() ? 0.0 : weighted_norm(g, f);
}

} // namespace detail

/// h_tt + A h = g from `init`. Throws StabilityError when E outgrows
/// 10 (1+t)^2 (sqrt E(0) + ||h(0)|| + int ||g||)^2.
inline Trajectory linear_wave_solve(const LinearOperatorCoeffs& c, const WeightedGrid& g, const Forcing& forcing,
                                    const WaveState& init, const TimeOptions& opt)
{
  detail::check_state(g, init);
  if (!(opt.T > 0.0))
    throw DomainError("linear_wave_solve: T must be positive");
  const int n = g.n();
  double max_b2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double b2 = c.b2(g.x()[i]);
    if (std::abs(b2 - 1.0) > 0.5)
      throw DomainError("linear_wave_solve: requires |b2 - 1| <= 1/2, violated at x = "
                        + std::to_string(g.x()[i]));
    max_b2 = std::max(max_b2, b2);
  }
  const Tridiagonal A = assemble_wave_operator(c, g);
  const std::vector<double> b2f = face_b2(c, g);
  double dt = opt.dt > 0.0 ? opt.dt : auto_time_step(A, g, max_b2, opt.cfl);
  const long steps = long(std::ceil(opt.T / dt - 1e-9));
  dt = opt.T / steps;

  std::vector<double> gbuf(n, 0.0), Ay;
  auto rhs = [&](const std::vector<double>& u, std::vector<double>& du, double t) {
    du.resize(2 * n);
    std::vector<double> y(u.begin(), u.begin() + n);
    A.apply(y, Ay);
    if (forcing)
      forcing(t, gbuf);
    for (int i = 0; i < n; ++i)
      du[i] = u[n + i];
    for (int i = 0; i + 1 < n; ++i)
      du[n + i] = -Ay[i] + (forcing ? gbuf[i] : 0.0);
    du[n - 1] = 0.0;
    du[2 * n - 1] = 0.0;
  };

  WaveState s = init;
  s.y[n - 1] = 0.0;
  s.yt[n - 1] = 0.0;
  std::vector<double> u;
  detail::pack(s, u);

  Trajectory tr;
  tr.dt = dt;
  tr.steps = steps;
  const auto reserve = std::size_t(steps + 1);
  tr.t.reserve(reserve);
  tr.boundary.reserve(reserve);
  tr.energy.reserve(reserve);
  tr.h_norm.reserve(reserve);
  tr.g_integral.reserve(reserve);

  std::vector<double> gnow(n, 0.0);
  if (forcing)
    forcing(s.t, gnow);
  double gprev = forcing ? detail::forcing_norm(g, gnow) : 0.0;
  double gint = 0.0;
  const double E0 = energy(g, b2f, s);
  const double h0 = weighted_norm(g, s.y);
  auto record = [&](const WaveState& st, double E) {
    tr.t.push_back(st.t);
    tr.boundary.push_back(st.y[0]);
    tr.energy.push_back(E);
    tr.h_norm.push_back(weighted_norm(g, st.y));
    tr.g_integral.push_back(gint);
  };
  record(s, E0);
  if (opt.snapshot_every > 0)
    tr.snapshots.push_back(s);

  boost::numeric::odeint::runge_kutta4<std::vector<double>> stepper;
  double t = s.t;
  for (long k = 1; k <= steps; ++k) {
    stepper.do_step(rhs, u, t, dt);
    t = init.t + k * dt;
    detail::unpack(u, t, s);
    if (forcing) {
      forcing(t, gnow);
      const double gn = detail::forcing_norm(g, gnow);
      gint += 0.5 * dt * (gprev + gn);
      gprev = gn;
    }
    const double E = energy(g, b2f, s);
    if (!std::isfinite(E))
      throw StabilityError("linear_wave_solve: non-finite energy at t = " + std::to_string(t));
    const double base = std::sqrt(E0) + h0 + gint;
    const double bound = (1.0 + t) * (1.0 + t) * base * base;
    if (E > 10.0 * bound)
      throw StabilityError("linear_wave_solve: energy blow-up at t = " + std::to_string(t) + " (E = "
                           + std::to_string(E) + ", bound " + std::to_string(bound) + "; dt too large)");
    record(s, E);
    if (opt.snapshot_every > 0 && k % opt.snapshot_every == 0)
      tr.snapshots.push_back(s);
  }
  tr.final_state = s;
  return tr;
}

struct EnergyReport
{
  double C = 0.0;       ///< smallest C with sqrt(E) + ||h|| <= C int ||g|| over the run
  double t_at_max = 0.0;
  int samples = 0;
  double final_ratio = 0.0;
};

/// Fits the constant of sqrt(E(t)) + ||h(t)|| <= C int_0^t ||g|| (zero initial data).
/// Samples with int ||g|| below `floor` times its final value are skipped.
inline EnergyReport energy_inequality_check(const Trajectory& tr, double floor = 1e-3)
{
  EnergyReport r;
  if (tr.t.empty())
    return r;
  const double Gend = tr.g_integral.back();
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const double G = tr.g_integral[k];
    if (!(G > floor * Gend) || G <= 0.0)
      continue;
    const double q = (std::sqrt(std::max(0.0, tr.energy[k])) + tr.h_norm[k]) / G;
    ++r.samples;
    if (q > r.C) {
      r.C = q;
      r.t_at_max = tr.t[k];
    }
    r.final_ratio = q;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Linearized solution y1 = sum_k c_k sin(sqrt(lambda_k) t + theta_k) Phi_k

struct LinearModeSolution
{
  std::vector<EigenMode> modes;
  std::vector<double> c;
  std::vector<double> theta;

  static LinearModeSolution single(const EigenMode& m, double theta0 = 0.0)
  {
    return LinearModeSolution{{m}, {1.0}, {theta0}};
  }

  /// Frequency of mode k; lambda_grid keeps y1 an exact semi-discrete solution.
  double frequency(std::size_t k) const { return std::sqrt(modes[k].lambda_grid); }

  void eval(double t, std::vector<double>& y, std::vector<double>& yt) const
  {
    if (modes.empty())
      throw StateError("LinearModeSolution has no modes");
    const std::size_t n = modes[0].phi.size();
    y.assign(n, 0.0);
    yt.assign(n, 0.0);
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const double w = frequency(k);
      const double s = c[k] * std::sin(w * t + theta[k]);
      const double d = c[k] * w * std::cos(w * t + theta[k]);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] += s * modes[k].phi[i];
        yt[i] += d * modes[k].phi[i];
      }
    }
  }
};

struct NonlinearReport
{
  double eps = 0.0;
  double e_sup = 0.0;      ///< sup_t sup_x |y - eps y1|
  double w_sup = 0.0;      ///< e_sup / eps
  double min_margin = 1.0; ///< min of 1 - |y| - |v|
  double dt = 0.0;
  long steps = 0;
};

struct NonlinearRun
{
  Trajectory traj;
  NonlinearReport report;
};

namespace detail
{

/// Radial velocity-gradient factor r dx/dr at the grid nodes.
inline std::vector<double> r_dxdr(const WeightedGrid& g)
{
  const CoordinateChart& ch = g.chart();
  std::vector<double> f(g.n());
  for (int i = 0; i < g.n(); ++i)
    f[i] = g.r()[i] * ch.dx_dr(g.z()[i]);
  return f;
}

/// dy/dx at the nodes: centered 2 y_zeta / zeta inside, parity limit at 0,
/// one-sided at the Dirichlet end.
inline void x_derivative(const WeightedGrid& g, const double* y, std::vector<double>& D)
{
  const int n = g.n();
  const double h = g.h();
  D.resize(n);
  D[0] = 4.0 * (y[1] - y[0]) / (h * h);
  for (int i = 1; i + 1 < n; ++i)
    D[i] = (y[i + 1] - y[i - 1]) / (h * g.zeta()[i]);
  D[n - 1] = 2.0 * (3 * y[n - 1] - 4 * y[n - 2] + y[n - 3]) / (2 * h * g.zeta()[n - 1]);
}

} // namespace detail

/// v = r y_r at the nodes.
inline std::vector<double> radial_gradient(const WeightedGrid& g, const std::vector<double>& y)
{
  std::vector<double> D;
  detail::x_derivative(g, y.data(), D);
  const auto f = detail::r_dxdr(g);
  for (int i = 0; i < g.n(); ++i)
    D[i] *= f[i];
  return D;
}

/// Integrates the nonlinear equation from y = eps y1(0), y_t = eps y1_t(0).
inline NonlinearRun nonlinear_simulate(const ModelParams& p, const LinearOperatorCoeffs& c, const WeightedGrid& g,
                                       const LinearModeSolution& y1, double eps, const TimeOptions& opt)
{
  if (!(eps >= 0.0))
    throw DomainError("nonlinear_simulate: eps must be nonnegative");
  if (!(opt.T > 0.0))
    throw DomainError("nonlinear_simulate: T must be positive");
  if (!g.has_chart())
    throw StateError("nonlinear_simulate needs a grid with a coordinate chart");
  const int n = g.n();
  for (const auto& m : y1.modes)
    if (int(m.phi.size()) != n)
      throw GridError("nonlinear_simulate: mode samples do not match grid");
  const DiscreteL op = assemble_L(c, g);
  const std::vector<double> fr = detail::r_dxdr(g);
  const std::vector<double> b2f(n - 1, 1.0);
  const double gam = p.gamma(), R = p.R();
  double dt = opt.dt > 0.0 ? opt.dt : auto_time_step(op.A, g, 1.0, opt.cfl);
  const long steps = long(std::ceil(opt.T / dt - 1e-9));
  dt = opt.T / steps;

  double t_now = 0.0;
  std::vector<double> Ly, D;
  auto rhs = [&](const std::vector<double>& u, std::vector<double>& du, double t) {
    du.resize(2 * n);
    std::vector<double> y(u.begin(), u.begin() + n);
    op.A.apply(y, Ly);
    detail::x_derivative(g, y.data(), D);
    for (int i = 0; i < n; ++i)
      du[i] = u[n + i];
    for (int i = 0; i + 1 < n; ++i) {
      const double v = fr[i] * D[i];
      if (!(1.0 + y[i] > 0.0) || !(1.0 + y[i] + v > 0.0))
        throw AdmissibilityError("nonlinear_simulate: inadmissible stage state at x = "
                                     + std::to_string(g.x()[i]),
                                 t);
      const auto tm = eval_terms<double>(gam, R, g.r()[i], y[i], v);
      du[n + i] = -((1.0 + tm.G_I) * Ly[i] + tm.G_II);
    }
    du[n - 1] = 0.0;
    du[2 * n - 1] = 0.0;
  };

  WaveState s;
  y1.eval(0.0, s.y, s.yt);
  for (int i = 0; i < n; ++i) {
    s.y[i] *= eps;
    s.yt[i] *= eps;
  }
  s.y[n - 1] = s.yt[n - 1] = 0.0;
  std::vector<double> u;
  detail::pack(s, u);

  NonlinearRun run;
  Trajectory& tr = run.traj;
  NonlinearReport& rep = run.report;
  rep.eps = eps;
  rep.dt = tr.dt = dt;
  rep.steps = tr.steps = steps;

  std::vector<double> ly, lyt;
  auto observe = [&](const WaveState& st) {
    detail::x_derivative(g, st.y.data(), D);
    y1.eval(st.t, ly, lyt);
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(st.y[i]) || !std::isfinite(st.yt[i]))
        throw StabilityError("nonlinear_simulate: non-finite state at t = " + std::to_string(st.t));
      const double margin = 1.0 - std::abs(st.y[i]) - std::abs(fr[i] * D[i]);
      rep.min_margin = std::min(rep.min_margin, margin);
      rep.e_sup = std::max(rep.e_sup, std::abs(st.y[i] - eps * ly[i]));
    }
    if (rep.min_margin <= 0.0)
      throw AdmissibilityError("nonlinear_simulate: |y| + |r y_r| reached 1", st.t);
    tr.t.push_back(st.t);
    tr.boundary.push_back(st.y[0]);
    tr.energy.push_back(energy(g, b2f, st));
    tr.h_norm.push_back(weighted_norm(g, st.y));
    tr.g_integral.push_back(0.0);
  };
  observe(s);
  if (opt.snapshot_every > 0)
    tr.snapshots.push_back(s);

  boost::numeric::odeint::runge_kutta4<std::vector<double>> stepper;
  for (long k = 1; k <= steps; ++k) {
    try {
      stepper.do_step(rhs, u, t_now, dt);
    }
    catch (const StateError& e) {
      throw AdmissibilityError(e.what(), t_now);
    }
    t_now = k * dt;
    detail::unpack(u, t_now, s);
    observe(s);
    if (opt.snapshot_every > 0 && k % opt.snapshot_every == 0)
      tr.snapshots.push_back(s);
  }
  tr.final_state = s;
  rep.w_sup = eps > 0.0 ? rep.e_sup / eps : 0.0;
  return run;
}

// ---------------------------------------------------------------------------
// Series analysis

struct PeriodEstimate
{
  double period = 0.0;
  double jitter = 0.0; ///< rms deviation of crossing times from the fitted lattice
  int crossings = 0;
};

namespace detail
{

struct LatticeFit
{
  double step = 0.0;
  double rss = 0.0;
};

// least-squares t_k = t_0 + k step
inline LatticeFit fit_lattice(const std::vector<double>& c)
{
  const double m = double(c.size());
  double sk = 0, st = 0, skk = 0, skt = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    sk += double(k);
    st += c[k];
    skk += double(k) * double(k);
    skt += double(k) * c[k];
  }
  LatticeFit f;
  f.step = (m * skt - sk * st) / (m * skk - sk * sk);
  const double t0 = (st - f.step * sk) / m;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double r = c[k] - (t0 + f.step * double(k));
    f.rss += r * r;
  }
  return f;
}

} // namespace detail

/// Period from linearly interpolated zero crossings of the mean-removed series.
/// Rising and falling crossings are fitted to separate lattices so that a
/// residual mean offset does not bias the period.
inline PeriodEstimate period_measure(const std::vector<double>& t, const std::vector<double>& s)
{
  if (t.size() != s.size() || t.size() < 3)
    throw InsufficientDataError("period_measure: need at least 3 samples of equal-length series");
  double mean = 0.0;
  for (double v : s)
    mean += v;
  mean /= double(s.size());
  std::vector<double> up, down;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double a = s[k - 1] - mean, b = s[k] - mean;
    if (a == 0.0)
      continue;
    if ((a < 0.0) != (b < 0.0) || b == 0.0)
      (a < 0.0 ? up : down).push_back(t[k - 1] + (t[k] - t[k - 1]) * a / (a - b));
  }
  const int total = int(up.size() + down.size());
  if (total < 2)
    throw InsufficientDataError("period_measure: fewer than 2 zero crossings (" + std::to_string(total) + ")");
  PeriodEstimate e;
  e.crossings = total;
  if (up.size() < 2 && down.size() < 2) {
    // one rising and one falling crossing: half a period apart
    e.period = 2.0 * std::abs(up[0] - down[0]);
    return e;
  }
  double wsum = 0.0, psum = 0.0, rss = 0.0;
  for (const auto* c : {&up, &down}) {
    if (c->size() < 2)
      continue;
    const auto f = detail::fit_lattice(*c);
    psum += double(c->size()) * f.step;
    wsum += double(c->size());
    rss += f.rss;
  }
  e.period = psum / wsum;
  e.jitter = std::sqrt(rss / wsum);
  return e;
}

struct SpectralPeak
{
  double omega;
  double amplitude;
};

/// Strongest `count` peaks of the Hann-windowed discrete Fourier transform of a
/// uniformly sampled series, scanned on (0, omega_max] and refined parabolically.
inline std::vector<SpectralPeak> spectral_peaks(const std::vector<double>& t, const std::vector<double>& s,
                                                int count, double omega_max)
{
  if (t.size() != s.size() || t.size() < 8)
    throw InsufficientDataError("spectral_peaks: need at least 8 samples");
  const std::size_t M = s.size();
  const double T = t.back() - t.front();
  double mean = 0.0;
  for (double v : s)
    mean += v;
  mean /= double(M);
  std::vector<double> w(M);
  for (std::size_t k = 0; k < M; ++k)
    w[k] = (s[k] - mean) * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * double(k) / double(M - 1)));
  const double dw = 2.0 * std::numbers::pi / T / 16.0;
  const int K = int(omega_max / dw) + 2;
  std::vector<double> amp(K + 1, 0.0);
  for (int j = 1; j <= K; ++j) {
    const double om = j * dw;
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < M; ++k)
      acc += w[k] * std::polar(1.0, -om * (t[k] - t.front()));
    amp[j] = std::abs(acc);
  }
  std::vector<SpectralPeak> peaks;
  for (int j = 2; j < K; ++j) {
    if (amp[j] > amp[j - 1] && amp[j] >= amp[j + 1]) {
      const double a = amp[j - 1], b = amp[j], c = amp[j + 1];
      const double den = a - 2 * b + c;
      const double off = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
      peaks.push_back({(j + off) * dw, b});
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const SpectralPeak& x, const SpectralPeak& y) {
    return x.amplitude > y.amplitude;
  });
  if (int(peaks.size()) > count)
    peaks.resize(count);
  std::sort(peaks.begin(), peaks.end(), [](const SpectralPeak& x, const SpectralPeak& y) {
    return x.omega < y.omega;
  });
  return peaks;
}

// ---------------------------------------------------------------------------
// Euler fields

struct EulerField
{
  double t = 0.0;
  std::vector<double> rbar; ///< Lagrangian label (equilibrium radius)
  std::vector<double> m;    ///< enclosed mass of the label
  std::vector<double> r;    ///< physical radius r(t, m)
  std::vector<double> rho;
  std::vector<double> u;
  double R_F = 0.0;
};

/// Physical density, velocity and free boundary from a state on the grid.
inline EulerField euler_reconstruct(const ModelParams& p, const WeightedGrid& g, const WaveState& s)
{
  detail::check_state(g, s);
  if (!g.has_chart())
    throw StateError("euler_reconstruct needs a grid with a coordinate chart");
  const int n = g.n();
  const std::vector<double> v = radial_gradient(g, s.y);
  EulerField f;
  f.t = s.t;
  f.rbar = g.r();
  f.r.resize(n);
  f.rho.resize(n);
  f.u.resize(n);
  f.m.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    f.r[i] = f.rbar[i] * (1.0 + s.y[i]);
  // labels run from rbar = R (i = 0) inward; physical radii must do the same
  for (int i = 1; i < n; ++i)
    if (!(f.r[i] < f.r[i - 1]))
      throw MappingError("euler_reconstruct: physical radius not monotone near rbar = " + std::to_string(f.rbar[i]));
  for (int i = 0; i < n; ++i) {
    const double rb = f.rbar[i];
    const double J = (1.0 + s.y[i]) * (1.0 + s.y[i]) * (1.0 + v[i]);
    if (!(1.0 + s.y[i] > 0.0) || !(J > 0.0))
      throw AdmissibilityError("euler_reconstruct: inadmissible state at rbar = " + std::to_string(rb), s.t);
    f.rho[i] = equilibrium_density(p, rb) / J;
    f.u[i] = rb * s.yt[i];
  }
  f.R_F = p.R() * (1.0 + s.y[0]);
  // enclosed mass m(rbar) = 4 pi int_1^rbar rho_bar s^2 ds, accumulated inward-out
  using GL = boost::math::quadrature::gauss<double, 10>;
  auto integrand = [&](double r) { return equilibrium_density(p, r) * r * r; };
  double acc = 0.0;
  f.m[n - 1] = 0.0;
  for (int i = n - 2; i >= 0; --i) {
    acc += GL::integrate(integrand, f.rbar[i + 1], f.rbar[i]);
    f.m[i] = 4.0 * std::numbers::pi * acc;
  }
  return f;
}

struct ExponentFit
{
  double exponent = 0.0;
  double log_prefactor = 0.0;
  int points = 0;
};

/// Least-squares slope of log rho against log(R_F - r) for R_F - r in [lo R, hi R].
inline ExponentFit vacuum_exponent_fit(const ModelParams& p, const EulerField& f, double lo = 1e-4, double hi = 1e-2)
{
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < f.r.size(); ++i) {
    const double d = f.R_F - f.r[i];
    if (d < lo * p.R() || d > hi * p.R() || !(f.rho[i] > 0.0))
      continue;
    const double X = std::log(d), Y = std::log(f.rho[i]);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
    ++m;
  }
  if (m < 3)
    throw InsufficientDataError("vacuum_exponent_fit: only " + std::to_string(m) + " samples in the fit window");
  ExponentFit e;
  e.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  e.log_prefactor = (sy - e.exponent * sx) / m;
  e.points = m;
  return e;
}

/// Smallest kappa with (R - rbar)/kappa <= R_F - r <= kappa (R - rbar).
inline double boundary_ordering_kappa(const ModelParams& p, const EulerField& f)
{
  double kappa = 1.0;
  for (std::size_t i = 0; i < f.r.size(); ++i) {
    const double a = p.R() - f.rbar[i];
    if (!(a > 0.0))
      continue;
    const double q = (f.R_F - f.r[i]) / a;
    if (!(q > 0.0))
      return std::numeric_limits<double>::infinity();
    kappa = std::max({kappa, q, 1.0 / q});
  }
  return kappa;
}

} // namespace atmos

#endif
