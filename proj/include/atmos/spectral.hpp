#ifndef ATMOS_SPECTRAL_HPP
#define ATMOS_SPECTRAL_HPP

// Eigenpairs of L Phi = lambda Phi, Phi bounded at x = 0, Phi(x_R) = 0.
//
// Two independent routes: shooting from the Frobenius regular branch at the
// singular point, and the symmetric finite-volume matrix on a WeightedGrid.

#include "atmos/errors.hpp"
#include "atmos/operator.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <lapacke.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace atmos
{

struct EigenMode
{
  int index = 0;
  double lambda = 0.0;
  /// Raw eigenvalue of the discrete operator the samples belong to (equals lambda for shooting).
  double lambda_grid = 0.0;
  std::vector<double> phi; ///< samples at the grid nodes, Dirichlet node included
  double phi0 = 0.0;
  bool normalized = false;
  int zeros = 0; ///< interior sign changes
  std::string method;
};

/// Interior sign changes of a sampled field (exact zeros skipped).
inline int count_sign_changes(const std::vector<double>& y, std::size_t upto)
{
  int count = 0;
  double prev = 0.0;
  for (std::size_t i = 0; i < upto && i < y.size(); ++i) {
    if (y[i] == 0.0)
      continue;
    if (prev != 0.0 && (y[i] < 0.0) != (prev < 0.0))
      ++count;
    prev = y[i];
  }
  return count;
}

// ---------------------------------------------------------------------------
// Frobenius seed

struct FrobeniusSeed
{
  std::vector<double> a; ///< a[0] = 1
  int K = 0;
  double x_s = 0.0;
  double tail = 0.0;     ///< estimated truncation error at x_s
  double residual = 0.0; ///< max recurrence residual, relative

  double value(double x) const
  {
    double s = 0.0;
    for (int j = K; j >= 0; --j)
      s = s * x + a[j];
    return s;
  }

  double derivative(double x) const
  {
    double s = 0.0;
    for (int j = K; j >= 1; --j)
      s = s * x + j * a[j];
    return s;
  }
};

namespace detail
{

// sum_{m<=j} p_{j-m} m a_m - lambda a_j + sum_{m<=j} q_{j-m} a_m
inline double frobenius_rhs(const std::vector<double>& p, const std::vector<double>& q,
                            const std::vector<double>& a, double lambda, int j)
{
  double s = -lambda * a[j];
  for (int m = 0; m <= j; ++m)
    s += (p[j - m] * m + q[j - m]) * a[m];
  return s;
}

} // namespace detail

/// Regular solution y = 1 + sum a_j x^j of x y'' + (N/2 - L1 x) y' + (lambda - L0) y = 0.
inline FrobeniusSeed frobenius_seed(const LinearOperatorCoeffs& c, double lambda, int K)
{
  if (K < 1)
    throw OrderError("frobenius_seed: K must be >= 1");
  if (K > LinearOperatorCoeffs::taylor_degree())
    throw OrderError("frobenius_seed: K = " + std::to_string(K) + " exceeds the fitted Taylor degree "
                     + std::to_string(LinearOperatorCoeffs::taylor_degree()));
  const std::vector<double>& p = c.L1_taylor();
  const std::vector<double>& q = c.L0_taylor();
  const double half_N = 0.5 * c.N();
  FrobeniusSeed s;
  s.K = K;
  s.a.assign(K + 1, 0.0);
  s.a[0] = 1.0;
  for (int j = 0; j < K; ++j)
    s.a[j + 1] = detail::frobenius_rhs(p, q, s.a, lambda, j) / ((j + 1) * (j + half_N));
  for (int j = 0; j < K; ++j) {
    const double lhs = (j + 1) * (j + half_N) * s.a[j + 1];
    const double rhs = detail::frobenius_rhs(p, q, s.a, lambda, j);
    s.residual = std::max(s.residual, std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1e-300));
  }
  // tail below 1e-13, inside the fit interval, and lambda x small enough that
  // the alternating series does not cancel
  double x_s = 0.05 * c.x_R();
  for (int j : {K - 1, K})
    if (j >= 1 && s.a[j] != 0.0)
      x_s = std::min(x_s, std::pow(1e-13 / std::abs(s.a[j]), 1.0 / j));
  const double shift = std::abs(lambda - q[0]);
  if (shift > 0.0)
    x_s = std::min(x_s, c.N() / (4.0 * shift));
  s.x_s = x_s;
  // first omitted term, extrapolated from the last two
  const double ratio = s.a[K - 1] != 0.0 ? std::abs(s.a[K] / s.a[K - 1]) * x_s : 0.0;
  s.tail = std::abs(s.a[K]) * std::pow(x_s, K) * ratio / std::max(1e-300, 1.0 - std::min(ratio, 0.5));
  return s;
}

// ---------------------------------------------------------------------------
// Shooting

namespace detail
{

using ShotState = std::array<double, 2>;

struct ShotResult
{
  double end;   ///< y(x_R)
  int zeros;    ///< interior sign changes of y
  double scale; ///< max |y|
};

class Shooter
{
public:
  Shooter(const LinearOperatorCoeffs& c) : c_(c) {}

  // If `nodes` is given (ascending zeta), y is sampled there into `samples`.
  ShotResult shoot(double lambda, const std::vector<double>* nodes = nullptr,
                   std::vector<double>* samples = nullptr) const
  {
    namespace ode = boost::numeric::odeint;
    const FrobeniusSeed seed = frobenius_seed(c_, lambda, LinearOperatorCoeffs::taylor_degree());
    const double zs = std::sqrt(4.0 * seed.x_s);
    const double zR = c_.zeta_R();
    const double N = c_.N();
    ShotState u{seed.value(seed.x_s), 0.5 * zs * seed.derivative(seed.x_s)};

    auto rhs = [&](const ShotState& s, ShotState& ds, double zeta) {
      const double x = std::min(0.25 * zeta * zeta, c_.x_R());
      const CoeffValues v = c_.at_x(x);
      ds[0] = s[1];
      ds[1] = -((N - 1.0) / zeta - 0.5 * v.L1 * zeta) * s[1] + (v.L0 - lambda) * s[0];
    };

    ShotResult out{0.0, 0, std::abs(u[0])};
    double prev = u[0];
    // the endpoint itself is the Dirichlet zero and does not count
    auto observe = [&](const ShotState& s, double t) {
      if (t >= zR)
        return;
      if (s[0] != 0.0 && prev != 0.0 && (s[0] < 0.0) != (prev < 0.0))
        ++out.zeros;
      if (s[0] != 0.0)
        prev = s[0];
      out.scale = std::max(out.scale, std::abs(s[0]));
    };

    // a few steps per local wavelength so that no sign change is skipped
    const double k = std::sqrt(std::abs(lambda) + 1.0);
    const double max_dt = std::min(zR / 64.0, 0.4 / k);
    using Stepper = ode::runge_kutta_fehlberg78<ShotState>;
    auto stepper = ode::make_controlled(1e-13, 1e-13, max_dt, Stepper());

    std::vector<double> times;
    if (nodes) {
      samples->assign(nodes->size(), 0.0);
      times.push_back(zs);
      for (std::size_t i = 0; i < nodes->size(); ++i) {
        const double zi = (*nodes)[i];
        if (zi < zs) {
          const double xi = 0.25 * zi * zi;
          (*samples)[i] = seed.value(xi);
        }
        else if (zi > zs) {
          times.push_back(zi);
        }
        else {
          (*samples)[i] = u[0];
        }
      }
    }
    try {
      if (nodes) {
        std::size_t first = 0;
        while (first < nodes->size() && (*nodes)[first] <= zs)
          ++first;
        std::size_t slot = first;
        auto record = [&](const ShotState& s, double t) {
          observe(s, t);
          if (t > zs && slot < samples->size() && t == (*nodes)[slot])
            (*samples)[slot++] = s[0];
        };
        ode::integrate_times(stepper, rhs, u, times.begin(), times.end(), max_dt, record);
        if (times.back() < zR)
          ode::integrate_adaptive(stepper, rhs, u, times.back(), zR, max_dt, observe);
      }
      else {
        ode::integrate_adaptive(stepper, rhs, u, zs, zR, max_dt, observe);
      }
    }
    catch (const Error&) {
      throw;
    }
    catch (const std::exception& e) {
      throw IntegrationError(std::string("shooting integration failed: ") + e.what(), zs);
    }
    if (!std::isfinite(u[0]))
      throw IntegrationError("shooting produced a non-finite value", zR);
    out.end = u[0];
    return out;
  }

private:
  const LinearOperatorCoeffs& c_;
};

} // namespace detail

/// Endpoint residual y(x_R; lambda) of the regular branch (y(0) = 1).
inline double shooting_residual(const LinearOperatorCoeffs& c, double lambda)
{
  return detail::Shooter(c).shoot(lambda).end;
}

/// Mode n_target by root finding on y(x_R; lambda) inside [lo, hi]. When a grid
/// is supplied the eigenfunction is sampled at its nodes and normalized.
inline EigenMode shoot_eigen(const LinearOperatorCoeffs& c, double lo, double hi, int n_target,
                             const WeightedGrid* sample_grid = nullptr)
{
  if (!(lo < hi))
    throw BracketError("shoot_eigen: empty search window");
  if (n_target < 1)
    throw DomainError("shoot_eigen: mode index must be >= 1");
  const detail::Shooter shooter(c);
  const double flo = shooter.shoot(lo).end;
  const double fhi = shooter.shoot(hi).end;
  if (flo == 0.0 || fhi == 0.0 || (flo < 0.0) == (fhi < 0.0))
    throw BracketError("shoot_eigen: no sign change of y(x_R) on [" + std::to_string(lo) + ", "
                       + std::to_string(hi) + "]");
  std::uintmax_t iters = 200;
  auto f = [&](double lam) { return shooter.shoot(lam).end; };
  const auto br = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                    boost::math::tools::eps_tolerance<double>(50), iters);
  EigenMode m;
  m.index = n_target;
  m.lambda = 0.5 * (br.first + br.second);
  m.lambda_grid = m.lambda;
  m.method = "shooting";
  const detail::ShotResult r = shooter.shoot(m.lambda);
  m.zeros = r.zeros;
  if (m.zeros != n_target - 1)
    throw BracketError("shoot_eigen: root in window has " + std::to_string(m.zeros)
                       + " interior zeros, mode " + std::to_string(n_target) + " needs "
                       + std::to_string(n_target - 1));
  m.phi0 = 1.0;
  if (sample_grid) {
    const WeightedGrid& g = *sample_grid;
    std::vector<double> y;
    shooter.shoot(m.lambda, &g.zeta(), &y);
    y.back() = 0.0;
    double s = 0.0;
    for (int i = 0; i < g.n(); ++i) {
      const double w = g.has_chart() ? c.at_z(g.z()[i]).omega : c.at_x(g.x()[i]).omega;
      s += g.weight()[i] * w * y[i] * y[i];
    }
    const double nrm = std::sqrt(s);
    for (double& v : y)
      v /= nrm;
    m.phi = std::move(y);
    m.phi0 = m.phi[0];
    m.normalized = true;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Collocation

namespace detail
{

struct TridiagonalEigen
{
  std::vector<double> values;
  std::vector<double> vectors; ///< column-major, rows x count
};

/// Lowest `count` eigenpairs of a symmetric tridiagonal matrix (LAPACK dstevr).
inline TridiagonalEigen lowest_eigenpairs(std::vector<double> d, std::vector<double> e, int count,
                                          bool want_vectors)
{
  const lapack_int n = lapack_int(d.size());
  if (count < 1 || count > n)
    throw DomainError("lowest_eigenpairs: count out of range");
  e.resize(std::max<lapack_int>(n, 1));
  TridiagonalEigen out;
  out.values.assign(n, 0.0);
  if (want_vectors)
    out.vectors.assign(std::size_t(n) * count, 0.0);
  std::vector<lapack_int> support(2 * std::size_t(count));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dstevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'I', n, d.data(), e.data(), 0.0, 0.0, 1,
                     count, 0.0, &found, out.values.data(), want_vectors ? out.vectors.data() : nullptr,
                     n, support.data());
  if (info != 0 || found != count)
    throw NumericError("dstevr failed (info " + std::to_string(info) + ", found "
                       + std::to_string(found) + " of " + std::to_string(count) + ")");
  out.values.resize(count);
  return out;
}

} // namespace detail

/// Largest tolerated relative defect of the symmetrizability relation.
inline constexpr double symmetry_tolerance = 1e-9;

/// Raw eigenvalues of the discrete operator on an n-point grid.
inline std::vector<double> discrete_eigenvalues(const LinearOperatorCoeffs& c, int n, int count)
{
  const WeightedGrid g(c, n);
  const DiscreteL op = assemble_L(c, g);
  if (op.symmetry_defect() > symmetry_tolerance)
    throw SymmetryError("discrete operator is not symmetrizable (defect "
                        + std::to_string(op.symmetry_defect()) + ")");
  std::vector<double> d, e;
  op.symmetric_form(d, e);
  return detail::lowest_eigenpairs(d, e, count, false).values;
}

/// Lowest `count` modes on grid g. lambda is Richardson-extrapolated against
/// a grid of half the resolution; phi and lambda_grid belong to g itself.
inline std::vector<EigenMode> collocation_spectrum(const LinearOperatorCoeffs& c, const WeightedGrid& g,
                                                   int count)
{
  if (count < 1)
    throw DomainError("collocation_spectrum: count must be >= 1");
  if (g.n() < 16 * count)
    throw GridError("collocation_spectrum: " + std::to_string(count) + " modes need n_grid >= "
                    + std::to_string(16 * count) + ", got " + std::to_string(g.n()));
  const DiscreteL op = assemble_L(c, g);
  if (op.symmetry_defect() > symmetry_tolerance)
    throw SymmetryError("discrete operator is not symmetrizable (defect "
                        + std::to_string(op.symmetry_defect()) + ")");
  std::vector<double> d, e;
  op.symmetric_form(d, e);
  const int m = op.A.rows();
  const auto fine = detail::lowest_eigenpairs(d, e, count, true);

  const int n_c = g.n() % 2 == 1 ? (g.n() + 1) / 2 : g.n() / 2;
  const std::vector<double> coarse = discrete_eigenvalues(c, n_c, count);
  const double ratio = double(g.n() - 1) / double(n_c - 1);
  const double denom = ratio * ratio - 1.0;

  std::vector<EigenMode> modes(count);
  for (int k = 0; k < count; ++k) {
    EigenMode& md = modes[k];
    md.index = k + 1;
    md.lambda_grid = fine.values[k];
    md.lambda = fine.values[k] + (fine.values[k] - coarse[k]) / denom;
    md.method = "collocation";
    md.phi.assign(g.n(), 0.0);
    // y = M^{-1/2} v, unit in the discrete omega inner product
    for (int i = 0; i < m; ++i)
      md.phi[i] = fine.vectors[std::size_t(k) * m + i] / std::sqrt(op.node_mass[i]);
    if (md.phi[0] < 0.0)
      for (double& v : md.phi)
        v = -v;
    md.phi0 = md.phi[0];
    md.normalized = true;
    md.zeros = count_sign_changes(md.phi, std::size_t(m));
  }
  return modes;
}

/// Shooting window around an estimate, widened until y(x_R) changes sign.
inline std::pair<double, double> shooting_window(const LinearOperatorCoeffs& c, double estimate,
                                                 double rel = 1e-4)
{
  const double scale = std::max(std::abs(estimate), 1e-3);
  for (int k = 0; k < 12; ++k) {
    const double w = rel * scale * std::pow(2.0, k);
    const double lo = estimate - w, hi = estimate + w;
    const double a = shooting_residual(c, lo), b = shooting_residual(c, hi);
    if (a != 0.0 && b != 0.0 && (a < 0.0) != (b < 0.0))
      return {lo, hi};
  }
  throw BracketError("shooting_window: no sign change near " + std::to_string(estimate));
}

} // namespace atmos

#endif
