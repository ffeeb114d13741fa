#ifndef ATMOS_MODEL_HPP
#define ATMOS_MODEL_HPP

// Problem parameters, the polytropic equilibrium touching vacuum, and the
// radial coordinate charts r <-> z <-> xi <-> x (with zeta = sqrt(4x)).
//
// Normalization: R0 = 1, g0 = 1/(gamma-1), A = 1/gamma, A1 = 1. With these,
// gamma*P/rho = rho^(gamma-1) = 1/r - 1/R exactly.

#include "atmos/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace atmos
{

class ModelParams
{
public:
  double gamma() const noexcept { return gamma_; }
  double N() const noexcept { return N_; }
  double R() const noexcept { return R_; }

  static constexpr double R0() noexcept { return 1.0; }
  double g0() const noexcept { return 1.0 / (gamma_ - 1.0); }
  double A() const noexcept { return 1.0 / gamma_; }
  static constexpr double A1() noexcept { return 1.0; }

  friend ModelParams make_params(double gamma, double R);

private:
  ModelParams(double gamma, double N, double R) : gamma_(gamma), N_(N), R_(R) {}

  double gamma_;
  double N_;
  double R_;
};

inline double N_from_gamma(double gamma) { return 2.0 * gamma / (gamma - 1.0); }
inline double gamma_from_N(double N) { return 1.0 + 2.0 / (N - 2.0); }

inline ModelParams make_params(double gamma, double R)
{
  if (!(gamma > 1.0))
    throw DomainError("gamma must satisfy gamma > 1, got " + std::to_string(gamma));
  if (!(gamma <= 2.0))
    throw DomainError("gamma must satisfy gamma <= 2, got " + std::to_string(gamma));
  if (!(R > 1.0))
    throw DomainError("R must satisfy R > R0 = 1, got " + std::to_string(R));
  if (!std::isfinite(R))
    throw DomainError("R must be finite");
  return ModelParams(gamma, N_from_gamma(gamma), R);
}

inline ModelParams make_params_from_N(double N, double R)
{
  if (!(N >= 4.0))
    throw DomainError("N must satisfy N >= 4, got " + std::to_string(N));
  return make_params(gamma_from_N(N), R);
}

// ---------------------------------------------------------------------------
// Equilibrium

/// rho_bar(r) = (1/r - 1/R)^(1/(gamma-1)) on [1, R), zero beyond.
inline double equilibrium_density(const ModelParams& p, double r)
{
  if (!(r >= 1.0))
    throw DomainError("equilibrium_density: r must be >= 1, got " + std::to_string(r));
  if (r >= p.R())
    return 0.0;
  return std::pow(1.0 / r - 1.0 / p.R(), 1.0 / (p.gamma() - 1.0));
}

inline double equilibrium_density_derivative(const ModelParams& p, double r)
{
  if (!(r >= 1.0))
    throw DomainError("equilibrium_density_derivative: r must be >= 1");
  if (r >= p.R())
    return 0.0;
  const double k = 1.0 / (p.gamma() - 1.0);
  return -k * std::pow(1.0 / r - 1.0 / p.R(), k - 1.0) / (r * r);
}

inline double equilibrium_pressure(const ModelParams& p, double r)
{
  return p.A() * std::pow(equilibrium_density(p, r), p.gamma());
}

inline double equilibrium_pressure_derivative(const ModelParams& p, double r)
{
  const double rho = equilibrium_density(p, r);
  if (rho == 0.0)
    return 0.0;
  return p.A() * p.gamma() * std::pow(rho, p.gamma() - 1.0) * equilibrium_density_derivative(p, r);
}

/// gamma*P/rho = 1/r - 1/R; closed form, valid up to and including r = R.
inline double sound_speed_squared(const ModelParams& p, double r)
{
  return r >= p.R() ? 0.0 : 1.0 / r - 1.0 / p.R();
}

/// M = 4 pi int_1^R rho_bar r^2 dr on a geometrically graded Gauss panel set.
inline double total_mass(const ModelParams& p, double tolerance = 1e-12)
{
  const double k = 1.0 / (p.gamma() - 1.0);
  const double R = p.R();
  auto integrand = [&](double r) {
    const double s = 1.0 / r - 1.0 / R;
    return s > 0.0 ? std::pow(s, k) * r * r : 0.0;
  };
  // Panels grow geometrically from r = 1 to the midpoint, then halve toward r = R
  // where the integrand has its (R-r)^{1/(gamma-1)} zero. Each panel is integrated
  // at two Gauss orders; their gap is the error estimate.
  using boost::math::quadrature::gauss;
  std::vector<double> cuts{1.0};
  const double mid = 0.5 * (1.0 + R);
  for (double c = 1.25; c < mid; c *= 1.25)
    cuts.push_back(c);
  cuts.push_back(mid);
  for (int j = 2; j <= 60; ++j)
    cuts.push_back(R - (R - 1.0) * std::ldexp(1.0, -j));
  cuts.push_back(R);
  double I = 0.0;
  double error = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double lo = gauss<double, 20>::integrate(integrand, cuts[j], cuts[j + 1]);
    const double hi = gauss<double, 30>::integrate(integrand, cuts[j], cuts[j + 1]);
    I += hi;
    error += std::abs(hi - lo);
  }
  if (!(error <= tolerance) && !(error <= 1e-13 * std::abs(I)))
    throw NumericError("total_mass: adaptive quadrature did not converge", error);
  return 4.0 * std::numbers::pi * I;
}

/// Upper bound of the mass as R -> infinity; +infinity when gamma >= 4/3.
inline double critical_mass(const ModelParams& p)
{
  const double g = p.gamma();
  if (4.0 - 3.0 * g <= 0.0)
    return std::numeric_limits<double>::infinity();
  return 4.0 * std::numbers::pi * p.A1() * (g - 1.0) / (4.0 - 3.0 * g);
}

/// Linearized operator applied pointwise from values y, y', y'' in r.
inline double apply_L_rform(const ModelParams& p, double r, double y, double y_r, double y_rr)
{
  const double g = p.gamma();
  const double s = sound_speed_squared(p, r);
  return -s * y_rr + (-4.0 / r * s + g / (g - 1.0) / (r * r)) * y_r
         + (3.0 * g - 4.0) / (g - 1.0) * y / (r * r * r);
}

// ---------------------------------------------------------------------------
// Charts

namespace detail
{

/// asin(u)/u, analytic in u^2.
inline double asin_over_u(double u)
{
  if (u < 1e-4) {
    const double u2 = u * u;
    return 1.0 + u2 / 6.0 + 3.0 * u2 * u2 / 40.0;
  }
  return std::asin(u) / u;
}

} // namespace detail

/// xi(z) = sqrt(z(1-z)) + arctan sqrt(z/(1-z)).
inline double xi_of_z(double z)
{
  const double u = std::sqrt(z);
  const double c = std::sqrt(1.0 - z);
  return u * c + std::atan2(u, c);
}

/// F(z) = xi/(2 sqrt z); F(0) = 1, so that x~ = z F^2.
inline double xi_ratio(double z)
{
  return 0.5 * (std::sqrt(1.0 - z) + detail::asin_over_u(std::sqrt(z)));
}

struct ChartPoint
{
  double r;
  double z;
  double xi;
  double x;
  double zeta; ///< sqrt(4x) = R^{3/2} xi
};

class CoordinateChart
{
public:
  explicit CoordinateChart(const ModelParams& p)
      : params_(p), R_(p.R()), R3_(p.R() * p.R() * p.R()), z_R_(1.0 - 1.0 / p.R()),
        xi_R_(xi_of_z(z_R_)), x_R_(R3_ * xi_R_ * xi_R_ / 4.0),
        x_inf_(std::numbers::pi * std::numbers::pi * R3_ / 16.0), zeta_R_(std::sqrt(R3_) * xi_R_)
  {
  }

  const ModelParams& params() const noexcept { return params_; }
  double z_R() const noexcept { return z_R_; }
  double xi_R() const noexcept { return xi_R_; }
  double x_R() const noexcept { return x_R_; }
  double x_inf() const noexcept { return x_inf_; }
  double zeta_R() const noexcept { return zeta_R_; }

  double z_of_r(double r) const { return (R_ - r) / R_; }
  double r_of_z(double z) const { return R_ * (1.0 - z); }
  double x_of_z(double z) const
  {
    const double xi = xi_of_z(z);
    return R3_ * xi * xi / 4.0;
  }
  double xtilde_of_z(double z) const
  {
    const double xi = xi_of_z(z);
    return xi * xi / 4.0;
  }

  ChartPoint forward(double r) const
  {
    if (!(r >= 1.0 && r <= R_))
      throw DomainError("chart_forward: r must lie in [1, R], got " + std::to_string(r));
    const double z = std::max(0.0, z_of_r(r));
    const double xi = xi_of_z(z);
    return {r, z, xi, R3_ * xi * xi / 4.0, std::sqrt(R3_) * xi};
  }

  /// z from xi by safeguarded Newton in u = sqrt z, where dxi/du = 2 sqrt(1-u^2) > 0.
  double z_of_xi(double xi) const
  {
    if (!(xi >= 0.0 && xi <= xi_R_ * (1.0 + 1e-14)))
      throw DomainError("chart_inverse: xi outside [0, xi_R]");
    if (xi == 0.0)
      return 0.0;
    xi = std::min(xi, xi_R_);
    double lo = 0.0;
    double hi = std::sqrt(z_R_);
    double u = 0.5 * xi; // xi(u) <= 2u and xi is concave: Newton from here is monotone
    for (int it = 0; it < 100; ++it) {
      const double c = std::sqrt(1.0 - u * u);
      const double f = u * c + std::atan2(u, c) - xi;
      if (f < 0.0)
        lo = u;
      else
        hi = u;
      double next = u - f / (2.0 * c);
      if (!(next > lo && next < hi))
        next = 0.5 * (lo + hi);
      if (std::abs(next - u) <= 1e-16 * u || hi - lo <= 4e-16 * hi) {
        u = next;
        break;
      }
      u = next;
    }
    return u * u;
  }

  double z_of_x(double x) const
  {
    if (!(x >= 0.0 && x <= x_R_ * (1.0 + 1e-13)))
      throw DomainError("chart_inverse: x must lie in [0, x_R], got " + std::to_string(x));
    return z_of_xi(2.0 * std::sqrt(std::max(x, 0.0) / R3_));
  }

  double z_of_zeta(double zeta) const
  {
    if (!(zeta >= 0.0 && zeta <= zeta_R_ * (1.0 + 1e-13)))
      throw DomainError("chart_inverse: zeta outside [0, zeta_R]");
    return z_of_xi(zeta / std::sqrt(R3_));
  }

  double r_of_x(double x) const { return r_of_z(z_of_x(x)); }

  // Jacobians (analytic).
  double dz_dr() const { return -1.0 / R_; }
  /// dxi/dz = sqrt((1-z)/z); singular at z = 0.
  double dxi_dz(double z) const { return std::sqrt((1.0 - z) / z); }
  /// dx/dr = -R^2 sqrt(1-z) F(z); finite and nonzero at r = R.
  double dx_dr(double z) const { return -R_ * R_ * std::sqrt(1.0 - z) * xi_ratio(z); }
  /// dx/dz = R^3 sqrt(1-z) F(z).
  double dx_dz(double z) const { return R3_ * std::sqrt(1.0 - z) * xi_ratio(z); }

private:
  ModelParams params_;
  double R_;
  double R3_;
  double z_R_;
  double xi_R_;
  double x_R_;
  double x_inf_;
  double zeta_R_;
};

inline ChartPoint chart_forward(const CoordinateChart& c, double r) { return c.forward(r); }
inline double chart_inverse(const CoordinateChart& c, double x) { return c.r_of_x(x); }

} // namespace atmos

#endif
