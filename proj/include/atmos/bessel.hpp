#ifndef ATMOS_BESSEL_HPP
#define ATMOS_BESSEL_HPP

// J_nu for real order nu >= 0 and its positive zeros; the exact spectrum of
// -Lap on (0, x_R) is lambda_n = (j_{nu,n}/2)^2 / x_R with nu = N/2 - 1.

#include "atmos/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <cfloat>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace atmos
{

namespace detail
{

struct BesselEval
{
  long double value;
  long double error; ///< absolute error estimate
};

inline BesselEval bessel_series(long double nu, long double r)
{
  const long double q = -0.25L * r * r;
  long double term = std::pow(0.5L * r, nu) / std::tgamma(nu + 1.0L);
  long double sum = term, big = std::abs(term);
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * (k + nu));
    sum += term;
    big = std::max(big, std::abs(term));
    if (std::abs(term) < 1e-22L * big && k > r)
      break;
  }
  return {sum, 8.0L * LDBL_EPSILON * big};
}

// Hankel expansion; the series is asymptotic, so summation stops at its
// smallest term, which also serves as the error estimate.
inline BesselEval bessel_hankel(long double nu, long double r)
{
  const long double mu = 4.0L * nu * nu;
  const long double chi = r - (0.5L * nu + 0.25L) * std::numbers::pi_v<long double>;
  long double P = 0.0L, Q = 0.0L;
  long double a = 1.0L; // a_k / r^k
  long double last = std::numeric_limits<long double>::infinity();
  for (int k = 0; k < 200; ++k) {
    const long double m = std::abs(a);
    if (m > last)
      break;
    last = m;
    switch (k % 4) {
    case 0: P += a; break;
    case 1: Q += a; break;
    case 2: P -= a; break;
    case 3: Q -= a; break;
    }
    if (m < 1e-21L)
      break;
    const long double odd = 2.0L * k + 1.0L;
    a *= (mu - odd * odd) / ((k + 1) * 8.0L * r);
  }
  const long double amp = std::sqrt(2.0L / (std::numbers::pi_v<long double> * r));
  return {amp * (P * std::cos(chi) - Q * std::sin(chi)), amp * (last + 16.0L * LDBL_EPSILON * r)};
}

} // namespace detail

/// Target absolute accuracy of bessel_J.
inline constexpr double bessel_tolerance = 1e-10;

/// Bessel function of the first kind. Ascending series for small r, Hankel
/// expansion beyond the crossover.
inline double bessel_J(double nu, double r)
{
  if (!(nu >= 0.0))
    throw DomainError("bessel_J: order must be nonnegative");
  if (!(r >= 0.0))
    throw DomainError("bessel_J: argument must be nonnegative");
  if (r == 0.0)
    return nu == 0.0 ? 1.0 : 0.0;
  const long double ln = nu, lr = r;
  detail::BesselEval best{0.0L, std::numeric_limits<long double>::infinity()};
  if (r > 18.0) {
    best = detail::bessel_hankel(ln, lr);
    if (best.error <= 0.1L * bessel_tolerance)
      return double(best.value);
  }
  if (r < 60.0) {
    const auto s = detail::bessel_series(ln, lr);
    if (s.error < best.error)
      best = s;
  }
  if (!(best.error <= bessel_tolerance))
    throw AccuracyError("bessel_J: cannot reach " + std::to_string(bessel_tolerance)
                        + " at nu = " + std::to_string(nu) + ", r = " + std::to_string(r));
  return double(best.value);
}

/// McMahon leading-order location of the n-th zero.
inline double bessel_zero_estimate(double nu, int n) { return (n + 0.5 * nu - 0.25) * std::numbers::pi; }

/// First `count` positive zeros of J_nu, by sign scanning from the origin and
/// bracketed refinement.
inline std::vector<double> bessel_zeros(double nu, int count)
{
  if (!(nu >= 0.0))
    throw DomainError("bessel_zeros: order must be nonnegative");
  if (count < 1)
    throw DomainError("bessel_zeros: count must be >= 1");
  std::vector<double> zeros;
  zeros.reserve(count);
  // J_nu > 0 on (0, j_{nu,1}) and j_{nu,1} > nu; consecutive zeros are more than 2 apart
  const double step = std::numbers::pi / 8.0;
  double a = std::max(nu, 0.5);
  double fa = bessel_J(nu, a);
  while (int(zeros.size()) < count) {
    const double b = a + step;
    const double fb = bessel_J(nu, b);
    if (fb == 0.0) {
      zeros.push_back(b);
    }
    else if ((fa < 0.0) != (fb < 0.0) && fa != 0.0) {
      std::uintmax_t it = 100;
      const auto J = [nu](double t) { return bessel_J(nu, t); };
      const auto br = boost::math::tools::toms748_solve(J, a, b, fa, fb,
                                                        boost::math::tools::eps_tolerance<double>(52), it);
      zeros.push_back(0.5 * (br.first + br.second));
    }
    a = b;
    fa = fb;
  }
  return zeros;
}

inline double bessel_zero(double nu, int n)
{
  if (n < 1)
    throw DomainError("bessel_zero: n must be >= 1");
  return bessel_zeros(nu, n).back();
}

/// Exact eigenvalues of -Lap = -(x d2/dx2 + (N/2) d/dx) on (0, x_R), Dirichlet at x_R.
inline std::vector<double> bessel_oracle_spectrum(double N, int count, double x_R = 1.0)
{
  if (!(N >= 2.0))
    throw DomainError("bessel_oracle_spectrum: N must be >= 2");
  std::vector<double> lam = bessel_zeros(0.5 * N - 1.0, count);
  for (double& j : lam)
    j = 0.25 * j * j / x_R;
  return lam;
}

} // namespace atmos

#endif
