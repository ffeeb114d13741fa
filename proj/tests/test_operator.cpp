#include "atmos/operator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace atmos;

namespace
{

double sup_error(const std::vector<double>& a, const std::vector<double>& b, int upto)
{
  double e = 0.0;
  for (int i = 0; i < upto; ++i)
    e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

PolyField random_poly(std::mt19937_64& rng, int degree)
{
  std::normal_distribution<double> n01;
  std::vector<double> c(degree + 1);
  for (auto& v : c)
    v = n01(rng);
  return PolyField(c);
}

// x(r) with its first two r-derivatives, analytic.
struct XJet
{
  double x, x_r, x_rr, x_z, x_zz;
};

XJet x_jet(const CoordinateChart& c, double z)
{
  const double R = c.params().R();
  const double R3 = R * R * R;
  const double xi = xi_of_z(z);
  const double f = std::sqrt((1 - z) / z);
  const double fz = -1.0 / (2 * z * z * f);
  XJet j;
  j.x = R3 * xi * xi / 4;
  j.x_z = R3 * xi * f / 2;
  j.x_zz = R3 * (f * f + xi * fz) / 2;
  j.x_r = -j.x_z / R;
  j.x_rr = j.x_zz / (R * R);
  return j;
}

} // namespace

TEST(Grid, Basics)
{
  const auto c = laplacian_coeffs(5.0, 1.0);
  EXPECT_THROW(WeightedGrid(c, 3), GridError);
  const WeightedGrid g(c, 64);
  for (int i = 1; i < g.n(); ++i)
    EXPECT_GT(g.x()[i], g.x()[i - 1]);
  EXPECT_EQ(g.x().front(), 0.0);
  EXPECT_EQ(g.x().back(), 1.0);
  EXPECT_FALSE(g.has_chart());
  EXPECT_THROW(g.r(), StateError);
}

TEST(Grid, WeightOfConstant)
{
  for (double gam : {4.0 / 3.0, 1.4, 1.5, 5.0 / 3.0, 2.0}) {
    const auto c = build_L_coeffs(make_params(gam, 2.0));
    for (int n : {16, 100, 513}) {
      const WeightedGrid g(c, n);
      const double exact = 2.0 / c.N() * std::pow(c.x_R(), c.N() / 2.0);
      double sw = 0.0, sm = 0.0;
      for (int i = 0; i < n; ++i) {
        sw += g.weight()[i];
        sm += g.mass()[i];
      }
      EXPECT_NEAR(sw, exact, 1e-10 * exact);
      EXPECT_NEAR(sm, exact, 1e-10 * exact);
      const std::vector<double> one(n, 1.0);
      EXPECT_NEAR(weighted_norm(g, one), std::sqrt(exact), 1e-10 * std::sqrt(exact));
    }
  }
}

TEST(Grid, QuadratureIsFourthOrder)
{
  std::mt19937_64 rng(3);
  const double N = 5.5;
  const auto c = laplacian_coeffs(N, 1.3);
  const PolyField p = random_poly(rng, 6);
  const double exact = p.weighted_integral(N, 1.3);
  std::vector<double> err;
  for (int n : {65, 129, 257, 513}) {
    const WeightedGrid g(c, n);
    double s = 0.0;
    const auto y = p.sample(g);
    for (int i = 0; i < n; ++i)
      s += g.weight()[i] * y[i];
    err.push_back(std::abs(s - exact));
  }
  EXPECT_GT(std::log2(err[0] / err[1]), 3.3);
  EXPECT_GT(std::log2(err[1] / err[2]), 3.5);
  EXPECT_GT(std::log2(err[2] / err[3]), 3.8);
}

TEST(Laplacian, ExactOnAffine)
{
  for (double N : {4.0, 5.3, 8.0}) {
    const auto c = laplacian_coeffs(N, 2.0);
    const WeightedGrid g(c, 40);
    const std::vector<double> one(g.n(), 1.0);
    for (double v : laplacian_apply(g, one))
      EXPECT_NEAR(v, 0.0, 1e-11);
    const auto lx = laplacian_apply(g, g.x());
    for (double v : lx)
      EXPECT_NEAR(v, N / 2.0, 1e-10);
  }
  const auto c = laplacian_coeffs(4.0);
  const WeightedGrid g(c, 4);
  EXPECT_NO_THROW(laplacian_apply(g, g.x()));
  EXPECT_THROW(laplacian_apply(g, std::vector<double>(3, 0.0)), GridError);
}

TEST(Laplacian, SecondOrderOnQuadratic)
{
  const double N = 6.0;
  const auto c = laplacian_coeffs(N, 1.0);
  std::vector<double> err;
  for (int n : {65, 129, 257, 513}) {
    const WeightedGrid g(c, n);
    std::vector<double> y(n), ex(n);
    for (int i = 0; i < n; ++i) {
      y[i] = g.x()[i] * g.x()[i];
      ex[i] = (2.0 + N) * g.x()[i];
    }
    err.push_back(sup_error(laplacian_apply(g, y), ex, n));
  }
  for (std::size_t k = 1; k < err.size(); ++k)
    EXPECT_GE(std::log2(err[k - 1] / err[k]), 1.9);
}

TEST(Derivatives, ExactOnAffine)
{
  const auto c = build_L_coeffs(make_params(1.5, 2.0));
  const WeightedGrid g(c, 50);
  const auto d1 = derivative_ops(g, std::vector<double>(g.n(), 1.0));
  for (int i = 0; i < g.n(); ++i) {
    EXPECT_NEAR(d1.D[i], 0.0, 1e-12);
    EXPECT_NEAR(d1.Dcheck[i], 0.0, 1e-12);
    EXPECT_NEAR(d1.Ddot[i], 0.0, 1e-12);
  }
  const auto dx = derivative_ops(g, g.x());
  for (int i = 0; i < g.n(); ++i) {
    EXPECT_NEAR(dx.D[i], 1.0, 1e-12);
    EXPECT_NEAR(dx.Dcheck[i], g.x()[i], 1e-12);
    EXPECT_NEAR(dx.Ddot[i], std::sqrt(g.x()[i]), 1e-12);
  }
}

TEST(Coefficients, L0MatchesRForm)
{
  for (double gam : {1.2, 4.0 / 3.0, 1.5, 2.0}) {
    const auto p = make_params(gam, 2.5);
    const auto c = build_L_coeffs(p);
    const WeightedGrid g(c, 200);
    for (int i = 0; i < g.n(); ++i) {
      const double r = g.r()[i];
      // L[1] in the r-form
      EXPECT_NEAR(c.at_z(g.z()[i]).L0, apply_L_rform(p, r, 1.0, 0.0, 0.0), 1e-12);
    }
  }
  const auto c8 = build_L_coeffs(make_params(4.0 / 3.0, 2.0));
  EXPECT_NEAR(c8.L0(0.3), 0.0, 1e-14);
}

TEST(Coefficients, L1MatchesRFormRoute)
{
  for (double gam : {1.2, 1.5, 5.0 / 3.0, 2.0}) {
    for (double R : {1.5, 2.0, 4.0}) {
      const auto p = make_params(gam, R);
      const auto c = build_L_coeffs(p);
      const CoordinateChart& ch = *c.chart();
      for (int k = 1; k <= 200; ++k) {
        const double z = ch.z_R() * k / 200.0;
        const XJet j = x_jet(ch, z);
        const double r = ch.r_of_z(z);
        const double Lx = apply_L_rform(p, r, j.x, j.x_r, j.x_rr);
        const double Lxz = apply_L_zform(p, z, j.x, j.x_z, j.x_zz);
        const CoeffValues v = c.at_z(z);
        const double L1r = (Lx + p.N() / 2.0 - v.L0 * j.x) / j.x;
        EXPECT_NEAR(Lx, Lxz, 1e-10 * (1 + std::abs(Lx)));
        EXPECT_NEAR(v.L1, L1r, 1e-8 * (1 + std::abs(L1r)) + 1e-14 / j.x);
      }
      EXPECT_NEAR(c.L1(0.0), (14.0 - 2.0 * p.N()) / (3.0 * R * R * R), 1e-13);
    }
  }
}

TEST(Coefficients, SeriesBranchIsContinuous)
{
  const double N = 6.0, R = 2.0;
  const auto a = full_coeffs_at_z(N, R, 0.05 - 1e-12);
  const auto b = full_coeffs_at_z(N, R, 0.05 + 1e-12);
  EXPECT_NEAR(a.L1, b.L1, 1e-12);
}

TEST(Coefficients, OmegaIsSymmetrizingDensity)
{
  const auto c = build_L_coeffs(make_params(1.5, 2.0));
  for (double x : {0.05, 0.5, 1.5, 3.0}) {
    const double h = 1e-5;
    const double d = (std::log(c.omega(x + h)) - std::log(c.omega(x - h))) / (2 * h);
    EXPECT_NEAR(d, -c.L1(x), 1e-8);
  }
  EXPECT_NEAR(c.omega(0.0), 1.0, 1e-15);
}

TEST(Coefficients, TaylorFit)
{
  for (double gam : {1.2, 1.5, 2.0}) {
    for (double R : {1.5, 2.0, 4.0}) {
      const auto c = build_L_coeffs(make_params(gam, R));
      const double x_c = std::min(c.x_R(), c.chart()->x_inf() / 4.0);
      const PolyField p1(c.L1_taylor()), p0(c.L0_taylor());
      for (int k = 0; k <= 100; ++k) {
        const double x = x_c * k / 100.0;
        EXPECT_NEAR(p1(x), c.L1(x), 1e-11 * (1 + std::abs(c.L1(x))));
        EXPECT_NEAR(p0(x), c.L0(x), 1e-11 * (1 + std::abs(c.L0(x))));
      }
      EXPECT_NEAR(c.L1_taylor()[0], c.L1(0.0), 1e-11);
    }
  }
  const auto l = laplacian_coeffs(6.0);
  for (double v : l.L1_taylor())
    EXPECT_EQ(v, 0.0);
}

TEST(Coefficients, DualFormOnSmoothField)
{
  const auto p = make_params(1.5, 2.0);
  const auto c = build_L_coeffs(p);
  const WeightedGrid g(c, 2048);
  double worst = 0.0;
  for (int i = 1; i < g.n(); ++i) {
    const double z = g.z()[i];
    const double x = g.x()[i];
    const double y = std::cos(x) + x * x, yx = -std::sin(x) + 2 * x, yxx = -std::cos(x) + 2;
    const CoeffValues v = c.at_z(z);
    const double xform = -(x * yxx + p.N() / 2 * yx) + v.L1 * x * yx + v.L0 * y;
    const XJet j = x_jet(*c.chart(), z);
    const double rform = apply_L_rform(p, g.r()[i], y, yx * j.x_r, yxx * j.x_r * j.x_r + yx * j.x_rr);
    worst = std::max(worst, std::abs(xform - rform));
  }
  EXPECT_LE(worst, 1e-7);
}

TEST(DiscreteL, SymmetricAndConsistent)
{
  const auto p = make_params(1.5, 2.0);
  const auto c = build_L_coeffs(p);
  std::vector<double> err;
  for (int n : {129, 257, 513}) {
    const WeightedGrid g(c, n);
    const DiscreteL op = assemble_L(c, g);
    EXPECT_LT(op.symmetry_defect(), 1e-13);
    // L[1] = L0 exactly (no flux)
    const auto l1 = op.A.apply(std::vector<double>(n, 1.0));
    for (int i = 0; i + 1 < n; ++i)
      EXPECT_NEAR(l1[i], op.L0[i], 1e-14 * std::abs(op.A.diag[i]));
    // smooth Dirichlet field
    std::vector<double> y(n), ex(n);
    for (int i = 0; i < n; ++i) {
      const double x = g.x()[i];
      const double s = c.x_R() - x;
      y[i] = s * std::cos(x);
      const double yx = -std::cos(x) - s * std::sin(x);
      const double yxx = 2 * std::sin(x) - s * std::cos(x);
      const CoeffValues v = c.at_z(g.z()[i]);
      ex[i] = -(x * yxx + p.N() / 2 * yx) + v.L1 * x * yx + v.L0 * y[i];
    }
    err.push_back(sup_error(op.A.apply(y), ex, n - 1));
  }
  EXPECT_GE(std::log2(err[0] / err[1]), 1.9);
  EXPECT_GE(std::log2(err[1] / err[2]), 1.9);
}

TEST(DiscreteL, LaplacianSelfAdjointAndNegative)
{
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  const auto c = laplacian_coeffs(5.0, 1.0);
  const WeightedGrid g(c, 101);
  const Tridiagonal T = assemble_laplacian(g);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> y(g.n()), f(g.n());
    for (int i = 0; i + 1 < g.n(); ++i) {
      y[i] = n01(rng);
      f[i] = n01(rng);
    }
    y.back() = f.back() = 0.0;
    const auto Ly = T.apply(y), Lf = T.apply(f);
    double a = 0, b = 0, q = 0;
    for (int i = 0; i + 1 < g.n(); ++i) {
      a += g.mass()[i] * Ly[i] * f[i];
      b += g.mass()[i] * y[i] * Lf[i];
      q += g.mass()[i] * Ly[i] * y[i];
    }
    EXPECT_NEAR(a, b, 1e-10 * std::abs(a));
    EXPECT_LE(q, 0.0);
  }
}

TEST(DiscreteL, QuadratureSymmetryConvergesSecondOrder)
{
  // with the fourth-order weights the defect of (Lap y|phi) - (y|Lap phi) is O(h^2)
  const auto c = laplacian_coeffs(6.0, 1.0);
  std::vector<double> defect;
  for (int n : {65, 129, 257}) {
    const WeightedGrid g(c, n);
    std::vector<double> y(n), f(n);
    for (int i = 0; i < n; ++i) {
      const double x = g.x()[i];
      y[i] = (1 - x) * std::exp(x);
      f[i] = (1 - x) * (1 + 3 * x * x);
    }
    const auto Ly = laplacian_apply(g, y), Lf = laplacian_apply(g, f);
    defect.push_back(std::abs(weighted_inner(g, Ly, f) - weighted_inner(g, y, Lf)));
  }
  EXPECT_GE(std::log2(defect[0] / defect[1]), 1.8);
  EXPECT_GE(std::log2(defect[1] / defect[2]), 1.8);
}

TEST(Norms, GradingNorm)
{
  const auto c = laplacian_coeffs(6.0, 1.0);
  const WeightedGrid g(c, 256);
  const std::vector<double> zero(g.n(), 0.0);
  for (int k = 0; k <= 6; ++k)
    EXPECT_EQ(grading_norm(g, zero, k), 0.0);
  EXPECT_THROW(grading_norm(g, zero, 7), OrderError);
  EXPECT_THROW(grading_norm(g, zero, -1), OrderError);
  const WeightedGrid fine(c, 512);
  EXPECT_NO_THROW(grading_norm(fine, std::vector<double>(512, 0.0), 8));
  // (y)_2 of y = x equals ||N/2||
  const double n2 = grading_norm(g, g.x(), 2);
  const double y0 = weighted_norm(g, g.x());
  const double y1 = weighted_norm(g, derivative_ops(g, g.x()).Ddot);
  const double y2 = 3.0 * weighted_norm(g, std::vector<double>(g.n(), 1.0));
  EXPECT_NEAR(n2, std::sqrt(y0 * y0 + y1 * y1 + y2 * y2), 1e-9 * n2);
}

TEST(Norms, IntegrationByParts)
{
  // (Ddot y|Ddot phi) = (-Lap y|phi) for phi(x_R) = 0
  std::mt19937_64 rng(23);
  for (double N : {4.0, 5.5, 8.0}) {
    const double X = 1.7;
    const auto c = laplacian_coeffs(N, X);
    const WeightedGrid g(c, 1025);
    for (int t = 0; t < 10; ++t) {
      const PolyField y = random_poly(rng, 5);
      const PolyField phi = random_poly(rng, 4) * PolyField({X, -1.0});
      // exact: integrands x y' phi' and -Lap y phi are polynomials
      const PolyField left = PolyField({0.0, 1.0}) * y.d() * phi.d();
      const PolyField right = y.lap(N / 2) * phi;
      const double a = left.weighted_integral(N, X);
      const double b = -right.weighted_integral(N, X);
      EXPECT_NEAR(a, b, 1e-8 * (1 + std::abs(a)));
      // same identity by grid quadrature of the sampled integrands (degree ~20 in zeta)
      const double aq = weighted_inner(g, left.sample(g), std::vector<double>(g.n(), 1.0));
      const double bq = -weighted_inner(g, right.sample(g), std::vector<double>(g.n(), 1.0));
      EXPECT_NEAR(aq, a, 1e-6 * (1 + std::abs(a)));
      EXPECT_NEAR(aq, bq, 1e-6 * (1 + std::abs(a)));
    }
  }
}

TEST(Identity, DerivativeIntegralRepresentation)
{
  std::mt19937_64 rng(31);
  for (double N : {4.0, 6.0, 7.3}) {
    for (int m = 0; m <= 3; ++m) {
      for (int t = 0; t < 5; ++t) {
        const PolyField y = random_poly(rng, 8);
        for (double x : {0.2, 0.7, 1.0}) {
          const auto s = derivative_integral_identity(y, m, N, x);
          EXPECT_NEAR(s.direct, s.integral, 1e-8 * (1 + std::abs(s.direct)));
        }
      }
    }
    // y = x^3, m = 1
    const auto s = derivative_integral_identity(PolyField::monomial(3), 1, N, 0.6);
    EXPECT_NEAR(s.direct, s.integral, 1e-8);
  }
}

TEST(Identity, DerivativeBound)
{
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<int> deg(1, 8), mm(0, 2), kk(1, 2);
  double worst = 0.0;
  for (double N : {4.0, 6.0, 8.0}) {
    for (int t = 0; t < 300; ++t) {
      const PolyField y = random_poly(rng, deg(rng));
      worst = std::max(worst, derivative_bound_ratio(y, mm(rng), kk(rng), N, 1.0));
    }
  }
  EXPECT_LE(worst, 1.0 + 1e-12);
}

TEST(Identity, EmbeddingRatioBounded)
{
  // sup|y| / sum_{j<=s} ||Lap^j y|| for Dirichlet polynomials, 2s > N/2
  std::mt19937_64 rng(41);
  for (double N : {4.0, 6.0, 8.0}) {
    const int s = int(std::floor(N / 4.0)) + 1;
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      const PolyField y = random_poly(rng, 6) * PolyField({1.0, -1.0});
      double den = 0.0;
      PolyField cur = y;
      for (int j = 0; j <= s; ++j) {
        den += std::sqrt((cur * cur).weighted_integral(N, 1.0));
        cur = cur.lap(N / 2);
      }
      double sup = 0.0;
      for (int i = 0; i <= 1000; ++i)
        sup = std::max(sup, std::abs(y(i / 1000.0)));
      worst = std::max(worst, sup / den);
    }
    EXPECT_LT(worst, 10.0) << N;
  }
}
