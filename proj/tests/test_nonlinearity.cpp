#include "atmos/nonlinearity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace atmos;

namespace
{

struct Jet
{
  double r, y, y_r, y_rr;
};

// Random admissible jet: |y| + |r y_r| < 0.6.
Jet random_jet(std::mt19937_64& rng, const ModelParams& p)
{
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_real_distribution<double> Ur(1.0, p.R());
  Jet j;
  j.r = Ur(rng);
  j.y = 0.3 * U(rng);
  j.y_r = 0.3 * U(rng) / j.r;
  j.y_rr = 2.0 * U(rng);
  return j;
}

} // namespace

TEST(GH, VanishAtEquilibrium)
{
  const auto p = make_params(1.5, 2.0);
  const auto d = eval_GH(p, {0.0, 0.0});
  EXPECT_EQ(d.G, 0.0);
  EXPECT_EQ(d.H, 0.0);
  const auto t = eval_GI_GII(p, 1.3, {0.0, 0.0});
  EXPECT_EQ(t.G2, 0.0);
  EXPECT_EQ(t.G_I, 0.0);
  EXPECT_EQ(t.G_II, 0.0);
}

TEST(GH, LinearParts)
{
  for (double g : {1.2, 1.5, 2.0}) {
    const auto p = make_params(g, 2.0);
    const auto d = eval_GH(p, {0.0, 0.0});
    EXPECT_NEAR(d.G_y, 3 * g, 1e-15);
    EXPECT_NEAR(d.G_v, g, 1e-15);
    EXPECT_NEAR(d.H_y, 4.0, 1e-15);
    // numerically fitted slopes at the origin
    const double h = 1e-5;
    const double sy = (eval_GH(p, {h, 0}).G - eval_GH(p, {-h, 0}).G) / (2 * h);
    const double sv = (eval_GH(p, {0, h}).G - eval_GH(p, {0, -h}).G) / (2 * h);
    const double sh = (eval_GH(p, {h, 0}).H - eval_GH(p, {-h, 0}).H) / (2 * h);
    EXPECT_NEAR(sy, 3 * g, 1e-8);
    EXPECT_NEAR(sv, g, 1e-8);
    EXPECT_NEAR(sh, 4.0, 1e-8);
  }
}

TEST(GH, PartialsMatchFiniteDifferences)
{
  const auto p = make_params(1.5, 2.0);
  const PerturbationPoint pt{0.1, 0.05};
  const auto d = eval_GH(p, pt);
  const double h = 1e-5;
  auto G = [&](double y, double v) { return eval_GH(p, {y, v}).G; };
  auto Gv = [&](double y, double v) { return eval_GH(p, {y, v}).G_v; };
  EXPECT_NEAR(d.G_y, (G(pt.y + h, pt.v) - G(pt.y - h, pt.v)) / (2 * h), 1e-8);
  EXPECT_NEAR(d.G_v, (G(pt.y, pt.v + h) - G(pt.y, pt.v - h)) / (2 * h), 1e-8);
  EXPECT_NEAR(d.G_vv, (Gv(pt.y, pt.v + h) - Gv(pt.y, pt.v - h)) / (2 * h), 1e-8);
  EXPECT_NEAR(d.G_yv, (Gv(pt.y + h, pt.v) - Gv(pt.y - h, pt.v)) / (2 * h), 1e-8);
  EXPECT_NEAR(d.H_y, (eval_GH(p, {pt.y + h, 0}).H - eval_GH(p, {pt.y - h, 0}).H) / (2 * h), 1e-8);
  // G - g(3y+v) is second order
  const double G2 = d.G - p.gamma() * (3 * pt.y + pt.v);
  EXPECT_LT(std::abs(G2), 20.0 * 0.1 * 0.1);
}

TEST(GH, SecondOrderRemainders)
{
  const auto p = make_params(5.0 / 3.0, 3.0);
  for (double s = 1e-1; s > 1e-5; s *= 0.1) {
    const auto t = eval_GI_GII(p, 1.7, {0.6 * s, -0.4 * s});
    const double n2 = s * s;
    EXPECT_LT(std::abs(t.G2) / n2, 30.0);
    EXPECT_LT(std::abs(t.H - 4 * 0.6 * s) / n2, 30.0);
    EXPECT_LT(std::abs(t.G_II) / n2, 100.0);
    EXPECT_LT(std::abs(t.G_I) / s, 30.0);
  }
}

TEST(GH, Inadmissible)
{
  const auto p = make_params(1.5, 2.0);
  EXPECT_THROW(eval_GH(p, {-1.0, 0.0}), StateError);
  EXPECT_THROW(eval_GH(p, {-0.5, -0.6}), StateError);
  EXPECT_THROW(eval_GI_GII(p, 1.5, {-1.2, 0.0}), StateError);
  EXPECT_GT(admissibility_margin({0.3, -0.2}), 0.0);
  EXPECT_LT(admissibility_margin({0.7, -0.5}), 0.0);
}

TEST(GII, BoundaryLimit)
{
  const auto p = make_params(1.5, 2.0);
  const auto t = eval_GI_GII(p, 2.0, {0.01, 0.02});
  EXPECT_TRUE(std::isfinite(t.G_II));
  EXPECT_NEAR(t.G_II, t.G_II1 / (0.5 * 8.0), 1e-16);
  EXPECT_THROW(eval_GI_GII(p, 0.9, {0.0, 0.0}), DomainError);
}

TEST(Identity, SplitFormEqualsOriginalForm)
{
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (double g : {1.2, 4.0 / 3.0, 1.5, 5.0 / 3.0, 2.0}) {
    for (double R : {1.5, 2.0, 4.0}) {
      const auto p = make_params(g, R);
      for (int k = 0; k < 100; ++k) {
        const Jet j = random_jet(rng, p);
        const double a = original_spatial(p, j.r, j.y, j.y_r, j.y_rr);
        const double b = split_spatial(p, j.r, j.y, j.y_r, j.y_rr);
        worst = std::max(worst, std::abs(a - b));
      }
    }
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Identity, LinearizationOfOriginalForm)
{
  // d/ds of the original form at s = 0 along a jet is L applied to the jet
  const auto p = make_params(1.4, 2.5);
  const double s = 1e-6;
  for (double r : {1.1, 1.8, 2.4}) {
    const double Y = 0.3, Yr = -0.7, Yrr = 1.9;
    const double d = (original_spatial(p, r, s * Y, s * Yr, s * Yrr)
                      - original_spatial(p, r, -s * Y, -s * Yr, -s * Yrr)) / (2 * s);
    EXPECT_NEAR(d, apply_L_rform(p, r, Y, Yr, Yrr), 1e-7);
  }
}

TEST(Coefficient, BracketVanishes)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double g : {1.2, 1.5, 2.0}) {
    const auto p = make_params(g, 2.0);
    for (int k = 0; k < 200; ++k) {
      const double eps = std::pow(10.0, -1.0 - 3.0 * (0.5 + 0.5 * U(rng)));
      const double Y = U(rng), V = U(rng);
      EXPECT_LE(std::abs(bracket_U(p, eps, Y, V)), 1e-9);
    }
  }
}

TEST(Coefficient, ClosedFormMatchesPartials)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double g : {1.2, 1.5, 5.0 / 3.0, 2.0}) {
    for (double R : {1.5, 2.0, 4.0}) {
      const auto p = make_params(g, R);
      std::uniform_real_distribution<double> Ur(1.0, R);
      for (int k = 0; k < 50; ++k) {
        const double r = Ur(rng);
        const double eps = 1e-2;
        const double Y = U(rng), Yr = U(rng), Yrr = 3 * U(rng);
        const double a = a21_closed_form(p, r, eps, Y, Yr, Yrr);
        const double b = a21_from_partials(p, r, eps, Y, Yr, Yrr);
        const double c = a21_finite_difference(p, r, eps, Y, Yr, Yrr);
        const double scale = std::max(std::abs(a), 1e-3 * (1.0 / r - 1.0 / R) + 1e-300);
        EXPECT_LE(std::abs(a - b), 1e-6 * scale) << g << " " << R << " " << r;
        EXPECT_LE(std::abs(c - b), 1e-5 * scale);
      }
    }
  }
}

TEST(Coefficient, TrivialAndBoundary)
{
  const auto p = make_params(1.5, 2.0);
  EXPECT_EQ(a21_closed_form(p, 1.4, 1e-2, 0, 0, 0), 0.0);
  EXPECT_NEAR(a21_from_partials(p, 1.4, 1e-2, 0, 0, 0), 0.0, 1e-14);
  EXPECT_EQ(a21_closed_form(p, 2.0, 1e-2, 0.3, 0.2, 1.0), 0.0);
  // linear vanishing at r = R
  const double a1 = a21_closed_form(p, 2.0 - 1e-4, 1e-2, 0.3, 0.2, 1.0) / 1e-4;
  const double a2 = a21_closed_form(p, 2.0 - 1e-5, 1e-2, 0.3, 0.2, 1.0) / 1e-5;
  EXPECT_NEAR(a1 / a2, 1.0, 1e-3);
  EXPECT_THROW(a21_from_partials(p, 1.4, 0.0, 1, 1, 1), DomainError);
}

TEST(WForm, DecompositionHolds)
{
  // with y = eps(y1 + w):  (1 + eps a) L w + eps b + eps c = S/eps - L y1,
  // S the split-form spatial operator of y.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const auto p = make_params(1.5, 2.0);
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    for (int k = 0; k < 50; ++k) {
      const double r = 1.0 + 0.999 * (0.5 + 0.5 * U(rng));
      const double Y1 = U(rng), Y1r = U(rng), Y1rr = U(rng);
      const double W = 0.5 * U(rng), Wr = 0.5 * U(rng), Wrr = 0.5 * U(rng);
      const double Ly1 = apply_L_rform(p, r, Y1, Y1r, Y1rr);
      const double Lw = apply_L_rform(p, r, W, Wr, Wrr);
      const WFormTerms t = eval_wform(p, eps, {r, Y1, r * Y1r, Ly1, W, r * Wr});
      const double lhs = (1 + eps * t.a) * Lw + eps * t.b + eps * t.c;
      const double S = split_spatial(p, r, eps * (Y1 + W), eps * (Y1r + Wr), eps * (Y1rr + Wrr));
      const double rhs = S / eps - Ly1;
      EXPECT_NEAR(lhs, rhs, 1e-9 * (1.0 + std::abs(Ly1) + std::abs(Lw)));
      // a, b, c stay O(1) as eps -> 0
      EXPECT_LT(std::abs(t.a), 50.0);
      EXPECT_LT(std::abs(t.b), 500.0);
      EXPECT_LT(std::abs(t.c), 500.0);
    }
  }
}
