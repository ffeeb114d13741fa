#ifndef ATMOS_NONLINEARITY_HPP
#define ATMOS_NONLINEARITY_HPP

// Closed-form nonlinear terms of the Lagrangian perturbation equation.
//
//   G(y,v)  = 1 - (1+y)^{-2g} (1+y+v)^{-g}
//   H(y)    = (1+y)^2 - (1+y)^{-2}
//   G2      = G - g(3y+v)
//   G_I     = (1+y)^2 (1 + dG2/dv / g) - 1
//   G_II    = (P/rho)/r^2 G_II0 + G_II1 / ((g-1) r^3)
//
// All partials are analytic. Evaluation is templated on the floating type so
// that the eps-differences of the w-form can run in extended precision.

#include "atmos/errors.hpp"
#include "atmos/model.hpp"

#include <cmath>
#include <string>

namespace atmos
{

struct PerturbationPoint
{
  double y = 0.0;
  double v = 0.0;
};

/// 1 - |y| - |v|; positive inside the admissible set.
inline double admissibility_margin(const PerturbationPoint& pt)
{
  return 1.0 - std::abs(pt.y) - std::abs(pt.v);
}

template <class T>
void require_admissible(T y, T v)
{
  if (!(1 + y > 0))
    throw StateError("inadmissible state: 1+y <= 0 (y=" + std::to_string(double(y)) + ")");
  if (!(1 + y + v > 0))
    throw StateError("inadmissible state: 1+y+v <= 0 (y=" + std::to_string(double(y))
                     + ", v=" + std::to_string(double(v)) + ")");
}

template <class T>
struct GPartialsT
{
  T G, G_y, G_v, G_vv, G_yv;
  T H, H_y;
};

template <class T>
struct NonlinearTermsT
{
  T G, H, G2, dG2_dy, dG2_dv;
  T G_I, G_II0, G_II1, G_II;
};

using GPartials = GPartialsT<double>;
using NonlinearTerms = NonlinearTermsT<double>;

template <class T>
GPartialsT<T> eval_G_partials(T gamma, T y, T v)
{
  using std::exp;
  using std::expm1;
  using std::log1p;
  require_admissible(y, v);
  const T ly = log1p(y);
  const T lyv = log1p(y + v);
  // a = (1+y)^{-2g}, b = (1+y+v)^{-g}
  const T a = exp(-2 * gamma * ly);
  const T b = exp(-gamma * lyv);
  const T iyv = 1 / (1 + y + v);
  const T iy = 1 / (1 + y);

  GPartialsT<T> d;
  d.G = -expm1(-2 * gamma * ly - gamma * lyv);
  d.G_v = gamma * a * b * iyv;
  d.G_y = 2 * gamma * a * iy * b + d.G_v;
  d.G_vv = -gamma * (gamma + 1) * a * b * iyv * iyv;
  d.G_yv = -gamma * (2 * gamma * a * iy * b * iyv + (gamma + 1) * a * b * iyv * iyv);
  const T q = 1 + y;
  d.H = q * q - iy * iy;
  d.H_y = 2 * q + 2 * iy * iy * iy;
  return d;
}

/// gamma P/rho = 1/r - 1/R written as (R-r)/(rR) to keep digits near r = R.
template <class T>
T gamma_P_over_rho(T R, T r)
{
  return r >= R ? T(0) : (R - r) / (r * R);
}

template <class T>
NonlinearTermsT<T> eval_terms(T gamma, T R, T r, T y, T v)
{
  const GPartialsT<T> d = eval_G_partials(gamma, y, v);
  const T q2 = (1 + y) * (1 + y);
  NonlinearTermsT<T> t;
  t.G = d.G;
  t.H = d.H;
  t.G2 = d.G - gamma * (3 * y + v);
  t.dG2_dv = d.G_v - gamma;
  t.dG2_dy = d.G_y - 3 * gamma;
  t.G_I = q2 * (1 + t.dG2_dv / gamma) - 1;
  t.G_II0 = q2 * (3 * t.dG2_dv - t.dG2_dy) * v;
  t.G_II1 = q2 * (t.dG2_dv * ((4 - 3 * gamma) * y - gamma * v) / gamma + t.G2) - d.H + 4 * y * q2;
  const T P_over_rho = gamma_P_over_rho(R, r) / gamma;
  t.G_II = P_over_rho / (r * r) * t.G_II0 + t.G_II1 / ((gamma - 1) * r * r * r);
  return t;
}

/// G and H with the partials needed downstream.
inline GPartials eval_GH(const ModelParams& p, const PerturbationPoint& pt)
{
  return eval_G_partials<double>(p.gamma(), pt.y, pt.v);
}

inline NonlinearTerms eval_GI_GII(const ModelParams& p, double r, const PerturbationPoint& pt)
{
  if (!(r >= 1.0 && r <= p.R()))
    throw DomainError("eval_GI_GII: r must lie in [1, R]");
  return eval_terms<double>(p.gamma(), p.R(), r, pt.y, pt.v);
}

/// v-derivatives of G_I and G_II (analytic).
struct VPartials
{
  double dGI_dv;
  double dGII0_dv;
  double dGII1_dv;
  double dGII_dv;
};

inline VPartials eval_v_partials(const ModelParams& p, double r, const PerturbationPoint& pt)
{
  const double g = p.gamma();
  const GPartials d = eval_GH(p, pt);
  const double y = pt.y;
  const double v = pt.v;
  const double q2 = (1 + y) * (1 + y);
  const double G2v = d.G_v - g;
  const double G2y = d.G_y - 3 * g;
  VPartials out;
  out.dGI_dv = q2 * d.G_vv / g;
  out.dGII0_dv = q2 * ((3 * d.G_vv - d.G_yv) * v + (3 * G2v - G2y));
  out.dGII1_dv = q2 * d.G_vv * ((4 - 3 * g) * y - g * v) / g;
  const double P_over_rho = gamma_P_over_rho(p.R(), r) / g;
  out.dGII_dv = P_over_rho / (r * r) * out.dGII0_dv + out.dGII1_dv / ((g - 1) * r * r * r);
  return out;
}

// ---------------------------------------------------------------------------
// Pointwise spatial parts of the two equivalent forms of the equation of motion.
// Input is a local jet (y, y_r, y_rr) at radius r; v = r y_r.

/// Original form: -(1/(rho r))(1+y)^2 d/dr(P G) - H/((g-1) r^3).
inline double original_spatial(const ModelParams& p, double r, double y, double y_r, double y_rr)
{
  const double g = p.gamma();
  const double v = r * y_r;
  const double v_r = y_r + r * y_rr;
  const GPartials d = eval_GH(p, {y, v});
  const double dP_over_rho = -1.0 / ((g - 1.0) * r * r);
  const double P_over_rho = gamma_P_over_rho(p.R(), r) / g;
  const double q2 = (1 + y) * (1 + y);
  return -q2 / r * (dP_over_rho * d.G + P_over_rho * (d.G_y * y_r + d.G_v * v_r))
         - d.H / ((g - 1.0) * r * r * r);
}

/// Split form: (1 + G_I) L y + G_II.
inline double split_spatial(const ModelParams& p, double r, double y, double y_r, double y_rr)
{
  const NonlinearTerms t = eval_GI_GII(p, r, {y, r * y_r});
  return (1.0 + t.G_I) * apply_L_rform(p, r, y, y_r, y_rr) + t.G_II;
}

// ---------------------------------------------------------------------------
// Coefficient a21 of the linearized w-operator, two routes.

/// Verbatim closed form in terms of Y = y1 + w, with y = eps Y, v = r y_r.
inline double a21_closed_form(const ModelParams& p, double r, double eps, double Y, double Y_r,
                              double Y_rr)
{
  const double g = p.gamma();
  const double y = eps * Y;
  const double v = eps * r * Y_r;
  require_admissible(y, v);
  const double pref = gamma_P_over_rho(p.R(), r) * std::exp((2.0 - 2.0 * g) * std::log1p(y))
                      * std::exp((-g - 2.0) * std::log1p(y + v));
  return pref * ((g + 1.0) * Y_rr + 4.0 * g / r * Y_r + 2.0 * eps * (g - 1.0) / (1.0 + y) * Y_r * Y_r);
}

/// (dG_I/dv) L Y + eps^{-1} dG_II/dv from the analytic partials.
inline double a21_from_partials(const ModelParams& p, double r, double eps, double Y, double Y_r,
                                double Y_rr)
{
  if (!(eps > 0.0))
    throw DomainError("a21_from_partials: eps must be positive");
  const PerturbationPoint pt{eps * Y, eps * r * Y_r};
  const VPartials d = eval_v_partials(p, r, pt);
  return d.dGI_dv * apply_L_rform(p, r, Y, Y_r, Y_rr) + d.dGII_dv / eps;
}

/// Same as a21_from_partials with the v-derivatives taken by central differences.
inline double a21_finite_difference(const ModelParams& p, double r, double eps, double Y, double Y_r,
                                    double Y_rr, double dv = 1e-6)
{
  const PerturbationPoint pt{eps * Y, eps * r * Y_r};
  const double step = dv * std::max(1.0, std::abs(pt.v));
  const NonlinearTerms tp = eval_GI_GII(p, r, {pt.y, pt.v + step});
  const NonlinearTerms tm = eval_GI_GII(p, r, {pt.y, pt.v - step});
  const double dGI = (tp.G_I - tm.G_I) / (2 * step);
  const double dGII = (tp.G_II - tm.G_II) / (2 * step);
  return dGI * apply_L_rform(p, r, Y, Y_r, Y_rr) + dGII / eps;
}

/// The bracket [U] that the closed form relies on vanishing; (Y, V) scaled by eps.
inline double bracket_U(const ModelParams& p, double eps, double Y, double V)
{
  const double g = p.gamma();
  const VPartials d = eval_v_partials(p, 1.0, {eps * Y, eps * V});
  return g * d.dGI_dv * (3 * Y + V) - 4 * Y * d.dGI_dv + d.dGII1_dv / eps;
}

// ---------------------------------------------------------------------------
// w-form coefficients a, b, c for y = eps (y1 + w).
//
// b and c are eps-scaled differences of O(eps) quantities; they are formed in
// long double so the subtraction keeps about 19 digits.

struct WFormTerms
{
  double a;
  double b;
  double c;
};

struct WFormInput
{
  double r;
  double y1, v1, Ly1;
  double w, Omega;
};

inline WFormTerms eval_wform(const ModelParams& p, double eps, const WFormInput& in)
{
  using LD = long double;
  if (!(eps > 0.0))
    throw DomainError("eval_wform: eps must be positive");
  const LD g = p.gamma();
  const LD R = p.R();
  const LD r = in.r;
  const LD e = eps;
  const LD yf = e * (LD(in.y1) + LD(in.w));
  const LD vf = e * (LD(in.v1) + LD(in.Omega));
  const LD y0 = e * LD(in.y1);
  const LD v0 = e * LD(in.v1);
  const auto tf = eval_terms<LD>(g, R, r, yf, vf);
  const auto t0 = eval_terms<LD>(g, R, r, y0, v0);
  WFormTerms out;
  out.a = double(tf.G_I / e);
  out.b = double((tf.G_I - t0.G_I) / e * LD(in.Ly1) + (tf.G_II - t0.G_II) / (e * e));
  out.c = double(t0.G_I / e * LD(in.Ly1) + t0.G_II / (e * e));
  return out;
}

} // namespace atmos

#endif
