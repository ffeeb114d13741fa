#ifndef ATMOS_OPERATOR_HPP
#define ATMOS_OPERATOR_HPP

// Radial operators in x and their discretization on a grid uniform in
// zeta = sqrt(4x), where
//
//   Lap = x d2/dx2 + (N/2) d/dx = d2/dzeta2 + (N-1)/zeta d/dzeta
//   Dcheck = x d/dx = (zeta/2) d/dzeta,   Ddot = sqrt(x) d/dx = d/dzeta
//   x^{N/2-1} dx = 2^{1-N} zeta^{N-1} dzeta
//
// The linearized operator L = -Lap + L1 x d/dx + L0 is written in
// Sturm-Liouville form  L y = -(1/(w zeta^{N-1})) (w zeta^{N-1} y_zeta)_zeta + L0 y
// with density w(x) satisfying d ln w/dx = -L1, and discretized conservatively.

#include "atmos/errors.hpp"
#include "atmos/model.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace atmos
{

// ---------------------------------------------------------------------------
// Coefficients

namespace detail
{

/// D(z)/z with D(z) = (1-z)^{3/2} - F(z), as a power series (z small).
inline double D_over_z_series(double z)
{
  // binom(3/2,k)(-1)^k, binom(1/2,k)(-1)^k, asin(u)/u coefficients in z = u^2
  double b32 = 1.0, b12 = 1.0, ck = 1.0;
  double sum = 0.0, zp = 1.0;
  for (int k = 1; k <= 30; ++k) {
    b32 *= -(1.5 - (k - 1)) / k;
    b12 *= -(0.5 - (k - 1)) / k;
    ck *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (2.0 * k * (2.0 * k + 1.0));
    const double dk = b32 - 0.5 * (b12 + ck);
    sum += dk * zp;
    zp *= z;
    if (std::abs(dk * zp) < 1e-18 * std::abs(sum))
      break;
  }
  return sum;
}

} // namespace detail

/// L1, L0 and the symmetrizing density at one point of the full operator (z-form).
struct CoeffValues
{
  double L1;
  double L0;
  double omega;
};

inline CoeffValues full_coeffs_at_z(double N, double R, double z)
{
  const double R3 = R * R * R;
  const double F = xi_ratio(z);
  const double s = 1.0 - z;
  const double G = F / (s * std::sqrt(s));
  double one_minus_G_over_z;
  if (z < 0.05)
    one_minus_G_over_z = detail::D_over_z_series(z) / (s * std::sqrt(s));
  else
    one_minus_G_over_z = (1.0 - G) / z;
  CoeffValues c;
  c.L1 = (0.5 * (N - 1.0) * one_minus_G_over_z + 4.0 * G) / (F * F) / R3;
  c.L0 = (8.0 - N) / (2.0 * R3 * s * s * s);
  c.omega = std::pow(s, 0.5 * (9.0 - N)) / std::pow(F, N - 1.0);
  return c;
}

/// The linearized operator on [0, x_R] (or pure -Lap when no model is attached),
/// optionally carrying generic wave-operator fields b2, b1, b0.
class LinearOperatorCoeffs
{
public:
  using Field = std::function<double(double)>;

  static LinearOperatorCoeffs laplacian(double N, double x_R = 1.0)
  {
    if (!(N >= 2.0))
      throw DomainError("laplacian: N must be >= 2");
    if (!(x_R > 0.0))
      throw DomainError("laplacian: x_R must be positive");
    LinearOperatorCoeffs c;
    c.N_ = N;
    c.x_R_ = x_R;
    c.l1_taylor_.assign(taylor_degree() + 1, 0.0);
    c.l0_taylor_.assign(taylor_degree() + 1, 0.0);
    return c;
  }

  static LinearOperatorCoeffs from_params(const ModelParams& p)
  {
    LinearOperatorCoeffs c;
    c.params_ = p;
    c.chart_.emplace(p);
    c.N_ = p.N();
    c.x_R_ = c.chart_->x_R();
    c.fit_taylor();
    return c;
  }

  static constexpr int taylor_degree() { return 12; }

  double N() const noexcept { return N_; }
  double x_R() const noexcept { return x_R_; }
  double zeta_R() const noexcept { return std::sqrt(4.0 * x_R_); }
  bool is_laplacian() const noexcept { return !params_.has_value(); }
  const std::optional<ModelParams>& params() const noexcept { return params_; }
  const std::optional<CoordinateChart>& chart() const noexcept { return chart_; }

  CoeffValues at_z(double z) const
  {
    if (!params_)
      return {0.0, 0.0, 1.0};
    return full_coeffs_at_z(N_, params_->R(), z);
  }

  CoeffValues at_x(double x) const
  {
    if (!(x >= 0.0 && x <= x_R_ * (1.0 + 1e-13)))
      throw DomainError("coefficients: x outside [0, x_R]");
    if (!params_)
      return {0.0, 0.0, 1.0};
    return at_z(chart_->z_of_x(std::min(x, x_R_)));
  }

  double L1(double x) const { return at_x(x).L1; }
  double L0(double x) const { return at_x(x).L0; }
  double omega(double x) const { return at_x(x).omega; }

  const std::vector<double>& L1_taylor() const noexcept { return l1_taylor_; }
  const std::vector<double>& L0_taylor() const noexcept { return l0_taylor_; }

  // Wave-operator fields; defaults reproduce L itself.
  void set_wave_fields(Field b2, Field b1, Field b0)
  {
    b2_ = std::move(b2);
    b1_ = std::move(b1);
    b0_ = std::move(b0);
  }
  bool has_wave_fields() const noexcept { return bool(b2_) || bool(b1_) || bool(b0_); }
  double b2(double x) const { return b2_ ? b2_(x) : 1.0; }
  double b1(double x) const { return b1_ ? b1_(x) : L1(x); }
  double b0(double x) const { return b0_ ? b0_(x) : L0(x); }

private:
  LinearOperatorCoeffs() = default;

  // Least-squares fit at Chebyshev points of [0, x_c]; the coefficients are
  // analytic up to x_inf, so [0, x_inf/4] keeps the fit well inside.
  void fit_taylor()
  {
    const int K = taylor_degree();
    const int M = 48;
    const double x_c = std::min(x_R_, chart_->x_inf() / 4.0);
    Eigen::MatrixXd V(M, K + 1);
    Eigen::VectorXd b1(M), b0(M);
    for (int j = 0; j < M; ++j) {
      const double s = 0.5 * (1.0 - std::cos(std::numbers::pi * (j + 0.5) / M));
      const CoeffValues c = at_x(s * x_c);
      double sp = 1.0;
      for (int k = 0; k <= K; ++k) {
        V(j, k) = sp;
        sp *= s;
      }
      b1(j) = c.L1;
      b0(j) = c.L0;
    }
    const auto qr = V.colPivHouseholderQr();
    const Eigen::VectorXd a1 = qr.solve(b1);
    const Eigen::VectorXd a0 = qr.solve(b0);
    l1_taylor_.resize(K + 1);
    l0_taylor_.resize(K + 1);
    double scale = 1.0;
    for (int k = 0; k <= K; ++k) {
      l1_taylor_[k] = a1(k) / scale;
      l0_taylor_[k] = a0(k) / scale;
      scale *= x_c;
    }
  }

  double N_ = 4.0;
  double x_R_ = 1.0;
  std::optional<ModelParams> params_;
  std::optional<CoordinateChart> chart_;
  std::vector<double> l1_taylor_;
  std::vector<double> l0_taylor_;
  Field b2_, b1_, b0_;
};

inline LinearOperatorCoeffs build_L_coeffs(const ModelParams& p) { return LinearOperatorCoeffs::from_params(p); }
inline LinearOperatorCoeffs laplacian_coeffs(double N, double x_R = 1.0)
{
  return LinearOperatorCoeffs::laplacian(N, x_R);
}

/// z-form of L applied to a local jet (y, y_z, y_zz).
inline double apply_L_zform(const ModelParams& p, double z, double y, double y_z, double y_zz)
{
  const double N = p.N();
  const double R3 = p.R() * p.R() * p.R();
  const double s = 1.0 - z;
  const double pm = z / s; // p/mu
  const double dp_over_mu = 0.5 * N / s - 0.5 * (8.0 - N) * z / (s * s);
  return (-pm * y_zz - dp_over_mu * y_z + 0.5 * (8.0 - N) / (s * s * s) * y) / R3;
}

// ---------------------------------------------------------------------------
// Grid

/// Node grid uniform in zeta on [0, zeta_R]; the last node is the Dirichlet end x = x_R.
class WeightedGrid
{
public:
  WeightedGrid(const LinearOperatorCoeffs& c, int n) : N_(c.N()), x_R_(c.x_R()), n_(n)
  {
    if (n < 4)
      throw GridError("grid needs at least 4 points, got " + std::to_string(n));
    zeta_R_ = std::sqrt(4.0 * x_R_);
    h_ = zeta_R_ / (n - 1);
    scale_ = std::pow(2.0, 1.0 - N_);
    zeta_.resize(n);
    x_.resize(n);
    for (int i = 0; i < n; ++i) {
      zeta_[i] = i * h_;
      x_[i] = zeta_[i] * zeta_[i] / 4.0;
    }
    zeta_.back() = zeta_R_;
    x_.back() = x_R_;
    build_masses();
    build_weights();
    if (c.chart()) {
      chart_ = c.chart();
      z_.resize(n);
      r_.resize(n);
      for (int i = 0; i < n; ++i) {
        z_[i] = i == n - 1 ? chart_->z_R() : chart_->z_of_zeta(zeta_[i]);
        r_[i] = chart_->r_of_z(z_[i]);
      }
    }
  }

  double N() const noexcept { return N_; }
  double x_R() const noexcept { return x_R_; }
  double zeta_R() const noexcept { return zeta_R_; }
  int n() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  const std::vector<double>& zeta() const noexcept { return zeta_; }
  const std::vector<double>& x() const noexcept { return x_; }
  /// Exact pure-weight measure of each node's dual cell (finite-volume masses).
  const std::vector<double>& mass() const noexcept { return mass_; }
  /// Fourth-order quadrature weights for x^{N/2-1}dx (cubic product rule, even at 0).
  const std::vector<double>& weight() const noexcept { return weight_; }
  /// 2^{1-N} zeta_{i+1/2}^{N-1}: pure flux density at the cell faces.
  const std::vector<double>& face_density() const noexcept { return face_; }
  double zeta_face(int i) const noexcept { return (i + 0.5) * h_; }

  bool has_chart() const noexcept { return chart_.has_value(); }
  const CoordinateChart& chart() const
  {
    if (!chart_)
      throw StateError("grid has no coordinate chart (pure Laplacian)");
    return *chart_;
  }
  const std::vector<double>& z() const
  {
    chart();
    return z_;
  }
  const std::vector<double>& r() const
  {
    chart();
    return r_;
  }

private:
  void build_masses()
  {
    mass_.assign(n_, 0.0);
    face_.assign(n_ - 1, 0.0);
    for (int i = 0; i < n_; ++i) {
      const double lo = i == 0 ? 0.0 : (i - 0.5) * h_;
      const double hi = i == n_ - 1 ? zeta_R_ : (i + 0.5) * h_;
      mass_[i] = scale_ * (std::pow(hi, N_) - std::pow(lo, N_)) / N_;
    }
    for (int i = 0; i + 1 < n_; ++i)
      face_[i] = scale_ * std::pow(zeta_face(i), N_ - 1.0);
  }

  void build_weights()
  {
    static constexpr double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                     -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                     0.7966664774136267,  0.9602898564975363};
    static constexpr double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                     0.2223810344533745, 0.1012285362903763};
    weight_.assign(n_, 0.0);
    for (int k = 0; k + 1 < n_; ++k) {
      int s0 = k - 1;
      if (s0 + 3 > n_ - 1)
        s0 = n_ - 4;
      const double a = zeta_[k];
      const double b = zeta_[k + 1];
      for (int q = 0; q < 8; ++q) {
        const double zq = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
        const double wq = 0.5 * (b - a) * gw[q] * scale_ * std::pow(zq, N_ - 1.0);
        for (int j = 0; j < 4; ++j) {
          const int sj = s0 + j;
          double l = 1.0;
          for (int m = 0; m < 4; ++m)
            if (m != j)
              l *= (zq - (s0 + m) * h_) / ((sj - (s0 + m)) * h_);
          // node -1 mirrors node 1 (even fields)
          weight_[sj < 0 ? -sj : sj] += wq * l;
        }
      }
    }
  }

  double N_;
  double x_R_;
  int n_;
  double zeta_R_ = 0.0;
  double h_ = 0.0;
  double scale_ = 1.0;
  std::vector<double> zeta_, x_, mass_, weight_, face_;
  std::optional<CoordinateChart> chart_;
  std::vector<double> z_, r_;
};

// ---------------------------------------------------------------------------
// Tridiagonal operators on the grid. Row i couples nodes i-1, i, i+1; rows run
// over the free nodes 0..n-2 and the Dirichlet node n-1 is held at zero.

struct Tridiagonal
{
  std::vector<double> lower; ///< coefficient of y_{i-1} (lower[0] unused)
  std::vector<double> diag;
  std::vector<double> upper; ///< coefficient of y_{i+1}

  int rows() const noexcept { return int(diag.size()); }

  /// out has the node count (rows + 1); out.back() = 0.
  void apply(const std::vector<double>& y, std::vector<double>& out) const
  {
    const int m = rows();
    out.resize(m + 1);
    for (int i = 0; i < m; ++i) {
      double s = diag[i] * y[i] + upper[i] * y[i + 1];
      if (i > 0)
        s += lower[i] * y[i - 1];
      out[i] = s;
    }
    out[m] = 0.0;
  }

  std::vector<double> apply(const std::vector<double>& y) const
  {
    std::vector<double> out;
    apply(y, out);
    return out;
  }

  /// Gershgorin bound on the spectral radius.
  double gershgorin() const
  {
    double g = 0.0;
    for (int i = 0; i < rows(); ++i) {
      double s = std::abs(diag[i]);
      if (i > 0)
        s += std::abs(lower[i]);
      if (i + 1 < rows())
        s += std::abs(upper[i]);
      g = std::max(g, s);
    }
    return g;
  }
};

/// Conservative discretization of L; also carries the node masses M_i = w_i m_i
/// that make it symmetric.
struct DiscreteL
{
  Tridiagonal A;
  std::vector<double> node_mass; ///< size n-1
  std::vector<double> omega;     ///< at nodes, size n
  std::vector<double> L0;        ///< at nodes, size n
  std::vector<double> L1;        ///< at nodes, size n

  /// Symmetric tridiagonal similarity  S = M^{1/2} A M^{-1/2}.
  void symmetric_form(std::vector<double>& d, std::vector<double>& e) const
  {
    const int m = A.rows();
    d = A.diag;
    e.resize(m > 0 ? m - 1 : 0);
    for (int i = 0; i + 1 < m; ++i)
      e[i] = A.upper[i] * std::sqrt(node_mass[i] / node_mass[i + 1]);
  }

  /// Max relative defect of M A = (M A)^T.
  double symmetry_defect() const
  {
    double worst = 0.0;
    for (int i = 0; i + 1 < A.rows(); ++i) {
      const double a = node_mass[i] * A.upper[i];
      const double b = node_mass[i + 1] * A.lower[i + 1];
      worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
    return worst;
  }
};

inline DiscreteL assemble_L(const LinearOperatorCoeffs& c, const WeightedGrid& g)
{
  const int n = g.n();
  const double h = g.h();
  DiscreteL op;
  op.omega.resize(n);
  op.L0.resize(n);
  op.L1.resize(n);
  for (int i = 0; i < n; ++i) {
    const CoeffValues v = g.has_chart() ? c.at_z(g.z()[i]) : c.at_x(g.x()[i]);
    op.omega[i] = v.omega;
    op.L0[i] = v.L0;
    op.L1[i] = v.L1;
  }
  std::vector<double> kappa(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    const double xf = g.zeta_face(i) * g.zeta_face(i) / 4.0;
    kappa[i] = g.face_density()[i] * c.at_x(xf).omega / h;
  }
  const int m = n - 1;
  op.node_mass.resize(m);
  op.A.lower.assign(m, 0.0);
  op.A.diag.assign(m, 0.0);
  op.A.upper.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const double M = op.omega[i] * g.mass()[i];
    op.node_mass[i] = M;
    const double kp = kappa[i];
    const double km = i > 0 ? kappa[i - 1] : 0.0;
    op.A.diag[i] = (kp + km) / M + op.L0[i];
    op.A.upper[i] = -kp / M;
    op.A.lower[i] = -km / M;
  }
  return op;
}

/// Pure-Laplacian finite-volume rows (Dirichlet-free application on all nodes).
inline Tridiagonal assemble_laplacian(const WeightedGrid& g)
{
  const int m = g.n() - 1;
  Tridiagonal T;
  T.lower.assign(m, 0.0);
  T.diag.assign(m, 0.0);
  T.upper.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const double kp = g.face_density()[i] / g.h();
    const double km = i > 0 ? g.face_density()[i - 1] / g.h() : 0.0;
    const double M = g.mass()[i];
    T.diag[i] = -(kp + km) / M;
    T.upper[i] = kp / M;
    T.lower[i] = km / M;
  }
  return T;
}

/// Generic wave operator  A h = -b2 Lap h + b1 Dcheck h + b0 h.  Without wave
/// fields this is the conservative DiscreteL itself.
inline Tridiagonal assemble_wave_operator(const LinearOperatorCoeffs& c, const WeightedGrid& g)
{
  if (!c.has_wave_fields())
    return assemble_L(c, g).A;
  Tridiagonal T = assemble_laplacian(g);
  const double h = g.h();
  for (int i = 0; i < T.rows(); ++i) {
    const double x = g.x()[i];
    const double b2 = c.b2(x);
    const double b1 = c.b1(x);
    const double b0 = c.b0(x);
    const double dc = i == 0 ? 0.0 : b1 * g.zeta()[i] / 2.0 / (2.0 * h);
    T.lower[i] = -b2 * T.lower[i] - dc;
    T.upper[i] = -b2 * T.upper[i] + dc;
    T.diag[i] = -b2 * T.diag[i] + b0;
  }
  return T;
}

// ---------------------------------------------------------------------------
// Field operations

/// Finite-volume Lap on all nodes; the Dirichlet node uses one-sided stencils.
inline std::vector<double> laplacian_apply(const WeightedGrid& g, const std::vector<double>& y)
{
  const int n = g.n();
  if (int(y.size()) != n)
    throw GridError("laplacian_apply: field size does not match grid");
  const Tridiagonal T = assemble_laplacian(g);
  std::vector<double> out(n);
  for (int i = 0; i + 1 < n; ++i) {
    double s = T.diag[i] * y[i] + T.upper[i] * y[i + 1];
    if (i > 0)
      s += T.lower[i] * y[i - 1];
    out[i] = s;
  }
  const double h = g.h();
  const int e = n - 1;
  const double yzz = (2 * y[e] - 5 * y[e - 1] + 4 * y[e - 2] - y[e - 3]) / (h * h);
  const double yz = (3 * y[e] - 4 * y[e - 1] + y[e - 2]) / (2 * h);
  out[e] = yzz + (g.N() - 1.0) / g.zeta()[e] * yz;
  return out;
}

/// d/dzeta: centered inside, zero at the parity point, one-sided at the end.
inline std::vector<double> zeta_derivative(const WeightedGrid& g, const std::vector<double>& y)
{
  const int n = g.n();
  if (int(y.size()) != n)
    throw GridError("zeta_derivative: field size does not match grid");
  const double h = g.h();
  std::vector<double> d(n);
  d[0] = 0.0;
  for (int i = 1; i + 1 < n; ++i)
    d[i] = (y[i + 1] - y[i - 1]) / (2 * h);
  d[n - 1] = (3 * y[n - 1] - 4 * y[n - 2] + y[n - 3]) / (2 * h);
  return d;
}

struct Derivatives
{
  std::vector<double> D;      ///< d/dx
  std::vector<double> Dcheck; ///< x d/dx
  std::vector<double> Ddot;   ///< sqrt(x) d/dx
};

inline Derivatives derivative_ops(const WeightedGrid& g, const std::vector<double>& y)
{
  const int n = g.n();
  Derivatives out;
  out.Ddot = zeta_derivative(g, y);
  out.D.resize(n);
  out.Dcheck.resize(n);
  const double h = g.h();
  out.D[0] = 4.0 * (y[1] - y[0]) / (h * h);
  out.Dcheck[0] = 0.0;
  for (int i = 1; i < n; ++i) {
    out.D[i] = 2.0 * out.Ddot[i] / g.zeta()[i];
    out.Dcheck[i] = 0.5 * g.zeta()[i] * out.Ddot[i];
  }
  return out;
}

/// (y|phi) in x^{N/2-1}dx by the grid's fourth-order quadrature.
inline double weighted_inner(const WeightedGrid& g, const std::vector<double>& y,
                             const std::vector<double>& phi)
{
  double s = 0.0;
  for (int i = 0; i < g.n(); ++i)
    s += g.weight()[i] * y[i] * phi[i];
  return s;
}

inline double weighted_norm(const WeightedGrid& g, const std::vector<double>& y)
{
  if (int(y.size()) != g.n())
    throw GridError("weighted_norm: field size does not match grid");
  return std::sqrt(std::max(0.0, weighted_inner(g, y, y)));
}

/// Highest grading index supported at a given resolution.
inline int max_grading_order(int n_grid) { return n_grid < 512 ? 6 : 10; }

/// ||y||_n = (sum_{l<=n} (y)_l^2)^{1/2}, (y)_{2m} = ||Lap^m y||, (y)_{2m+1} = ||Ddot Lap^m y||.
/// Each Lap costs two formal orders of accuracy, hence the resolution cap.
inline double grading_norm(const WeightedGrid& g, const std::vector<double>& y, int order)
{
  if (order < 0)
    throw OrderError("grading_norm: order must be nonnegative");
  if (order > max_grading_order(g.n()))
    throw OrderError("grading_norm: order " + std::to_string(order) + " exceeds the "
                     + std::to_string(max_grading_order(g.n())) + " supported at n_grid = "
                     + std::to_string(g.n()));
  double total = 0.0;
  std::vector<double> cur = y;
  for (int l = 0; l <= order; ++l) {
    if (l % 2 == 0) {
      if (l > 0)
        cur = laplacian_apply(g, cur);
      const double v = weighted_norm(g, cur);
      total += v * v;
    }
    else {
      const double v = weighted_norm(g, zeta_derivative(g, cur));
      total += v * v;
    }
  }
  return std::sqrt(total);
}

/// Discrete inner product sum w_i m_i y_i phi_i over the free nodes (the one L_h is
/// self-adjoint in).
inline double omega_inner(const DiscreteL& op, const std::vector<double>& y,
                          const std::vector<double>& phi)
{
  double s = 0.0;
  for (std::size_t i = 0; i < op.node_mass.size(); ++i)
    s += op.node_mass[i] * y[i] * phi[i];
  return s;
}

// ---------------------------------------------------------------------------
// Exact polynomial fields in x (used by the identity tests)

class PolyField
{
public:
  PolyField() : c_{0.0} {}
  explicit PolyField(std::vector<double> coeffs) : c_(std::move(coeffs))
  {
    if (c_.empty())
      c_.push_back(0.0);
  }

  static PolyField monomial(int k, double a = 1.0)
  {
    std::vector<double> c(k + 1, 0.0);
    c[k] = a;
    return PolyField(c);
  }

  const std::vector<double>& coeffs() const noexcept { return c_; }
  int degree() const noexcept { return int(c_.size()) - 1; }

  double operator()(double x) const
  {
    double s = 0.0;
    for (int k = degree(); k >= 0; --k)
      s = s * x + c_[k];
    return s;
  }

  PolyField d() const
  {
    if (c_.size() == 1)
      return PolyField();
    std::vector<double> out(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k)
      out[k - 1] = k * c_[k];
    return PolyField(out);
  }

  /// x d2/dx2 + a d/dx (a = N/2 gives Lap).
  PolyField lap(double a) const
  {
    if (c_.size() == 1)
      return PolyField();
    std::vector<double> out(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k)
      out[k - 1] = c_[k] * k * (k - 1.0 + a);
    return PolyField(out);
  }

  PolyField dcheck() const
  {
    std::vector<double> out(c_.size(), 0.0);
    for (std::size_t k = 1; k < c_.size(); ++k)
      out[k] = k * c_[k];
    return PolyField(out);
  }

  PolyField operator*(const PolyField& o) const
  {
    std::vector<double> out(c_.size() + o.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < o.c_.size(); ++j)
        out[i + j] += c_[i] * o.c_[j];
    return PolyField(out);
  }

  /// int_0^X p(x) x^{N/2-1} dx in closed form.
  double weighted_integral(double N, double X) const
  {
    double s = 0.0;
    for (std::size_t k = 0; k < c_.size(); ++k)
      s += c_[k] * std::pow(X, k + N / 2.0) / (k + N / 2.0);
    return s;
  }

  std::vector<double> sample(const WeightedGrid& g) const
  {
    std::vector<double> y(g.n());
    for (int i = 0; i < g.n(); ++i)
      y[i] = (*this)(g.x()[i]);
    return y;
  }

private:
  std::vector<double> c_;
};

// ---------------------------------------------------------------------------
// Integral representation of Lap^m D on polynomial fields.
//
// From D y = x^{-N/2} int_0^x Lap y s^{N/2-1} ds and Lap_{a+1} D = D Lap_a,
//   Lap_{N/2+1}^m D y (x) = x^{-N/2} int_0^x (Lap^{m+1} y)(s) s^{N/2-1} ds,
// with Lap_a = x d2/dx2 + a d/dx.

struct IdentitySides
{
  double direct;
  double integral;
};

inline IdentitySides derivative_integral_identity(const PolyField& y, int m, double N, double x)
{
  if (!(x > 0.0))
    throw DomainError("derivative_integral_identity: x must be positive");
  PolyField lhs = y.d();
  for (int k = 0; k < m; ++k)
    lhs = lhs.lap(N / 2.0 + 1.0);
  PolyField f = y;
  for (int k = 0; k <= m; ++k)
    f = f.lap(N / 2.0);
  auto integrand = [&](double s) { return f(s) * std::pow(s, N / 2.0 - 1.0); };
  double err = 0.0;
  const double I =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, x, 10, 1e-15, &err);
  return {lhs(x), std::pow(x, -N / 2.0) * I};
}

/// sup |Lap^m D^k y| / (sup |Lap^{m+k} y| / prod_{j<k} (N/2+m+j)) over [0, X].
inline double derivative_bound_ratio(const PolyField& y, int m, int k, double N, double X, int samples = 2001)
{
  PolyField a = y;
  for (int j = 0; j < k; ++j)
    a = a.d();
  for (int j = 0; j < m; ++j)
    a = a.lap(N / 2.0);
  PolyField b = y;
  for (int j = 0; j < m + k; ++j)
    b = b.lap(N / 2.0);
  double den = 1.0;
  for (int j = 0; j < k; ++j)
    den *= N / 2.0 + m + j;
  double sa = 0.0, sb = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = X * i / (samples - 1.0);
    sa = std::max(sa, std::abs(a(x)));
    sb = std::max(sb, std::abs(b(x)));
  }
  if (sb == 0.0)
    return sa == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return sa / (sb / den);
}

} // namespace atmos

#endif
