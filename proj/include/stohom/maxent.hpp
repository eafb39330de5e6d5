#pragma once

// Maximum-entropy positive-definite matrix field: the Gamma transform h,
// the upper-triangular construction of [C(x)], the normalization around
// the mean elasticity, and the per-realization Frobenius certificates.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

#include "stohom/gfield.hpp"

namespace stohom {

using Matrix6 = Eigen::Matrix<double, 6, 6>;

// h(b; alpha) = F_alpha^{-1}(F(b)): maps a standard normal variate to a
// Gamma(alpha, 1) variate. The right tail is inverted on the complement
// scale so the normal CDF never saturates to 1. Past alpha ~ 1e9 the
// incomplete-gamma inversion is replaced by the Wilson-Hilferty cube,
// whose relative error is below 1e-13 there.
inline double h_transform(double b, double alpha) {
  if (!(alpha > 3.0))
    throw std::invalid_argument("h_transform requires alpha > 3");
  if (alpha > 1e9) {
    const double t = 1.0 - 1.0 / (9.0 * alpha) + b / (3.0 * std::sqrt(alpha));
    return alpha * t * t * t;
  }
  if (b <= 0.0) {
    double p = 0.5 * std::erfc(-b / std::numbers::sqrt2);
    return boost::math::gamma_p_inv(alpha, p);
  }
  double q = 0.5 * std::erfc(b / std::numbers::sqrt2);
  return boost::math::gamma_q_inv(alpha, q);
}

// Dispersion parameters of the normalized matrix field. delta_c controls
// E{||C - I||_F^2} = 6 delta_c^2 and must stay below sqrt(7/11) so that
// alpha_6 > 3.
struct MatrixFieldParams {
  double delta_c = 0.4;
  double epsilon = 1e-3;
  double sigma_c = 0.4 / std::sqrt(7.0);
  std::array<double, 6> alpha{};

  MatrixFieldParams() : MatrixFieldParams(0.4, 1e-3) {}

  MatrixFieldParams(double delta_c_, double epsilon_ = 1e-3)
      : delta_c(delta_c_), epsilon(epsilon_) {
    if (!(delta_c > 0.0) || !(delta_c < std::sqrt(7.0 / 11.0)))
      throw std::invalid_argument("delta_c must lie in (0, sqrt(7/11))");
    if (!(epsilon > 0.0))
      throw std::invalid_argument("epsilon must be positive");
    sigma_c = delta_c / std::sqrt(7.0);
    for (int m = 1; m <= 6; ++m)
      alpha[m - 1] = 1.0 / (2.0 * sigma_c * sigma_c) + (1.0 - m) / 2.0;
  }

  double sum_alpha() const {
    double s = 0.0;
    for (double a : alpha) s += a;
    return s;
  }
};

// Mean elasticity matrix in engineering Voigt notation
// (11, 22, 33, 23, 13, 12) with gamma = 2*eps shear strains.
struct MeanElasticity {
  Matrix6 c_bar = Matrix6::Identity();
  Matrix6 l_bar = Matrix6::Identity();  // upper triangular, c_bar = l^T l
  double c0 = 1.0;                      // smallest eigenvalue
  double c1 = 6.0;                      // trace

  static MeanElasticity from_matrix(const Matrix6& c) {
    if ((c - c.transpose()).norm() > 1e-10 * c.norm())
      throw std::invalid_argument("mean elasticity must be symmetric");
    Matrix6 sym = 0.5 * (c + c.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix6> es(sym);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("mean elasticity must be positive definite");
    MeanElasticity m;
    m.c_bar = sym;
    m.l_bar = Eigen::LLT<Matrix6>(sym).matrixU();
    m.c0 = es.eigenvalues().minCoeff();
    m.c1 = sym.trace();
    return m;
  }

  // Orthotropic stiffness from engineering constants by compliance
  // inversion. nu23, nu31, nu12 follow the usual cyclic convention
  // (nu_ij couples stress along i to contraction along j).
  static MeanElasticity orthotropic(double e1, double e2, double e3,
                                    double nu23, double nu31, double nu12,
                                    double g23, double g31, double g12) {
    if (e1 <= 0 || e2 <= 0 || e3 <= 0 || g23 <= 0 || g31 <= 0 || g12 <= 0)
      throw std::invalid_argument("moduli must be positive");
    Matrix6 s = Matrix6::Zero();
    s(0, 0) = 1.0 / e1;
    s(1, 1) = 1.0 / e2;
    s(2, 2) = 1.0 / e3;
    s(0, 1) = s(1, 0) = -nu12 / e1;
    s(0, 2) = s(2, 0) = -nu31 / e3;
    s(1, 2) = s(2, 1) = -nu23 / e2;
    s(3, 3) = 1.0 / g23;
    s(4, 4) = 1.0 / g31;
    s(5, 5) = 1.0 / g12;
    Eigen::SelfAdjointEigenSolver<Matrix6> es(s);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument(
          "inadmissible engineering constants: compliance not SPD");
    return from_matrix(s.inverse());
  }

  // Saint-Venant-style shear estimates used when the shear moduli are not
  // prescribed; recorded in run manifests.
  static std::array<double, 3> default_shear(double e1, double e2, double e3,
                                             double nu23, double nu31,
                                             double nu12) {
    return {e2 * e3 / (e2 + e3 + 2.0 * nu23 * e3),
            e3 * e1 / (e3 + e1 + 2.0 * nu31 * e1),
            e1 * e2 / (e1 + e2 + 2.0 * nu12 * e2)};
  }

  static MeanElasticity isotropic(double e, double nu) {
    double g = e / (2.0 * (1.0 + nu));
    return orthotropic(e, e, e, nu, nu, nu, g, g, g);
  }

  double c_eps(double epsilon) const {
    return c0 * epsilon / (1.0 + epsilon);
  }
};

// [C(x)] = L^T L with L_mn = sigma_c g_mn (m < n) and
// L_mm = sigma_c sqrt(2 h(g_mm; alpha_m)); g holds the 21 Gaussian values
// in the NoiseVector block order.
inline Matrix6 normalized_matrix(const std::array<double, 21>& g,
                                 const MatrixFieldParams& p) {
  Matrix6 l = Matrix6::Zero();
  for (int m = 1; m <= 6; ++m)
    for (int n = m; n <= 6; ++n) {
      double gv = g[NoiseVector::index(m, n)];
      l(m - 1, n - 1) =
          m == n ? p.sigma_c * std::sqrt(2.0 * h_transform(gv, p.alpha[m - 1]))
                 : p.sigma_c * gv;
    }
  return l.transpose() * l;
}

// [CC(x)] = (1+eps)^{-1} Lbar^T (eps I + C(x)) Lbar, smallest eigenvalue
// bounded below by c0 eps/(1+eps).
inline Matrix6 elasticity_from_normalized(const Matrix6& c,
                                          const MatrixFieldParams& p,
                                          const MeanElasticity& mean) {
  Matrix6 inner = p.epsilon * Matrix6::Identity() + c;
  Matrix6 out = mean.l_bar.transpose() * inner * mean.l_bar / (1.0 + p.epsilon);
  return 0.5 * (out + out.transpose());
}

// Almost-sure Frobenius bound of the normalized field, a function of the
// germ only:
//   Gamma_C = sigma_c^2 (4 sum_m alpha_m + 4 sum_m sum_b z_mm^2
//                        + 2 sum_{m<n} sum_b z_mn^2)
inline double gamma_c_certificate(const NoiseVector& xi,
                                  const MatrixFieldParams& p) {
  double diag = 0.0, off = 0.0;
  for (int m = 1; m <= 6; ++m)
    for (int n = m; n <= 6; ++n) {
      double s = sum_z_squared(xi.blocks[NoiseVector::index(m, n)]);
      (m == n ? diag : off) += s;
    }
  return p.sigma_c * p.sigma_c *
         (4.0 * p.sum_alpha() + 4.0 * diag + 2.0 * off);
}

// Gamma_CC = c1 (1+eps)^{-1} (eps sqrt(6) + Gamma_C)
inline double gamma_cc_certificate(double gamma_c, const MatrixFieldParams& p,
                                   const MeanElasticity& mean) {
  return mean.c1 / (1.0 + p.epsilon) *
         (p.epsilon * std::sqrt(6.0) + gamma_c);
}

// Deterministic evaluator x -> [CC(x; S, xi)] for one realization.
class ElasticityField {
 public:
  using Workspace = GaussianFieldSynth::Workspace;

  ElasticityField(const SpectralGrid& grid, const SpectrumParams& params,
                  const std::vector<double>& chi_tilde, const NoiseVector& xi,
                  const MatrixFieldParams& mfp, const MeanElasticity& mean)
      : synth_(grid, params, chi_tilde, xi),
        mfp_(mfp),
        mean_(mean),
        gamma_c_(gamma_c_certificate(xi, mfp)),
        gamma_cc_(gamma_cc_certificate(gamma_c_, mfp, mean)) {}

  void gaussians_at(const std::array<double, 3>& x, Workspace& ws,
                    std::array<double, 21>& g) const {
    synth_.eval(x, ws, g);
  }

  Matrix6 normalized_at(const std::array<double, 3>& x, Workspace& ws) const {
    std::array<double, 21> g;
    synth_.eval(x, ws, g);
    return normalized_matrix(g, mfp_);
  }

  Matrix6 elasticity_at(const std::array<double, 3>& x, Workspace& ws) const {
    return elasticity_from_normalized(normalized_at(x, ws), mfp_, mean_);
  }

  double gamma_c() const { return gamma_c_; }
  double gamma_cc() const { return gamma_cc_; }
  double c_eps() const { return mean_.c_eps(mfp_.epsilon); }
  const MeanElasticity& mean() const { return mean_; }
  const MatrixFieldParams& params() const { return mfp_; }

 private:
  GaussianFieldSynth synth_;
  MatrixFieldParams mfp_;
  MeanElasticity mean_;
  double gamma_c_ = 0.0;
  double gamma_cc_ = 0.0;
};

}  // namespace stohom
