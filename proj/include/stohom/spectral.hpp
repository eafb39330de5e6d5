#pragma once

// Discretized dimensionless spectral measure of the normalized Gaussian
// germ field, plus the uncertain-spectrum parameterization {w, [y]}.

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stohom/rng.hpp"

namespace stohom {

// Separable dimensionless spectral density chi(tau) = prod_j chi_j(tau_j),
// compact support [-1,1]^3, even in each coordinate, unit integral.
struct SeparableSdf {
  std::array<std::function<double(double)>, 3> axis;

  double operator()(double t1, double t2, double t3) const {
    return axis[0](t1) * axis[1](t2) * axis[2](t3);
  }

  static SeparableSdf triangular() {
    auto tri = [](double t) {
      double a = std::abs(t);
      return a < 1.0 ? 1.0 - a : 0.0;
    };
    return SeparableSdf{{tri, tri, tri}};
  }

  // Numerical check of evenness and unit integral per axis (composite
  // Simpson; tolerance loose enough for any reasonable user density).
  void validate(double tol = 1e-6) const {
    const int ns = 4096;
    for (int j = 0; j < 3; ++j) {
      double integral = 0.0;
      const double h = 2.0 / ns;
      for (int k = 0; k < ns; ++k) {
        double a = -1.0 + k * h;
        integral += h / 6.0 *
                    (axis[j](a) + 4.0 * axis[j](a + 0.5 * h) + axis[j](a + h));
      }
      if (std::abs(integral - 1.0) > tol)
        throw std::invalid_argument("sdf axis does not integrate to 1");
      for (double t : {0.125, 0.375, 0.625, 0.875}) {
        if (std::abs(axis[j](t) - axis[j](-t)) > tol)
          throw std::invalid_argument("sdf axis is not even");
        if (axis[j](t) < 0.0 || axis[j](1.0 + t) != 0.0)
          throw std::invalid_argument("sdf axis negative or unsupported");
      }
    }
  }
};

// Midpoint sampling of [-1,1]^3 with nu_s points per axis and the
// associated nonnegative weights chi_delta.
struct SpectralGrid {
  int nu_s = 0;
  double eta_nu = 0.0;
  bool eta_within_gate = true;              // |eta_nu - 1| <= eps_s
  std::vector<double> tau;                  // nu_s axis points, shared by axes
  std::array<std::vector<double>, 3> chi_axis;  // per-axis (2/nu_s)*chi_j
  std::vector<double> chi_delta;            // nu products, beta1-major

  int nu() const { return nu_s * nu_s * nu_s; }
  int nu_hat_s() const { return nu_s / 2; }

  int linear(int b1, int b2, int b3) const {  // 0-based per-axis indices
    return (b1 * nu_s + b2) * nu_s + b3;
  }
  // mirror to the half with tau < 0 (quadrant symmetry representative)
  int mirror(int b) const { return b < nu_hat_s() ? b : nu_s - 1 - b; }
};

inline SpectralGrid build_grid(int nu_s, const SeparableSdf& sdf,
                               double eps_s = 1e-6) {
  if (nu_s < 2 || nu_s % 2 != 0)
    throw std::invalid_argument("nu_s must be a positive even integer");
  SpectralGrid g;
  g.nu_s = nu_s;
  g.tau.resize(nu_s);
  const double step = 2.0 / nu_s;
  for (int b = 0; b < nu_s; ++b) g.tau[b] = -1.0 + (b + 0.5) * step;
  for (int j = 0; j < 3; ++j) {
    g.chi_axis[j].resize(nu_s);
    for (int b = 0; b < nu_s; ++b) {
      double v = step * sdf.axis[j](g.tau[b]);
      if (v < 0.0) throw std::invalid_argument("sdf must be nonnegative");
      g.chi_axis[j][b] = v;
    }
  }
  g.chi_delta.resize(g.nu());
  double eta = 0.0;
  for (int b1 = 0; b1 < nu_s; ++b1)
    for (int b2 = 0; b2 < nu_s; ++b2)
      for (int b3 = 0; b3 < nu_s; ++b3) {
        double v = g.chi_axis[0][b1] * g.chi_axis[1][b2] * g.chi_axis[2][b3];
        g.chi_delta[g.linear(b1, b2, b3)] = v;
        eta += v;
      }
  g.eta_nu = eta;
  g.eta_within_gate = std::abs(eta - 1.0) <= eps_s;
  return g;
}

// Law of the spectrum parameters S = {W, [Y]}: W_j uniform with mean
// correlation length lc_bar and coefficient of variation delta_lc,
// Y entries iid uniform on [0,1]; delta[j] scales the per-axis spectrum
// shape uncertainty.
struct SpectrumDistribution {
  double lc_bar = 0.2;
  double delta_lc = 0.0;
  std::array<double, 3> delta{0.0, 0.0, 0.0};

  SpectrumDistribution() = default;
  SpectrumDistribution(double lc_bar_, double delta_lc_,
                       std::array<double, 3> delta_)
      : lc_bar(lc_bar_), delta_lc(delta_lc_), delta(delta_) {
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    if (!(lc_bar > 0.0)) throw std::invalid_argument("lc_bar must be positive");
    if (delta_lc < 0.0 || delta_lc >= inv_sqrt3)
      throw std::invalid_argument("delta_lc must lie in [0, 1/sqrt(3))");
    for (double d : delta)
      if (d < 0.0 || d >= inv_sqrt3)
        throw std::invalid_argument("delta_j must lie in [0, 1/sqrt(3))");
    if (!(w_min() > 0.0))
      throw std::invalid_argument("degenerate support: w_min <= 0");
  }

  double w_min() const { return lc_bar * (1.0 - std::sqrt(3.0) * delta_lc); }
  double w_max() const { return 2.0 * lc_bar - w_min(); }
  double delta_s() const {
    double p = 1.0;
    for (double d : delta) p *= 1.0 + d * d;
    return std::sqrt(p - 1.0);
  }
};

// One draw of S = {w, [y]}. y is 3 x nu_hat_s with entries in [0,1].
struct SpectrumParams {
  std::array<double, 3> w{};
  Eigen::MatrixXd y;  // 3 x nu_hat_s
};

inline SpectrumParams sample_spectrum_params(UniformStream& w_stream,
                                             UniformStream& y_stream,
                                             const SpectrumDistribution& dist,
                                             int nu_s) {
  SpectrumParams p;
  for (int j = 0; j < 3; ++j)
    p.w[j] = w_stream.uniform(dist.w_min(), dist.w_max());
  const int nh = nu_s / 2;
  p.y.resize(3, nh);
  for (int j = 0; j < 3; ++j)
    for (int b = 0; b < nh; ++b) p.y(j, b) = y_stream.next();
  return p;
}

inline SpectrumParams mean_spectrum_params(const SpectrumDistribution& dist,
                                           int nu_s) {
  SpectrumParams p;
  p.w = {dist.lc_bar, dist.lc_bar, dist.lc_bar};
  p.y = Eigen::MatrixXd::Constant(3, nu_s / 2, 0.5);
  return p;
}

// General q-evaluator on the representative (tau<0) multi-index, with the
// contract q(ybar) = 1. Indices are 0-based in [0, nu_hat_s).
using QEvaluator =
    std::function<double(const Eigen::MatrixXd& y, int b1h, int b2h, int b3h)>;

inline QEvaluator affine_separable_q(const std::array<double, 3>& delta) {
  const double root12 = std::sqrt(12.0);
  return [delta, root12](const Eigen::MatrixXd& y, int b1, int b2, int b3) {
    const int bh[3] = {b1, b2, b3};
    double q = 1.0;
    for (int j = 0; j < 3; ++j)
      q *= 1.0 + root12 * delta[j] * (y(j, bh[j]) - 0.5);
    return q;
  };
}

// a_beta over the full grid: representative half gets sqrt(chi_delta)*q,
// the rest follows by the per-axis mirror rule.
inline std::vector<double> a_coefficients(const Eigen::MatrixXd& y,
                                          const SpectralGrid& grid,
                                          const QEvaluator& q) {
  if ((y.array() < 0.0).any() || (y.array() > 1.0).any())
    throw std::invalid_argument("y entries must lie in [0,1]");
  if (y.rows() != 3 || y.cols() != grid.nu_hat_s())
    throw std::invalid_argument("y must be 3 x nu_s/2");
  std::vector<double> a(grid.nu());
  for (int b1 = 0; b1 < grid.nu_s; ++b1)
    for (int b2 = 0; b2 < grid.nu_s; ++b2)
      for (int b3 = 0; b3 < grid.nu_s; ++b3) {
        int lin = grid.linear(b1, b2, b3);
        double qv = q(y, grid.mirror(b1), grid.mirror(b2), grid.mirror(b3));
        a[lin] = std::sqrt(grid.chi_delta[lin]) * qv;
      }
  return a;
}

inline std::vector<double> a_coefficients(const Eigen::MatrixXd& y,
                                          const SpectralGrid& grid,
                                          const std::array<double, 3>& delta) {
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  for (double d : delta)
    if (d < 0.0 || d >= inv_sqrt3)
      throw std::invalid_argument("delta_j must lie in [0, 1/sqrt(3))");
  return a_coefficients(y, grid, affine_separable_q(delta));
}

inline std::vector<double> chi_tilde_from_a(const std::vector<double>& a) {
  double sum = 0.0;
  for (double v : a) sum += v * v;
  if (!(sum > 0.0))
    throw std::domain_error("degenerate spectrum: all a coefficients vanish");
  std::vector<double> w(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) w[i] = a[i] * a[i] / sum;
  return w;
}

inline std::vector<double> chi_tilde(const Eigen::MatrixXd& y,
                                     const SpectralGrid& grid,
                                     const std::array<double, 3>& delta) {
  return chi_tilde_from_a(a_coefficients(y, grid, delta));
}

}  // namespace stohom
