#pragma once

// Truncated spectral-representation sampler of the normalized Gaussian
// homogeneous field and its closed-form correlation function.

#include <array>
#include <cassert>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stohom/rng.hpp"
#include "stohom/spectral.hpp"

namespace stohom {

// Amplitude/phase germ of one scalar field copy: z_beta = sqrt(-log psi),
// psi uniform on (0,1]; phi_beta uniform on [0, 2*pi).
struct NoiseBlock {
  std::vector<double> z;
  std::vector<double> phi;
};

inline NoiseBlock sample_noise_block(UniformStream& z_stream,
                                     UniformStream& phi_stream, int nu) {
  if (nu < 1) throw std::invalid_argument("nu must be >= 1");
  NoiseBlock b;
  b.z.resize(nu);
  b.phi.resize(nu);
  for (int i = 0; i < nu; ++i)
    b.z[i] = std::sqrt(-std::log(z_stream.next_positive()));
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < nu; ++i) b.phi[i] = two_pi * phi_stream.next();
  return b;
}

// Germ of one matrix-field realization: 21 independent (Z,Phi) copies,
// keyed by (m,n), 1 <= m <= n <= 6, in row-major upper-triangular order.
struct NoiseVector {
  std::array<NoiseBlock, 21> blocks;

  static int index(int m, int n) {  // 1-based, m <= n
    assert(1 <= m && m <= n && n <= 6);
    return (m - 1) * (14 - m) / 2 + (n - m);
  }
};

inline std::string z_stream_label(int m, int n) {
  return "Z:" + std::to_string(m) + std::to_string(n);
}
inline std::string phi_stream_label(int m, int n) {
  return "Phi:" + std::to_string(m) + std::to_string(n);
}

inline NoiseVector sample_noise_vector(std::uint64_t master_seed,
                                       std::uint64_t kappa, int nu) {
  NoiseVector xi;
  for (int m = 1; m <= 6; ++m)
    for (int n = m; n <= 6; ++n) {
      UniformStream zs(substream_seed(master_seed, kappa, z_stream_label(m, n)));
      UniformStream ps(
          substream_seed(master_seed, kappa, phi_stream_label(m, n)));
      xi.blocks[NoiseVector::index(m, n)] = sample_noise_block(zs, ps, nu);
    }
  return xi;
}

inline double sum_z_squared(const NoiseBlock& b) {
  double s = 0.0;
  for (double z : b.z) s += z * z;
  return s;
}

// Reference evaluator of the spectral sum:
//   g(x) = sum_beta sqrt(2 chi~_beta) z_beta cos(phi_beta + sum_j pi/w_j tau_{beta_j} x_j)
inline double eval_g(const std::array<double, 3>& x, const SpectrumParams& p,
                     const NoiseBlock& block,
                     const std::vector<double>& chi_tilde,
                     const SpectralGrid& grid) {
  std::array<double, 3> freq{};
  for (int j = 0; j < 3; ++j) freq[j] = std::numbers::pi / p.w[j];
  double g = 0.0;
  for (int b1 = 0; b1 < grid.nu_s; ++b1)
    for (int b2 = 0; b2 < grid.nu_s; ++b2)
      for (int b3 = 0; b3 < grid.nu_s; ++b3) {
        int lin = grid.linear(b1, b2, b3);
        double angle = block.phi[lin] + freq[0] * grid.tau[b1] * x[0] +
                       freq[1] * grid.tau[b2] * x[1] +
                       freq[2] * grid.tau[b3] * x[2];
        g += std::sqrt(2.0 * chi_tilde[lin]) * block.z[lin] * std::cos(angle);
      }
  return g;
}

// Closed-form correlation of the truncated representation:
//   rho(zeta) = sum_beta chi~_beta cos(sum_j pi/w_j tau_{beta_j} zeta_j)
inline double correlation_oracle(const std::array<double, 3>& zeta,
                                 const SpectrumParams& p,
                                 const std::vector<double>& chi_tilde,
                                 const SpectralGrid& grid) {
  std::array<double, 3> freq{};
  for (int j = 0; j < 3; ++j) freq[j] = std::numbers::pi / p.w[j];
  double rho = 0.0;
  for (int b1 = 0; b1 < grid.nu_s; ++b1)
    for (int b2 = 0; b2 < grid.nu_s; ++b2)
      for (int b3 = 0; b3 < grid.nu_s; ++b3) {
        double angle = freq[0] * grid.tau[b1] * zeta[0] +
                       freq[1] * grid.tau[b2] * zeta[1] +
                       freq[2] * grid.tau[b3] * zeta[2];
        rho += chi_tilde[grid.linear(b1, b2, b3)] * std::cos(angle);
      }
  return rho;
}

// Evaluates all 21 copies at once. Per realization the per-mode amplitudes
// sqrt(2 chi~) z cos(phi), sqrt(2 chi~) z sin(phi) and the per-axis angular
// frequencies are precomputed; per point only per-axis sines/cosines and
// their tensor products are formed. Agrees with eval_g to rounding level.
class GaussianFieldSynth {
 public:
  struct Workspace {
    std::vector<double> re, im, cax, sax;
  };

  GaussianFieldSynth() = default;

  GaussianFieldSynth(const SpectralGrid& grid, const SpectrumParams& params,
                     const std::vector<double>& chi_tilde,
                     const NoiseVector& xi)
      : nu_s_(grid.nu_s), nu_(grid.nu()) {
    for (int j = 0; j < 3; ++j) {
      theta_[j].resize(nu_s_);
      for (int b = 0; b < nu_s_; ++b)
        theta_[j][b] = std::numbers::pi / params.w[j] * grid.tau[b];
    }
    amp_c_.resize(21 * static_cast<std::size_t>(nu_));
    amp_s_.resize(21 * static_cast<std::size_t>(nu_));
    sum_z2_.fill(0.0);
    for (int k = 0; k < 21; ++k) {
      const NoiseBlock& blk = xi.blocks[k];
      for (int lin = 0; lin < nu_; ++lin) {
        double amp = std::sqrt(2.0 * chi_tilde[lin]) * blk.z[lin];
        amp_c_[k * nu_ + lin] = amp * std::cos(blk.phi[lin]);
        amp_s_[k * nu_ + lin] = amp * std::sin(blk.phi[lin]);
      }
      sum_z2_[k] = sum_z_squared(blk);
    }
  }

  void eval(const std::array<double, 3>& x, Workspace& ws,
            std::array<double, 21>& g) const {
    ws.re.resize(nu_);
    ws.im.resize(nu_);
    ws.cax.resize(3 * nu_s_);
    ws.sax.resize(3 * nu_s_);
    for (int j = 0; j < 3; ++j)
      for (int b = 0; b < nu_s_; ++b) {
        double angle = theta_[j][b] * x[j];
        ws.cax[j * nu_s_ + b] = std::cos(angle);
        ws.sax[j * nu_s_ + b] = std::sin(angle);
      }
    int idx = 0;
    for (int b1 = 0; b1 < nu_s_; ++b1) {
      double c1 = ws.cax[b1], s1 = ws.sax[b1];
      for (int b2 = 0; b2 < nu_s_; ++b2) {
        double c2 = ws.cax[nu_s_ + b2], s2 = ws.sax[nu_s_ + b2];
        double c12 = c1 * c2 - s1 * s2;
        double s12 = s1 * c2 + c1 * s2;
        for (int b3 = 0; b3 < nu_s_; ++b3, ++idx) {
          double c3 = ws.cax[2 * nu_s_ + b3], s3 = ws.sax[2 * nu_s_ + b3];
          ws.re[idx] = c12 * c3 - s12 * s3;
          ws.im[idx] = s12 * c3 + c12 * s3;
        }
      }
    }
    for (int k = 0; k < 21; ++k) {
      const double* ac = amp_c_.data() + static_cast<std::size_t>(k) * nu_;
      const double* as = amp_s_.data() + static_cast<std::size_t>(k) * nu_;
      double acc = 0.0;
      for (int i = 0; i < nu_; ++i) acc += ac[i] * ws.re[i] - as[i] * ws.im[i];
      g[k] = acc;
      // a.s. amplitude bound of the truncated sum (Cauchy-Schwarz)
      assert(std::abs(acc) <= std::sqrt(2.0 * sum_z2_[k]) * (1.0 + 1e-12) + 1e-12);
    }
  }

  double amplitude_bound(int block) const {
    return std::sqrt(2.0 * sum_z2_[block]);
  }

 private:
  int nu_s_ = 0;
  int nu_ = 0;
  std::array<std::vector<double>, 3> theta_;
  std::vector<double> amp_c_, amp_s_;
  std::array<double, 21> sum_z2_{};
};

}  // namespace stohom
