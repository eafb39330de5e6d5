#pragma once

// Monte Carlo campaign over (S^kappa, xi^kappa): per-realization pipeline,
// convergence function, eigenvalue statistics, Gaussian KDE of the
// normalized operator norm, and the RVE probability band P(eta).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "stohom/fem.hpp"
#include "stohom/gfield.hpp"
#include "stohom/maxent.hpp"
#include "stohom/spectral.hpp"

namespace stohom {

struct CampaignConfig {
  std::uint64_t master_seed = 1;
  int kappa_sim = 1;
  int mesh_n = 20;
  int nu_s = 8;
  SpectrumDistribution spectrum;
  MatrixFieldParams mfp;
  MeanElasticity mean;
  SeparableSdf sdf = SeparableSdf::triangular();
  SolverOptions solver;
  int threads = 1;
  std::vector<double> eta_grid;    // defaults to 0.01 .. 1.00
  int kde_grid_points = 512;

  void validate() const {
    if (kappa_sim < 1) throw std::invalid_argument("kappa_sim must be >= 1");
    if (mesh_n < 1) throw std::invalid_argument("mesh_n must be >= 1");
    for (double e : eta_grid)
      if (!(e > 0.0) || e > 1.0)
        throw std::invalid_argument("eta values must lie in (0,1]");
  }
};

inline std::vector<double> default_eta_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 100; ++i) g.push_back(i / 100.0);
  return g;
}

struct RealizationRecord {
  EffectiveSample sample;
  std::array<double, 3> w{};
  double gamma_c = 0.0;
  double gamma_cc = 0.0;
};

struct CampaignResult {
  std::vector<RealizationRecord> records;  // successes, ascending kappa
  std::vector<std::pair<std::uint64_t, std::string>> failures;
  std::vector<double> conv;                // prefix convergence function
  double mean_lambda1 = 0.0;               // E{Lambda~_1}
  std::vector<double> lambda1_normalized;  // Lambda_1 samples
  std::vector<double> pdf_grid, pdf_values;
  double kde_bandwidth = 0.0;
  std::vector<std::pair<double, double>> p_eta;
  double c_bar_fnorm = 0.0;
};

// conv(k) = ||C_bar||_F^{-1} (k^{-1} sum_{kappa<=k} ||lambda^kappa||^2)^{1/2}
inline std::vector<double> convergence(
    std::span<const std::array<double, 6>> lambdas, double c_bar_fnorm) {
  if (lambdas.empty()) throw std::invalid_argument("need at least one record");
  std::vector<double> conv(lambdas.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    double s = 0.0;
    for (double l : lambdas[k]) s += l * l;
    acc += s;
    conv[k] = std::sqrt(acc / static_cast<double>(k + 1)) / c_bar_fnorm;
  }
  return conv;
}

// Lambda_1 = lambda_1 / mean(lambda_1); the returned samples average to 1.
inline std::pair<double, std::vector<double>> normalized_norm_stats(
    std::span<const double> lambda1) {
  if (lambda1.size() < 2)
    throw std::invalid_argument("need at least two records");
  double mean = 0.0;
  for (double l : lambda1) mean += l;
  mean /= static_cast<double>(lambda1.size());
  std::vector<double> out(lambda1.size());
  for (std::size_t i = 0; i < lambda1.size(); ++i) out[i] = lambda1[i] / mean;
  return {mean, out};
}

// Silverman's rule with the usual robust spread estimate.
inline double silverman_bandwidth(std::span<const double> samples) {
  const std::size_t n = samples.size();
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(n - 1);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&sorted](double p) {
    double pos = p * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    return lo + 1 < sorted.size()
               ? sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
               : sorted[lo];
  };
  double iqr = quantile(0.75) - quantile(0.25);
  double spread = std::sqrt(var);
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

struct KdeResult {
  std::vector<double> grid, density;
  double bandwidth = 0.0;
};

inline std::vector<double> kde_eval(std::span<const double> samples,
                                    double bandwidth,
                                    std::span<const double> grid) {
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> density(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double acc = 0.0;
    for (double s : samples) {
      const double t = (grid[i] - s) / bandwidth;
      acc += std::exp(-0.5 * t * t);
    }
    density[i] = norm * acc;
  }
  return density;
}

// Gaussian KDE on a 512-point grid spanning [min-3h, max+3h].
inline KdeResult kde_pdf(std::span<const double> samples,
                         int grid_points = 512) {
  if (samples.size() < 10)
    throw std::invalid_argument("kde needs at least 10 samples");
  KdeResult out;
  out.bandwidth = silverman_bandwidth(samples);
  if (!(out.bandwidth > 0.0))
    throw std::invalid_argument("kde needs samples with nonzero spread");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *mn - 3.0 * out.bandwidth;
  const double hi = *mx + 3.0 * out.bandwidth;
  out.grid.resize(grid_points);
  for (int i = 0; i < grid_points; ++i)
    out.grid[i] = lo + (hi - lo) * i / static_cast<double>(grid_points - 1);
  out.density = kde_eval(samples, out.bandwidth, out.grid);
  return out;
}

// P(eta) = empirical fraction of samples in (1-eta, 1+eta].
inline double prob_band(std::span<const double> lambda1_normalized,
                        double eta) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("eta must lie in (0,1]");
  std::size_t count = 0;
  for (double l : lambda1_normalized)
    if (l > 1.0 - eta && l <= 1.0 + eta) ++count;
  return static_cast<double>(count) /
         static_cast<double>(lambda1_normalized.size());
}

// One realization: substreams -> S^kappa -> xi^kappa -> field -> BVP ->
// effective sample. Deterministic in (master seed, kappa).
inline RealizationRecord run_realization(const CampaignConfig& cfg,
                                         const SpectralGrid& grid,
                                         const HexMesh& mesh,
                                         std::uint64_t kappa) {
  UniformStream w_stream(substream_seed(cfg.master_seed, kappa, "W"));
  UniformStream y_stream(substream_seed(cfg.master_seed, kappa, "Y"));
  SpectrumParams sp =
      sample_spectrum_params(w_stream, y_stream, cfg.spectrum, cfg.nu_s);
  std::vector<double> weights = chi_tilde(sp.y, grid, cfg.spectrum.delta);
  NoiseVector xi = sample_noise_vector(cfg.master_seed, kappa, grid.nu());
  ElasticityField field(grid, sp, weights, xi, cfg.mfp, cfg.mean);

  ElasticityField::Workspace ws;
  AssembledSystem sys = assemble(
      mesh, [&](const std::array<double, 3>& x) {
        return field.elasticity_at(x, ws);
      });
  SolveReport report;
  Eigen::MatrixXd u = solve_correctors(mesh, sys, cfg.solver, &report);
  if (!report.converged)
    throw std::runtime_error("solver failed the residual gate");
  RealizationRecord rec;
  rec.sample = effective_matrix(mesh, sys, u);
  rec.sample.kappa = kappa;
  rec.sample.master_seed = cfg.master_seed;
  rec.w = sp.w;
  rec.gamma_c = field.gamma_c();
  rec.gamma_cc = field.gamma_cc();
  return rec;
}

inline CampaignResult run_campaign(const CampaignConfig& cfg_in) {
  CampaignConfig cfg = cfg_in;
  if (cfg.eta_grid.empty()) cfg.eta_grid = default_eta_grid();
  cfg.validate();

  const SpectralGrid grid = build_grid(cfg.nu_s, cfg.sdf);
  const HexMesh mesh = build_mesh(cfg.mesh_n);

  std::vector<std::optional<RealizationRecord>> slots(cfg.kappa_sim);
  std::vector<std::string> errors(cfg.kappa_sim);
  std::atomic<int> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const int i = cursor.fetch_add(1);
      if (i >= cfg.kappa_sim) break;
      const std::uint64_t kappa = static_cast<std::uint64_t>(i) + 1;
      try {
        slots[i] = run_realization(cfg, grid, mesh, kappa);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int nthreads = std::max(1, cfg.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  CampaignResult res;
  res.c_bar_fnorm = cfg.mean.c_bar.norm();
  for (int i = 0; i < cfg.kappa_sim; ++i) {
    if (slots[i])
      res.records.push_back(std::move(*slots[i]));
    else
      res.failures.emplace_back(static_cast<std::uint64_t>(i) + 1, errors[i]);
  }
  if (res.records.empty()) return res;

  std::vector<std::array<double, 6>> lambdas;
  std::vector<double> lambda1;
  lambdas.reserve(res.records.size());
  for (const auto& r : res.records) {
    lambdas.push_back(r.sample.lambda);
    lambda1.push_back(r.sample.lambda[0]);
  }
  res.conv = convergence(lambdas, res.c_bar_fnorm);
  if (res.records.size() >= 2) {
    auto [mean1, normalized] = normalized_norm_stats(lambda1);
    res.mean_lambda1 = mean1;
    res.lambda1_normalized = std::move(normalized);
    for (double eta : cfg.eta_grid)
      res.p_eta.emplace_back(eta, prob_band(res.lambda1_normalized, eta));
    if (res.lambda1_normalized.size() >= 10 &&
        silverman_bandwidth(res.lambda1_normalized) > 0.0) {
      KdeResult kde = kde_pdf(res.lambda1_normalized, cfg.kde_grid_points);
      res.pdf_grid = std::move(kde.grid);
      res.pdf_values = std::move(kde.density);
      res.kde_bandwidth = kde.bandwidth;
    }
  } else {
    res.mean_lambda1 = lambda1[0];
  }
  return res;
}

}  // namespace stohom
