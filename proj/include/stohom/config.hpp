#pragma once

// JSON run configuration: defaults, validation, and the normalized echo
// that goes into run manifests.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "stohom/mc.hpp"
#include "stohom/version.hpp"

namespace stohom {

struct StudyGrid {
  std::vector<double> lc_bar{0.2, 0.4, 0.6};
  std::vector<double> delta_unc{0.0, 0.2, 0.3, 0.4};
};

struct RunConfig {
  CampaignConfig campaign;
  std::array<double, 3> e_moduli{1.0e10, 0.5e10, 0.1e10};
  double nu23 = 0.25, nu31 = 0.15, nu12 = 0.1;
  std::array<double, 3> g_moduli{};
  bool g_explicit = false;
  std::string solver_name = "auto";
  StudyGrid study;
  int sample_grid_points = 2;
};

inline RunConfig parse_config(const nlohmann::json& raw) {
  const nlohmann::json& j = raw.contains("config") ? raw.at("config") : raw;
  RunConfig cfg;
  auto& c = cfg.campaign;
  c.master_seed = j.value("master_seed", std::uint64_t{1});
  c.kappa_sim = j.value("kappa_sim", 2000);
  c.mesh_n = j.value("mesh_n", 20);
  c.nu_s = j.value("nu_s", 8);
  c.threads = j.value("threads", 1);
  cfg.solver_name = j.value("solver", std::string("auto"));
  c.solver.kind = SolverOptions::parse(cfg.solver_name);
  c.solver.tol = j.value("solver_tol", 1e-9);
  c.mfp = MatrixFieldParams(j.value("delta_c", 0.4), j.value("epsilon", 1e-3));

  if (j.contains("mean")) {
    const auto& m = j.at("mean");
    if (m.contains("E")) {
      auto e = m.at("E").get<std::vector<double>>();
      if (e.size() != 3) throw std::invalid_argument("mean.E needs 3 entries");
      cfg.e_moduli = {e[0], e[1], e[2]};
    }
    cfg.nu23 = m.value("nu23", cfg.nu23);
    cfg.nu31 = m.value("nu31", cfg.nu31);
    cfg.nu12 = m.value("nu12", cfg.nu12);
    if (m.contains("G")) {
      auto g = m.at("G").get<std::vector<double>>();
      if (g.size() != 3) throw std::invalid_argument("mean.G needs 3 entries");
      cfg.g_moduli = {g[0], g[1], g[2]};
      cfg.g_explicit = true;
    }
  }
  if (!cfg.g_explicit)
    cfg.g_moduli = MeanElasticity::default_shear(
        cfg.e_moduli[0], cfg.e_moduli[1], cfg.e_moduli[2], cfg.nu23, cfg.nu31,
        cfg.nu12);
  c.mean = MeanElasticity::orthotropic(
      cfg.e_moduli[0], cfg.e_moduli[1], cfg.e_moduli[2], cfg.nu23, cfg.nu31,
      cfg.nu12, cfg.g_moduli[0], cfg.g_moduli[1], cfg.g_moduli[2]);

  if (j.contains("spectrum")) {
    const auto& s = j.at("spectrum");
    double lc = s.value("Lc_bar", 0.2);
    double dlc = s.value("delta_Lc", 0.0);
    double dunc = s.value("delta_unc", 0.0);
    std::array<double, 3> delta{dunc, dunc, dunc};
    if (s.contains("delta")) {
      auto d = s.at("delta").get<std::vector<double>>();
      if (d.size() != 3)
        throw std::invalid_argument("spectrum.delta needs 3 entries");
      delta = {d[0], d[1], d[2]};
    }
    c.spectrum = SpectrumDistribution(lc, dlc, delta);
  } else {
    c.spectrum = SpectrumDistribution(0.2, 0.0, {0.0, 0.0, 0.0});
  }

  if (j.contains("eta_grid"))
    c.eta_grid = j.at("eta_grid").get<std::vector<double>>();
  c.kde_grid_points = j.value("kde_grid_points", 512);

  if (j.contains("study")) {
    const auto& s = j.at("study");
    if (s.contains("Lc_bar"))
      cfg.study.lc_bar = s.at("Lc_bar").get<std::vector<double>>();
    if (s.contains("delta_unc"))
      cfg.study.delta_unc = s.at("delta_unc").get<std::vector<double>>();
  }
  cfg.sample_grid_points = j.value("sample_grid_points", 2);
  if (cfg.sample_grid_points < 1)
    throw std::invalid_argument("sample_grid_points must be >= 1");
  c.validate();
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  nlohmann::json j;
  in >> j;
  return parse_config(j);
}

// Normalized config with every default materialized; feeding this back in
// reproduces the run.
inline nlohmann::json config_echo(const RunConfig& cfg) {
  const auto& c = cfg.campaign;
  nlohmann::json j;
  j["master_seed"] = c.master_seed;
  j["kappa_sim"] = c.kappa_sim;
  j["mesh_n"] = c.mesh_n;
  j["nu_s"] = c.nu_s;
  j["threads"] = c.threads;
  j["solver"] = cfg.solver_name;
  j["solver_tol"] = c.solver.tol;
  j["delta_c"] = c.mfp.delta_c;
  j["epsilon"] = c.mfp.epsilon;
  j["mean"] = {{"E", cfg.e_moduli},
               {"nu23", cfg.nu23},
               {"nu31", cfg.nu31},
               {"nu12", cfg.nu12},
               {"G", cfg.g_moduli}};
  j["spectrum"] = {{"Lc_bar", c.spectrum.lc_bar},
                   {"delta_Lc", c.spectrum.delta_lc},
                   {"delta", c.spectrum.delta}};
  j["eta_grid"] = c.eta_grid.empty() ? default_eta_grid() : c.eta_grid;
  j["kde_grid_points"] = c.kde_grid_points;
  j["study"] = {{"Lc_bar", cfg.study.lc_bar},
                {"delta_unc", cfg.study.delta_unc}};
  j["sample_grid_points"] = cfg.sample_grid_points;
  return j;
}

inline nlohmann::json derived_parameters(const RunConfig& cfg) {
  const auto& c = cfg.campaign;
  nlohmann::json d;
  d["sigma_c"] = c.mfp.sigma_c;
  d["alpha"] = c.mfp.alpha;
  d["c0"] = c.mean.c0;
  d["c1"] = c.mean.c1;
  d["c_eps"] = c.mean.c_eps(c.mfp.epsilon);
  d["delta_s"] = c.spectrum.delta_s();
  d["w_min"] = c.spectrum.w_min();
  d["w_max"] = c.spectrum.w_max();
  d["nu"] = c.nu_s * c.nu_s * c.nu_s;
  d["nu_hat_s"] = c.nu_s / 2;
  d["shear_moduli_estimated"] = !cfg.g_explicit;
  return d;
}

}  // namespace stohom
