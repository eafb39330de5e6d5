#pragma once

// Campaign artifacts: the versioned CSV schemas and the run manifest.
// Column order is part of the output contract.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "stohom/config.hpp"
#include "stohom/io.hpp"

namespace stohom {

struct OutputInfo {
  std::string file;
  std::size_t rows = 0;
  std::uint64_t checksum = 0;
};

inline std::vector<std::string> upper_triangle_headers(
    const std::string& prefix) {
  std::vector<std::string> h;
  for (int m = 1; m <= 6; ++m)
    for (int n = m; n <= 6; ++n)
      h.push_back(prefix + std::to_string(m) + std::to_string(n));
  return h;
}

inline std::vector<double> upper_triangle(const Matrix6& c) {
  std::vector<double> v;
  v.reserve(21);
  for (int m = 0; m < 6; ++m)
    for (int n = m; n < 6; ++n) v.push_back(c(m, n));
  return v;
}

inline OutputInfo write_records_csv(const std::filesystem::path& dir,
                                    const CampaignResult& res) {
  const auto path = dir / "records.csv";
  std::vector<std::string> header{"kappa"};
  for (const auto& h : upper_triangle_headers("ceff_")) header.push_back(h);
  for (int i = 1; i <= 6; ++i) header.push_back("lambda" + std::to_string(i));
  CsvWriter w(path, header);
  for (const auto& r : res.records) {
    std::vector<double> row = upper_triangle(r.sample.c_eff);
    for (double l : r.sample.lambda) row.push_back(l);
    w.row(r.sample.kappa, row);
  }
  w.close();
  return {"records.csv", w.rows(), checksum_file(path)};
}

inline OutputInfo write_conv_csv(const std::filesystem::path& dir,
                                 const CampaignResult& res) {
  const auto path = dir / "conv.csv";
  CsvWriter w(path, {"kappa", "conv"});
  for (std::size_t k = 0; k < res.conv.size(); ++k)
    w.row(static_cast<std::uint64_t>(k) + 1, {res.conv[k]});
  w.close();
  return {"conv.csv", w.rows(), checksum_file(path)};
}

inline OutputInfo write_pdf_csv(const std::filesystem::path& dir,
                                const CampaignResult& res) {
  const auto path = dir / "pdf.csv";
  CsvWriter w(path, {"lambda1_grid", "density"});
  for (std::size_t i = 0; i < res.pdf_grid.size(); ++i)
    w.row({res.pdf_grid[i], res.pdf_values[i]});
  w.close();
  return {"pdf.csv", w.rows(), checksum_file(path)};
}

inline OutputInfo write_peta_csv(const std::filesystem::path& dir,
                                 const CampaignResult& res) {
  const auto path = dir / "peta.csv";
  CsvWriter w(path, {"eta", "P"});
  for (const auto& [eta, p] : res.p_eta) w.row({eta, p});
  w.close();
  return {"peta.csv", w.rows(), checksum_file(path)};
}

inline std::vector<OutputInfo> write_campaign_csvs(
    const std::filesystem::path& dir, const CampaignResult& res) {
  return {write_records_csv(dir, res), write_conv_csv(dir, res),
          write_pdf_csv(dir, res), write_peta_csv(dir, res)};
}

inline void write_manifest(const std::filesystem::path& dir,
                           const RunConfig& cfg, const std::string& command,
                           const std::vector<OutputInfo>& outputs,
                           const CampaignResult* res = nullptr) {
  nlohmann::json m;
  m["tool"] = {{"name", "stohom"}, {"version", kVersion}};
  m["command"] = command;
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m["created_utc"] = stamp;
  m["master_seed"] = cfg.campaign.master_seed;
  m["config"] = config_echo(cfg);
  m["derived"] = derived_parameters(cfg);
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : outputs)
    outs.push_back({{"file", o.file},
                    {"rows", o.rows},
                    {"fnv1a64", std::to_string(o.checksum)}});
  m["outputs"] = outs;
  if (res) {
    nlohmann::json fails = nlohmann::json::array();
    for (const auto& [kappa, why] : res->failures)
      fails.push_back({{"kappa", kappa}, {"reason", why}});
    m["failures"] = fails;
    m["effective_sample_count"] = res->records.size();
  }
  std::ofstream out(dir / "manifest.json");
  out << m.dump(2) << "\n";
}

}  // namespace stohom
