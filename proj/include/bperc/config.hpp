#pragma once

// Campaign configuration (YAML). Every key is optional except `model`:
//
//   model: sq2N-1              # sq2N-1 | sq2N-2 | sq2N-2-corners | sq2N-2-parallels | joint
//   sizes: [32, 48, 64, 96, 128]
//   params: [0, 0.1, 0.2]      # p_d; q_b for joint site sweeps; p_s for bond sweeps
//   param_range: {start: 0, stop: 0.5, step: 0.05}   # used when `params` is absent
//   replicas: 100000
//   seed: 1
//   sweep: sites               # sites | bonds (joint only)
//   spanning: top-bottom       # top-bottom | either
//   epsilon: 0.1
//   chi_grid: {lo: 0.1, hi: 1.0, rough_points: 91, window_points: 201}
//   cost: {lo: 0.6027462, hi: 1.0, points: 81}
//   snapshot: {side: 128, chi: 1.0, q_b: 0.475, models: [all]}   # or p_d instead of q_b
//   output: out
//   workers: 1

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bperc/engine.hpp"
#include "bperc/fitting.hpp"

namespace bperc {

struct SnapshotSettings {
  int side = 128;
  double chi = 1.0;
  std::optional<double> q_b = 0.475;
  std::optional<double> p_d;
  std::vector<BarrierModel> models;  // empty = the campaign model
};

struct CampaignConfig {
  BarrierModel model = BarrierModel::sq2n_1;
  std::vector<int> sizes = {32, 48, 64, 96, 128};
  std::vector<double> params;
  std::uint64_t replicas = 100000;
  std::uint64_t seed = 1;
  SweepKind sweep = SweepKind::sites;
  SpanningMode spanning = SpanningMode::top_bottom;
  ThresholdOptions threshold;
  double cost_lo = kSiteThreshold + 0.01;
  double cost_hi = 1.0;
  std::size_t cost_points = 81;
  SnapshotSettings snapshot;
  std::string output = "out";
  unsigned workers = 1;

  // Stable text of every field that affects results (not output, workers).
  std::string canonical() const;
  // 16 hex digits of FNV-1a over canonical().
  std::string hash() const;
};

// 0.05 for one-bond models and the joint model, 0.025 for two-bond models.
double default_param_step(BarrierModel model);

// Throws ConfigError with field and line on any problem.
CampaignConfig parse_config(std::string_view yaml_text);
CampaignConfig load_config(const std::filesystem::path& path);

void validate_config(const CampaignConfig& config);

}  // namespace bperc
