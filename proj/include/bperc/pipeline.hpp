#pragma once

// Command implementations behind the CLI. Layout of an output directory:
//
//   histograms/L<L>_p<param>.hist   simulate
//   curves/L<L>_p<param>.curve      analyze  (chi P on the rough grid)
//   thresholds.txt, fss.txt         analyze  (records)
//   params.txt, fig3a.txt, ...      curves
//   cost_<model>.txt                cost
//   snapshot_<model>.txt            snapshot

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bperc/analysis.hpp"
#include "bperc/config.hpp"
#include "bperc/histogram_io.hpp"

namespace bperc {

struct CommandOptions {
  std::optional<std::filesystem::path> config_path;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  bool force = false;
  std::ostream* log = nullptr;  // progress and warnings; may be null
};

struct CommandReport {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> warnings;  // fit-quality problems (exit code 3)
  std::vector<std::string> notes;     // informational, e.g. THRESHOLD_NOT_REACHED
  std::size_t skipped = 0;            // simulate: cells already complete
};

// Loads --config (if any) and applies --seed / --workers / --out.
CampaignConfig effective_config(const CommandOptions& options);
std::filesystem::path output_directory(const CampaignConfig& config, const CommandOptions& options);

std::string histogram_filename(int side, double param);

CommandReport cmd_simulate(const CommandOptions& options);
CommandReport cmd_analyze(const CommandOptions& options);
CommandReport cmd_curves(const CommandOptions& options);
CommandReport cmd_cost(const CommandOptions& options);
CommandReport cmd_snapshot(const CommandOptions& options);
CommandReport cmd_validate_config(const CommandOptions& options);

void write_curve(std::ostream& out, const PercolationCurve& curve, double param, const AuditInfo& audit);
PercolationCurve read_curve(std::istream& in);

// Snapshot control parameter for a q_b target: q_b itself for the joint
// model, else p_d from the published power law, clamped to 1.
struct SnapshotTarget {
  double param = 0.0;
  bool clamped = false;
  double unclamped = 0.0;
};
SnapshotTarget snapshot_parameter(BarrierModel model, double q_b);

}  // namespace bperc
