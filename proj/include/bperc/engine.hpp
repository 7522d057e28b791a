#pragma once

// Newman-Ziff sweeps: occupy sites (or open bonds) one at a time in random
// order, track clusters with union-find and record the count at which a
// spanning cluster first appears.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bperc/lattice.hpp"
#include "bperc/rng.hpp"
#include "bperc/union_find.hpp"

namespace bperc {

inline constexpr int kEngineVersion = 1;

enum class SweepKind : std::uint8_t {
  sites,  // add sites under a quenched bond grid
  bonds,  // add bonds under a quenched site occupation (joint model only)
};

enum class SpanningMode : std::uint8_t {
  top_bottom,  // row 0 to row L-1
  either,      // top-bottom or left-right
};

std::string_view sweep_name(SweepKind kind);
std::optional<SweepKind> parse_sweep(std::string_view name);
std::string_view spanning_name(SpanningMode mode);
std::optional<SpanningMode> parse_spanning(std::string_view name);

struct ReplicaResult {
  std::optional<std::uint32_t> critical;  // n_c, or empty if nothing spans
};

// Per-worker sweep state. Not thread-safe; create one per thread.
class Sweeper {
 public:
  Sweeper(const LatticeGeometry& geometry, SpanningMode mode);

  const LatticeGeometry& geometry() const noexcept { return geometry_; }

  // Occupies sites in a Fisher-Yates order drawn from rng; stops at the
  // first spanning event.
  std::optional<std::uint32_t> add_sites(const BondGrid& grid, Rng& rng);

  // Same sweep with a caller-supplied order (a permutation of all labels).
  std::optional<std::uint32_t> add_sites_in_order(const BondGrid& grid,
                                                  std::span<const std::uint32_t> order);

  // Occupies each site with probability site_fraction, then opens bonds
  // in random order. Bond ids: h index for horizontal, L(L-1) + v index for
  // vertical.
  std::optional<std::uint32_t> add_bonds(double site_fraction, Rng& rng);

 private:
  template <class NextSite>
  std::optional<std::uint32_t> sweep_sites(const BondGrid& grid, NextSite next);
  void reset();
  std::uint8_t boundary_flags(std::uint32_t site) const;
  // Unites the clusters of a and b; returns the boundary flags of the result.
  std::uint8_t join(std::uint32_t a, std::uint32_t b);

  LatticeGeometry geometry_;
  SpanningMode mode_;
  UnionFind clusters_;
  std::vector<std::uint8_t> occupied_;
  std::vector<std::uint8_t> edges_;  // per cluster root
  std::vector<std::uint32_t> order_;
};

ReplicaResult run_replica(const LatticeGeometry& geometry, const BondGrid& grid, Rng& rng,
                          SpanningMode mode = SpanningMode::top_bottom);

// Exact integer accumulators of the per-replica count of newly closed
// bonds; merges are exact and order independent.
struct BarrierStats {
  std::uint64_t count = 0;
  std::uint64_t sum = 0;
  std::uint64_t sum_sq = 0;

  void add(std::uint64_t closed) {
    ++count;
    sum += closed;
    sum_sq += closed * closed;
  }
  void merge(const BarrierStats& other) {
    count += other.count;
    sum += other.sum;
    sum_sq += other.sum_sq;
  }
  double mean() const;
  double variance() const;  // unbiased sample variance

  friend bool operator==(const BarrierStats&, const BarrierStats&) = default;
};

struct SpanningHistogram {
  int side = 0;
  BarrierModel model = BarrierModel::sq2n_1;
  SweepKind sweep = SweepKind::sites;
  SpanningMode spanning = SpanningMode::top_bottom;
  double param = 0.0;  // p_d, q_b for joint site sweeps, p_s for bond sweeps
  std::uint64_t seed = 0;
  std::uint64_t replicas = 0;
  std::uint64_t nonspanning = 0;
  std::vector<std::uint64_t> counts;  // counts[n] = replicas with n_c == n
  BarrierStats barriers;

  std::size_t capacity() const noexcept { return counts.empty() ? 0 : counts.size() - 1; }
  void record(const std::optional<std::uint32_t>& critical);
  // Entrywise addition; throws if the campaigns are not compatible.
  void merge(const SpanningHistogram& other);

  friend bool operator==(const SpanningHistogram&, const SpanningHistogram&) = default;
};

SpanningHistogram empty_histogram(int side, BarrierModel model, SweepKind sweep,
                                  SpanningMode spanning, double param, std::uint64_t seed);

struct CampaignParams {
  int side = 0;
  BarrierModel model = BarrierModel::sq2n_1;
  double param = 0.0;
  SweepKind sweep = SweepKind::sites;
  SpanningMode spanning = SpanningMode::top_bottom;
  std::uint64_t replicas = 0;
  std::uint64_t first_replica = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

std::uint64_t replica_seed(const CampaignParams& params, std::uint64_t replica);

// Runs replicas [first_replica, first_replica + replicas). Each replica
// draws a fresh barrier configuration and a fresh order from its own
// stream; the result does not depend on the worker count.
SpanningHistogram run_campaign(const CampaignParams& params);

enum class SiteState : std::uint8_t { unoccupied = 0, other_cluster = 1, largest_cluster = 2 };
std::string_view site_state_name(SiteState state);

struct SnapshotParams {
  int side = 0;
  BarrierModel model = BarrierModel::sq2n_1;
  double param = 0.0;  // p_d, or q_b for the joint model
  double chi = 1.0;
  std::uint64_t seed = 0;
  SpanningMode spanning = SpanningMode::top_bottom;
};

struct Snapshot {
  int side = 0;
  std::vector<SiteState> states;  // indexed by site label
  std::size_t occupied = 0;
  std::size_t largest_size = 0;
  bool largest_spans = false;
  std::size_t closed_bonds = 0;
};

Snapshot snapshot_largest_cluster(const SnapshotParams& params);

}  // namespace bperc
