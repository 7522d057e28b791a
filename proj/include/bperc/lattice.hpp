#pragma once

// Square-lattice geometry, bond bookkeeping and random barrier placement.
//
// Sites are labelled column-major, M = i*L + j for column i and row j. Row 0
// is the top edge. Bond arrays follow a fixed bijection:
//   horizontal h(i,j) joins (i,j)-(i+1,j), index i*L + j,     i < L-1
//   vertical   v(i,j) joins (i,j)-(i,j+1), index i*(L-1) + j, j < L-1
// so the horizontal bond to the right of a site shares the site's label.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bperc/rng.hpp"

namespace bperc {

class LatticeGeometry {
 public:
  explicit LatticeGeometry(int side);

  int side() const noexcept { return side_; }
  std::size_t sites() const noexcept { return sites_; }
  std::size_t bonds_per_orientation() const noexcept { return per_orientation_; }
  std::size_t total_bonds() const noexcept { return 2 * per_orientation_; }

  friend bool operator==(const LatticeGeometry&, const LatticeGeometry&) = default;

 private:
  int side_;
  std::size_t sites_;
  std::size_t per_orientation_;
};

struct SiteLabel {
  std::uint32_t value;
  friend auto operator<=>(const SiteLabel&, const SiteLabel&) = default;
};

SiteLabel site_index(int column, int row, const LatticeGeometry& geometry);

enum class Direction : std::uint8_t { up = 0, down = 1, left = 2, right = 3 };
inline constexpr std::array<Direction, 4> kDirections = {
    Direction::up, Direction::down, Direction::left, Direction::right};

enum class Orientation : std::uint8_t { horizontal, vertical };

struct BondRef {
  Orientation orientation;
  std::uint32_t index;
  friend auto operator<=>(const BondRef&, const BondRef&) = default;
};

struct IncidentBond {
  Direction direction;
  std::optional<BondRef> bond;  // empty on the lattice edge
};

// Always four entries, ordered up, down, left, right.
std::array<IncidentBond, 4> incident_bonds(SiteLabel site, const LatticeGeometry& geometry);

// 1 = open, 0 = closed (barrier). A fresh grid is fully open.
class BondGrid {
 public:
  explicit BondGrid(const LatticeGeometry& geometry);

  const LatticeGeometry& geometry() const noexcept { return geometry_; }

  bool is_open(BondRef bond) const;
  // Returns true when the bond went from open to closed.
  bool close(BondRef bond);
  void reset_open();

  std::span<const std::uint8_t> horizontal() const noexcept { return horizontal_; }
  std::span<const std::uint8_t> vertical() const noexcept { return vertical_; }
  std::span<std::uint8_t> horizontal_mut() noexcept { return horizontal_; }
  std::span<std::uint8_t> vertical_mut() noexcept { return vertical_; }

  std::size_t closed_count() const;

  // Debug dump: one `H i j` / `V i j` line per closed bond, sorted.
  std::string dump_closed() const;

  friend bool operator==(const BondGrid&, const BondGrid&) = default;

 private:
  LatticeGeometry geometry_;
  std::vector<std::uint8_t> horizontal_;
  std::vector<std::uint8_t> vertical_;
};

enum class BarrierModel : std::uint8_t {
  sq2n_1,
  sq2n_2,
  sq2n_2_corners,
  sq2n_2_parallels,
  joint_site_bond,
};

inline constexpr std::array<BarrierModel, 5> kAllModels = {
    BarrierModel::sq2n_1, BarrierModel::sq2n_2, BarrierModel::sq2n_2_corners,
    BarrierModel::sq2n_2_parallels, BarrierModel::joint_site_bond};

std::string_view model_name(BarrierModel model);
std::optional<BarrierModel> parse_model(std::string_view name);
bool closes_two_bonds(BarrierModel model);

// Barrier patterns as bitmasks over Direction (bit d set = close direction d).
std::span<const std::uint8_t> barrier_patterns(BarrierModel model);

struct BarrierAllocation {
  double p_d = 0.0;
  std::size_t n_d = 0;
  std::size_t newly_closed = 0;
};

struct AllocationResult {
  BondGrid grid;
  BarrierAllocation allocation;
};

// Reusable scratch for repeated allocations on one geometry.
class BarrierAllocator {
 public:
  explicit BarrierAllocator(const LatticeGeometry& geometry);

  // Resets `grid` to all-open, then places barriers. When `selected` is
  // non-null the chosen site labels are appended to it.
  BarrierAllocation allocate(BondGrid& grid, BarrierModel model, double p_d, Rng& rng,
                             std::vector<std::uint32_t>* selected = nullptr);

 private:
  LatticeGeometry geometry_;
  std::vector<std::uint32_t> labels_;
};

AllocationResult allocate_barriers(const LatticeGeometry& geometry, BarrierModel model,
                                   double p_d, Rng& rng);

// Each bond closed independently with probability q_b. Returns the number
// of closed bonds.
std::size_t fill_joint_bonds(BondGrid& grid, double q_b, Rng& rng);
BondGrid allocate_joint_bonds(const LatticeGeometry& geometry, double q_b, Rng& rng);

}  // namespace bperc
