#include "bperc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bperc/errors.hpp"

namespace bperc {

namespace {

constexpr std::uint8_t bit(Direction d) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(d)); }

constexpr std::uint8_t kUp = bit(Direction::up);
constexpr std::uint8_t kDown = bit(Direction::down);
constexpr std::uint8_t kLeft = bit(Direction::left);
constexpr std::uint8_t kRight = bit(Direction::right);

constexpr std::array<std::uint8_t, 4> kOneBond = {kUp, kDown, kLeft, kRight};
constexpr std::array<std::uint8_t, 6> kTwoBond = {kUp | kDown,   kUp | kLeft,   kUp | kRight,
                                                  kDown | kLeft, kDown | kRight, kLeft | kRight};
constexpr std::array<std::uint8_t, 2> kCorners = {kLeft | kUp, kRight | kDown};
constexpr std::array<std::uint8_t, 2> kParallels = {kUp | kDown, kLeft | kRight};

std::optional<BondRef> bond_toward(std::uint32_t site, Direction d, std::uint32_t side) {
  const std::uint32_t i = site / side;
  const std::uint32_t j = site % side;
  switch (d) {
    case Direction::up:
      if (j == 0) return std::nullopt;
      return BondRef{Orientation::vertical, i * (side - 1) + j - 1};
    case Direction::down:
      if (j + 1 == side) return std::nullopt;
      return BondRef{Orientation::vertical, i * (side - 1) + j};
    case Direction::left:
      if (i == 0) return std::nullopt;
      return BondRef{Orientation::horizontal, site - side};
    case Direction::right:
      if (i + 1 == side) return std::nullopt;
      return BondRef{Orientation::horizontal, site};
  }
  return std::nullopt;
}

void check_fraction(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    std::ostringstream msg;
    msg << name << " must lie in [0, 1], got " << value;
    fail(ErrorCode::domain, msg.str());
  }
}

}  // namespace

LatticeGeometry::LatticeGeometry(int side) : side_(side) {
  if (side < 2) fail(ErrorCode::domain, "lattice side must be at least 2, got " + std::to_string(side));
  if (side > 46340) fail(ErrorCode::domain, "lattice side too large for 32-bit site labels");
  const auto l = static_cast<std::size_t>(side);
  sites_ = l * l;
  per_orientation_ = l * (l - 1);
}

SiteLabel site_index(int column, int row, const LatticeGeometry& geometry) {
  const int side = geometry.side();
  if (column < 0 || column >= side || row < 0 || row >= side) {
    std::ostringstream msg;
    msg << "site (" << column << ", " << row << ") outside " << side << "x" << side << " lattice";
    fail(ErrorCode::domain, msg.str());
  }
  return SiteLabel{static_cast<std::uint32_t>(column * side + row)};
}

std::array<IncidentBond, 4> incident_bonds(SiteLabel site, const LatticeGeometry& geometry) {
  if (site.value >= geometry.sites()) fail(ErrorCode::domain, "site label out of range");
  const auto side = static_cast<std::uint32_t>(geometry.side());
  std::array<IncidentBond, 4> out{};
  for (std::size_t k = 0; k < kDirections.size(); ++k)
    out[k] = IncidentBond{kDirections[k], bond_toward(site.value, kDirections[k], side)};
  return out;
}

BondGrid::BondGrid(const LatticeGeometry& geometry)
    : geometry_(geometry),
      horizontal_(geometry.bonds_per_orientation(), 1),
      vertical_(geometry.bonds_per_orientation(), 1) {}

bool BondGrid::is_open(BondRef bond) const {
  const auto& arr = bond.orientation == Orientation::horizontal ? horizontal_ : vertical_;
  return arr.at(bond.index) != 0;
}

bool BondGrid::close(BondRef bond) {
  auto& arr = bond.orientation == Orientation::horizontal ? horizontal_ : vertical_;
  std::uint8_t& entry = arr.at(bond.index);
  const bool was_open = entry != 0;
  entry = 0;
  return was_open;
}

void BondGrid::reset_open() {
  std::fill(horizontal_.begin(), horizontal_.end(), std::uint8_t{1});
  std::fill(vertical_.begin(), vertical_.end(), std::uint8_t{1});
}

std::size_t BondGrid::closed_count() const {
  const auto zeros = [](const std::vector<std::uint8_t>& v) {
    return static_cast<std::size_t>(std::count(v.begin(), v.end(), std::uint8_t{0}));
  };
  return zeros(horizontal_) + zeros(vertical_);
}

std::string BondGrid::dump_closed() const {
  const auto side = static_cast<std::size_t>(geometry_.side());
  std::ostringstream out;
  // h index = i*L + j; v index = i*(L-1) + j. Both enumerate (i, j) in
  // lexicographic order, so the output is already sorted.
  for (std::size_t k = 0; k < horizontal_.size(); ++k)
    if (!horizontal_[k]) out << "H " << k / side << ' ' << k % side << '\n';
  for (std::size_t k = 0; k < vertical_.size(); ++k)
    if (!vertical_[k]) out << "V " << k / (side - 1) << ' ' << k % (side - 1) << '\n';
  return out.str();
}

std::string_view model_name(BarrierModel model) {
  switch (model) {
    case BarrierModel::sq2n_1: return "sq2N-1";
    case BarrierModel::sq2n_2: return "sq2N-2";
    case BarrierModel::sq2n_2_corners: return "sq2N-2-corners";
    case BarrierModel::sq2n_2_parallels: return "sq2N-2-parallels";
    case BarrierModel::joint_site_bond: return "joint";
  }
  return "unknown";
}

std::optional<BarrierModel> parse_model(std::string_view name) {
  for (BarrierModel m : kAllModels)
    if (model_name(m) == name) return m;
  if (name == "sq2N-2c" || name == "corners") return BarrierModel::sq2n_2_corners;
  if (name == "sq2N-2p" || name == "parallels") return BarrierModel::sq2n_2_parallels;
  if (name == "joint-site-bond" || name == "joint_site_bond") return BarrierModel::joint_site_bond;
  return std::nullopt;
}

bool closes_two_bonds(BarrierModel model) {
  return model == BarrierModel::sq2n_2 || model == BarrierModel::sq2n_2_corners ||
         model == BarrierModel::sq2n_2_parallels;
}

std::span<const std::uint8_t> barrier_patterns(BarrierModel model) {
  switch (model) {
    case BarrierModel::sq2n_1: return kOneBond;
    case BarrierModel::sq2n_2: return kTwoBond;
    case BarrierModel::sq2n_2_corners: return kCorners;
    case BarrierModel::sq2n_2_parallels: return kParallels;
    case BarrierModel::joint_site_bond: break;
  }
  return {};
}

BarrierAllocator::BarrierAllocator(const LatticeGeometry& geometry)
    : geometry_(geometry), labels_(geometry.sites()) {}

BarrierAllocation BarrierAllocator::allocate(BondGrid& grid, BarrierModel model, double p_d,
                                             Rng& rng, std::vector<std::uint32_t>* selected) {
  check_fraction(p_d, "p_d");
  if (model == BarrierModel::joint_site_bond)
    fail(ErrorCode::domain, "joint site-bond model has no per-site barrier patterns");
  if (!(grid.geometry() == geometry_)) fail(ErrorCode::domain, "grid geometry mismatch");

  grid.reset_open();
  const auto patterns = barrier_patterns(model);
  const auto side = static_cast<std::uint32_t>(geometry_.side());
  const std::size_t n = geometry_.sites();

  std::binomial_distribution<std::uint64_t> count_dist(n, p_d);
  const auto n_d = static_cast<std::size_t>(count_dist(rng));

  std::iota(labels_.begin(), labels_.end(), std::uint32_t{0});
  BarrierAllocation result{p_d, n_d, 0};
  for (std::size_t k = 0; k < n_d; ++k) {
    std::swap(labels_[k], labels_[k + uniform_below(rng, static_cast<std::uint32_t>(n - k))]);
    const std::uint32_t site = labels_[k];
    if (selected) selected->push_back(site);

    const std::uint8_t mask = patterns[uniform_below(rng, static_cast<std::uint32_t>(patterns.size()))];
    for (Direction d : kDirections) {
      if (!(mask & bit(d))) continue;
      if (auto bond = bond_toward(site, d, side); bond && grid.close(*bond)) ++result.newly_closed;
    }
  }
  return result;
}

AllocationResult allocate_barriers(const LatticeGeometry& geometry, BarrierModel model,
                                   double p_d, Rng& rng) {
  BondGrid grid(geometry);
  BarrierAllocator allocator(geometry);
  const BarrierAllocation allocation = allocator.allocate(grid, model, p_d, rng);
  return AllocationResult{std::move(grid), allocation};
}

std::size_t fill_joint_bonds(BondGrid& grid, double q_b, Rng& rng) {
  check_fraction(q_b, "q_b");
  std::bernoulli_distribution closed(q_b);
  std::size_t count = 0;
  for (auto arr : {grid.horizontal_mut(), grid.vertical_mut()}) {
    for (std::uint8_t& entry : arr) {
      const bool c = closed(rng);
      entry = c ? 0 : 1;
      count += c;
    }
  }
  return count;
}

BondGrid allocate_joint_bonds(const LatticeGeometry& geometry, double q_b, Rng& rng) {
  BondGrid grid(geometry);
  fill_joint_bonds(grid, q_b, rng);
  return grid;
}

}  // namespace bperc
