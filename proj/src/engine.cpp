#include "bperc/engine.hpp"

#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "bperc/errors.hpp"

namespace bperc {

std::string_view sweep_name(SweepKind kind) {
  return kind == SweepKind::sites ? "sites" : "bonds";
}

std::optional<SweepKind> parse_sweep(std::string_view name) {
  if (name == "sites") return SweepKind::sites;
  if (name == "bonds") return SweepKind::bonds;
  return std::nullopt;
}

std::string_view spanning_name(SpanningMode mode) {
  return mode == SpanningMode::top_bottom ? "top-bottom" : "either";
}

std::optional<SpanningMode> parse_spanning(std::string_view name) {
  if (name == "top-bottom") return SpanningMode::top_bottom;
  if (name == "either") return SpanningMode::either;
  return std::nullopt;
}

std::string_view site_state_name(SiteState state) {
  switch (state) {
    case SiteState::unoccupied: return "unoccupied";
    case SiteState::other_cluster: return "other";
    case SiteState::largest_cluster: return "largest";
  }
  return "unknown";
}

namespace {

constexpr std::uint8_t kTop = 1, kBottom = 2, kLeft = 4, kRight = 8;

bool spanning_flags(std::uint8_t f) {
  return (f & (kTop | kBottom)) == (kTop | kBottom) || (f & (kLeft | kRight)) == (kLeft | kRight);
}

}  // namespace

Sweeper::Sweeper(const LatticeGeometry& geometry, SpanningMode mode)
    : geometry_(geometry),
      mode_(mode),
      clusters_(geometry.sites()),
      occupied_(geometry.sites(), 0),
      edges_(geometry.sites(), 0) {}

void Sweeper::reset() {
  clusters_.reset();
  std::fill(occupied_.begin(), occupied_.end(), std::uint8_t{0});
  std::fill(edges_.begin(), edges_.end(), std::uint8_t{0});
}

// Boundary flags live on cluster roots. Virtual boundary nodes would not
// work for the either mode: a corner site would join two of them.
std::uint8_t Sweeper::boundary_flags(std::uint32_t site) const {
  const auto side = static_cast<std::uint32_t>(geometry_.side());
  const std::uint32_t i = site / side;
  const std::uint32_t j = site % side;
  std::uint8_t f = 0;
  if (j == 0) f |= kTop;
  if (j + 1 == side) f |= kBottom;
  if (mode_ == SpanningMode::either) {
    if (i == 0) f |= kLeft;
    if (i + 1 == side) f |= kRight;
  }
  return f;
}

std::uint8_t Sweeper::join(std::uint32_t a, std::uint32_t b) {
  const std::uint32_t ra = clusters_.find(a);
  const std::uint32_t rb = clusters_.find(b);
  if (ra == rb) return edges_[ra];
  clusters_.unite(ra, rb);
  const std::uint8_t f = edges_[ra] | edges_[rb];
  edges_[clusters_.find(ra)] = f;
  return f;
}

template <class NextSite>
std::optional<std::uint32_t> Sweeper::sweep_sites(const BondGrid& grid, NextSite next) {
  if (!(grid.geometry() == geometry_)) fail(ErrorCode::domain, "grid geometry mismatch");
  reset();
  const auto side = static_cast<std::uint32_t>(geometry_.side());
  const auto n = static_cast<std::uint32_t>(geometry_.sites());
  const std::uint8_t* h = grid.horizontal().data();
  const std::uint8_t* v = grid.vertical().data();

  for (std::uint32_t k = 0; k < n; ++k) {
    const std::uint32_t site = next(k);
    occupied_[site] = 1;
    const std::uint32_t i = site / side;
    const std::uint32_t j = site % side;
    std::uint8_t f = edges_[site] = boundary_flags(site);

    if (i > 0 && occupied_[site - side] && h[site - side]) f = join(site, site - side);
    if (i + 1 < side && occupied_[site + side] && h[site]) f = join(site, site + side);
    const std::uint32_t vbase = i * (side - 1) + j;
    if (j > 0 && occupied_[site - 1] && v[vbase - 1]) f = join(site, site - 1);
    if (j + 1 < side && occupied_[site + 1] && v[vbase]) f = join(site, site + 1);

    if (spanning_flags(f)) return k + 1;
  }
  return std::nullopt;
}

std::optional<std::uint32_t> Sweeper::add_sites(const BondGrid& grid, Rng& rng) {
  const auto n = static_cast<std::uint32_t>(geometry_.sites());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::uint32_t{0});
  return sweep_sites(grid, [&](std::uint32_t k) {
    std::swap(order_[k], order_[k + uniform_below(rng, n - k)]);
    return order_[k];
  });
}

std::optional<std::uint32_t> Sweeper::add_sites_in_order(const BondGrid& grid,
                                                         std::span<const std::uint32_t> order) {
  if (order.size() != geometry_.sites()) fail(ErrorCode::domain, "order must list every site");
  std::vector<std::uint8_t> seen(order.size(), 0);
  for (std::uint32_t s : order) {
    if (s >= order.size() || seen[s]) fail(ErrorCode::domain, "order is not a permutation");
    seen[s] = 1;
  }
  return sweep_sites(grid, [&](std::uint32_t k) { return order[k]; });
}

std::optional<std::uint32_t> Sweeper::add_bonds(double site_fraction, Rng& rng) {
  if (!(site_fraction >= 0.0 && site_fraction <= 1.0))
    fail(ErrorCode::domain, "site fraction must lie in [0, 1]");
  reset();
  const auto side = static_cast<std::uint32_t>(geometry_.side());
  const auto n = static_cast<std::uint32_t>(geometry_.sites());
  const auto per = static_cast<std::uint32_t>(geometry_.bonds_per_orientation());
  const std::uint32_t m = 2 * per;

  std::bernoulli_distribution occupy(site_fraction);
  for (std::uint32_t s = 0; s < n; ++s) {
    if (!occupy(rng)) continue;
    occupied_[s] = 1;
    edges_[s] = boundary_flags(s);
    if (spanning_flags(edges_[s])) return 0;
  }

  order_.resize(m);
  std::iota(order_.begin(), order_.end(), std::uint32_t{0});
  for (std::uint32_t k = 0; k < m; ++k) {
    std::swap(order_[k], order_[k + uniform_below(rng, m - k)]);
    const std::uint32_t bond = order_[k];
    std::uint32_t a, b;
    if (bond < per) {
      a = bond;
      b = bond + side;
    } else {
      const std::uint32_t vb = bond - per;
      a = (vb / (side - 1)) * side + vb % (side - 1);
      b = a + 1;
    }
    if (occupied_[a] && occupied_[b] && spanning_flags(join(a, b))) return k + 1;
  }
  return std::nullopt;
}

ReplicaResult run_replica(const LatticeGeometry& geometry, const BondGrid& grid, Rng& rng,
                          SpanningMode mode) {
  Sweeper sweeper(geometry, mode);
  return ReplicaResult{sweeper.add_sites(grid, rng)};
}

double BarrierStats::mean() const {
  if (count == 0) return std::nan("");
  return static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(count));
}

double BarrierStats::variance() const {
  if (count < 2) return std::nan("");
  const long double c = static_cast<long double>(count);
  const long double s = static_cast<long double>(sum);
  const long double ss = static_cast<long double>(sum_sq);
  return static_cast<double>((ss - s * s / c) / (c - 1));
}

void SpanningHistogram::record(const std::optional<std::uint32_t>& critical) {
  ++replicas;
  if (!critical) {
    ++nonspanning;
    return;
  }
  if (*critical >= counts.size()) fail(ErrorCode::domain, "critical count exceeds histogram capacity");
  ++counts[*critical];
}

void SpanningHistogram::merge(const SpanningHistogram& other) {
  if (side != other.side || model != other.model || sweep != other.sweep ||
      spanning != other.spanning || double_bits(param) != double_bits(other.param) ||
      seed != other.seed || counts.size() != other.counts.size())
    fail(ErrorCode::domain, "cannot merge histograms from different campaigns");
  for (std::size_t n = 0; n < counts.size(); ++n) counts[n] += other.counts[n];
  replicas += other.replicas;
  nonspanning += other.nonspanning;
  barriers.merge(other.barriers);
}

SpanningHistogram empty_histogram(int side, BarrierModel model, SweepKind sweep,
                                  SpanningMode spanning, double param, std::uint64_t seed) {
  const LatticeGeometry geometry(side);
  SpanningHistogram h;
  h.side = side;
  h.model = model;
  h.sweep = sweep;
  h.spanning = spanning;
  h.param = param;
  h.seed = seed;
  const std::size_t capacity = sweep == SweepKind::sites ? geometry.sites() : geometry.total_bonds();
  h.counts.assign(capacity + 1, 0);
  return h;
}

std::uint64_t replica_seed(const CampaignParams& params, std::uint64_t replica) {
  return derive_seed({params.seed, static_cast<std::uint64_t>(params.side), double_bits(params.param),
                      static_cast<std::uint64_t>(params.sweep), replica});
}

namespace {

void validate(const CampaignParams& params) {
  if (params.replicas < 1) fail(ErrorCode::domain, "campaign needs at least one replica");
  if (!(params.param >= 0.0 && params.param <= 1.0))
    fail(ErrorCode::domain, "control parameter must lie in [0, 1]");
  if (params.sweep == SweepKind::bonds && params.model != BarrierModel::joint_site_bond)
    fail(ErrorCode::domain, "bond sweeps are defined for the joint site-bond model only");
}

void run_range(const CampaignParams& params, std::uint64_t begin, std::uint64_t end,
               SpanningHistogram& out) {
  const LatticeGeometry geometry(params.side);
  Sweeper sweeper(geometry, params.spanning);
  BondGrid grid(geometry);
  BarrierAllocator allocator(geometry);
  for (std::uint64_t r = begin; r < end; ++r) {
    Rng rng(replica_seed(params, r));
    if (params.sweep == SweepKind::bonds) {
      out.record(sweeper.add_bonds(params.param, rng));
      continue;
    }
    if (params.model == BarrierModel::joint_site_bond) {
      out.barriers.add(fill_joint_bonds(grid, params.param, rng));
    } else {
      out.barriers.add(allocator.allocate(grid, params.model, params.param, rng).newly_closed);
    }
    out.record(sweeper.add_sites(grid, rng));
  }
}

}  // namespace

SpanningHistogram run_campaign(const CampaignParams& params) {
  validate(params);
  SpanningHistogram total =
      empty_histogram(params.side, params.model, params.sweep, params.spanning, params.param, params.seed);

  const std::uint64_t workers =
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(params.workers, params.replicas));
  const std::uint64_t begin = params.first_replica;
  const std::uint64_t end = begin + params.replicas;
  if (workers == 1) {
    run_range(params, begin, end, total);
    return total;
  }

  std::vector<SpanningHistogram> partial(workers, total);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    for (std::uint64_t w = 0; w < workers; ++w) {
      const std::uint64_t lo = begin + params.replicas * w / workers;
      const std::uint64_t hi = begin + params.replicas * (w + 1) / workers;
      threads.emplace_back([&, w, lo, hi] {
        try {
          run_range(params, lo, hi, partial[w]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& p : partial) total.merge(p);
  return total;
}

Snapshot snapshot_largest_cluster(const SnapshotParams& params) {
  if (!(params.chi >= 0.0 && params.chi <= 1.0)) fail(ErrorCode::domain, "chi must lie in [0, 1]");
  const LatticeGeometry geometry(params.side);
  Rng rng(derive_seed({params.seed, static_cast<std::uint64_t>(params.side), double_bits(params.param),
                       double_bits(params.chi), 0x736e6170ULL}));

  BondGrid grid(geometry);
  Snapshot snap;
  snap.side = params.side;
  if (params.model == BarrierModel::joint_site_bond) {
    snap.closed_bonds = fill_joint_bonds(grid, params.param, rng);
  } else {
    BarrierAllocator allocator(geometry);
    snap.closed_bonds = allocator.allocate(grid, params.model, params.param, rng).newly_closed;
  }

  const auto side = static_cast<std::uint32_t>(params.side);
  const auto n = static_cast<std::uint32_t>(geometry.sites());
  std::vector<std::uint8_t> occupied(n, 0);
  std::bernoulli_distribution occupy(params.chi);
  for (std::uint32_t s = 0; s < n; ++s) occupied[s] = occupy(rng) ? 1 : 0;

  UnionFind clusters(n);
  const auto h = grid.horizontal();
  const auto v = grid.vertical();
  for (std::uint32_t s = 0; s < n; ++s) {
    if (!occupied[s]) continue;
    const std::uint32_t i = s / side;
    const std::uint32_t j = s % side;
    if (i + 1 < side && occupied[s + side] && h[s]) clusters.unite(s, s + side);
    if (j + 1 < side && occupied[s + 1] && v[i * (side - 1) + j]) clusters.unite(s, s + 1);
  }

  std::uint32_t best_root = n;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (!occupied[s]) continue;
    ++snap.occupied;
    const std::uint32_t root = clusters.find(s);
    const std::size_t size = clusters.set_size(root);
    if (size > snap.largest_size) {
      snap.largest_size = size;
      best_root = root;
    }
  }

  snap.states.assign(n, SiteState::unoccupied);
  bool top = false, bottom = false, left = false, right = false;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (!occupied[s]) continue;
    if (clusters.find(s) != best_root) {
      snap.states[s] = SiteState::other_cluster;
      continue;
    }
    snap.states[s] = SiteState::largest_cluster;
    const std::uint32_t i = s / side;
    const std::uint32_t j = s % side;
    top |= j == 0;
    bottom |= j + 1 == side;
    left |= i == 0;
    right |= i + 1 == side;
  }
  snap.largest_spans = (top && bottom) || (params.spanning == SpanningMode::either && left && right);
  return snap;
}

}  // namespace bperc
