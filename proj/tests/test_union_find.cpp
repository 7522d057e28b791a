#include <doctest.h>

#include <queue>
#include <random>

#include "bperc/lattice.hpp"
#include "bperc/union_find.hpp"

using namespace bperc;

TEST_CASE("union-find basics") {
  UnionFind uf(10);
  CHECK(uf.find(5) == 5);
  CHECK(uf.unite(1, 2));
  CHECK(uf.unite(2, 3));
  CHECK(uf.find(1) == uf.find(3));
  CHECK_FALSE(uf.unite(3, 1));
  CHECK(uf.set_size(2) == 3);
  CHECK(uf.find(uf.find(3)) == uf.find(3));
  CHECK_FALSE(uf.connected(0, 1));
  uf.reset();
  CHECK_FALSE(uf.connected(1, 2));
  CHECK(uf.set_size(1) == 1);
}

namespace {

// Components over occupied sites joined by open bonds, by BFS.
std::vector<int> bfs_components(const LatticeGeometry& g, const std::vector<bool>& occ, const BondGrid& grid) {
  std::vector<int> comp(g.sites(), -1);
  int next = 0;
  for (std::uint32_t s = 0; s < g.sites(); ++s) {
    if (!occ[s] || comp[s] >= 0) continue;
    std::queue<std::uint32_t> q;
    q.push(s);
    comp[s] = next;
    while (!q.empty()) {
      const std::uint32_t u = q.front();
      q.pop();
      for (const auto& ib : incident_bonds(SiteLabel{u}, g)) {
        if (!ib.bond || !grid.is_open(*ib.bond)) continue;
        const int side = g.side();
        std::uint32_t v = u;
        switch (ib.direction) {
          case Direction::up: v = u - 1; break;
          case Direction::down: v = u + 1; break;
          case Direction::left: v = u - static_cast<std::uint32_t>(side); break;
          case Direction::right: v = u + static_cast<std::uint32_t>(side); break;
        }
        if (occ[v] && comp[v] < 0) {
          comp[v] = next;
          q.push(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

}  // namespace

TEST_CASE("union-find partition equals BFS components on random 6x6 instances") {
  const LatticeGeometry g(6);
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int instance = 0; instance < 1000; ++instance) {
    BondGrid grid(g);
    const double q = u(rng);
    for (auto& b : grid.horizontal_mut()) b = u(rng) < q ? 0 : 1;
    for (auto& b : grid.vertical_mut()) b = u(rng) < q ? 0 : 1;

    // Add sites in a random order and compare after every prefix.
    std::vector<std::uint32_t> order(g.sites());
    for (std::uint32_t k = 0; k < order.size(); ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> occ(g.sites(), false);
    UnionFind uf(g.sites());
    bool all_ok = true;
    for (std::uint32_t s : order) {
      occ[s] = true;
      for (const auto& ib : incident_bonds(SiteLabel{s}, g)) {
        if (!ib.bond || !grid.is_open(*ib.bond)) continue;
        std::uint32_t v = s;
        switch (ib.direction) {
          case Direction::up: v = s - 1; break;
          case Direction::down: v = s + 1; break;
          case Direction::left: v = s - 6; break;
          case Direction::right: v = s + 6; break;
        }
        if (occ[v]) uf.unite(s, v);
      }
      const auto comp = bfs_components(g, occ, grid);
      for (std::uint32_t a = 0; a < g.sites() && all_ok; ++a)
        for (std::uint32_t b = a + 1; b < g.sites(); ++b) {
          if (!occ[a] || !occ[b]) continue;
          if ((comp[a] == comp[b]) != uf.connected(a, b)) {
            all_ok = false;
            break;
          }
        }
    }
    REQUIRE(all_ok);
  }
}
