#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

namespace bperc {

// Weighted quick-union with path compression. Roots store their negated
// cluster size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n, -1) {}

  std::size_t size() const noexcept { return parent_.size(); }

  void reset() { std::fill(parent_.begin(), parent_.end(), -1); }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] >= 0) root = static_cast<std::uint32_t>(parent_[root]);
    while (parent_[x] >= 0) {
      const auto next = static_cast<std::uint32_t>(parent_[x]);
      parent_[x] = static_cast<std::int32_t>(root);
      x = next;
    }
    return root;
  }

  // Returns false when a and b were already in the same set.
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (parent_[a] > parent_[b]) std::swap(a, b);  // a is the larger set
    parent_[a] += parent_[b];
    parent_[b] = static_cast<std::int32_t>(a);
    return true;
  }

  bool connected(std::uint32_t a, std::uint32_t b) { return find(a) == find(b); }

  std::uint32_t set_size(std::uint32_t x) { return static_cast<std::uint32_t>(-parent_[find(x)]); }

 private:
  std::vector<std::int32_t> parent_;
};

}  // namespace bperc
