#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace mpcg {

/// Largest dimensionality the fixed-width point records support.
inline constexpr int kMaxDim = 4;

using Coord = std::int64_t;
using VertexId = std::int64_t;
using Coords = std::array<Coord, kMaxDim>;

/// Base class for every error raised by the library. `stage` names the
/// pipeline stage that failed so drivers can surface it.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};
class SamplingFailure : public Error {
 public:
  using Error::Error;
};
class RoundCapExceeded : public Error {
 public:
  using Error::Error;
};
class SeparatorOverflow : public Error {
 public:
  using Error::Error;
};
class MergeOverflow : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class OracleCapExceeded : public Error {
 public:
  using Error::Error;
};

/// Closed axis-parallel box, one [lo, hi] interval per dimension.
struct Box {
  int d = 0;
  Coords lo{};
  Coords hi{};

  bool contains(const Coords& p) const {
    for (int j = 0; j < d; ++j) {
      if (p[j] < lo[j] || p[j] > hi[j]) return false;
    }
    return true;
  }
  Box expanded(Coord by) const {
    Box b = *this;
    for (int j = 0; j < d; ++j) {
      b.lo[j] -= by;
      b.hi[j] += by;
    }
    return b;
  }
  friend bool operator==(const Box& a, const Box& b) {
    if (a.d != b.d) return false;
    for (int j = 0; j < a.d; ++j) {
      if (a.lo[j] != b.lo[j] || a.hi[j] != b.hi[j]) return false;
    }
    return true;
  }
};

/// Minimum bounding box of a non-empty coordinate set.
template <class Range, class Proj>
Box mbr_of(const Range& items, int d, Proj proj) {
  auto it = std::begin(items);
  if (it == std::end(items)) throw Error("mbr", "empty point set has no bounding box");
  Box b;
  b.d = d;
  const Coords& first = proj(*it);
  for (int j = 0; j < d; ++j) b.lo[j] = b.hi[j] = first[j];
  for (; it != std::end(items); ++it) {
    const Coords& p = proj(*it);
    for (int j = 0; j < d; ++j) {
      b.lo[j] = std::min(b.lo[j], p[j]);
      b.hi[j] = std::max(b.hi[j], p[j]);
    }
  }
  return b;
}

inline Box mbr(const std::vector<Coords>& pts, int d) {
  return mbr_of(pts, d, [](const Coords& c) -> const Coords& { return c; });
}

inline Coord linf(const Coords& a, const Coords& b, int d) {
  Coord m = 0;
  for (int j = 0; j < d; ++j) m = std::max(m, a[j] > b[j] ? a[j] - b[j] : b[j] - a[j]);
  return m;
}

inline std::int64_t sq_dist(const Coords& a, const Coords& b, int d) {
  std::int64_t s = 0;
  for (int j = 0; j < d; ++j) {
    const std::int64_t t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

/// Disjoint sets with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n = 0) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t size() const { return parent_.size(); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  /// Returns false when a and b were already joined.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// Total order on weighted edges: (weight, min endpoint, max endpoint).
/// Makes every minimum spanning forest unique.
struct EdgeKey {
  double w = 0.0;
  VertexId a = 0;  // a < b
  VertexId b = 0;

  static EdgeKey make(double w, VertexId u, VertexId v) {
    return u < v ? EdgeKey{w, u, v} : EdgeKey{w, v, u};
  }
  friend bool operator<(const EdgeKey& x, const EdgeKey& y) {
    return std::tie(x.w, x.a, x.b) < std::tie(y.w, y.a, y.b);
  }
  friend bool operator==(const EdgeKey& x, const EdgeKey& y) {
    return x.w == y.w && x.a == y.a && x.b == y.b;
  }
};

}  // namespace mpcg
