#pragma once

#include "mpcg/common.hpp"
#include "mpcg/grid_graph.hpp"

#include <optional>
#include <vector>

namespace mpcg::oracle {

inline constexpr std::size_t kDefaultCap = 5000;

struct MstResult {
  std::vector<EdgeKey> edges;  // endpoints are point indices
  double total_weight = 0.0;
};

/// Kruskal over all pairs, Euclidean weights, EdgeKey tie-break.
MstResult exact_mst(const std::vector<Coords>& pts, int d, std::size_t cap = kDefaultCap);
/// Dense O(n^2) Prim; an independent cross-check for exact_mst.
MstResult prim_mst(const std::vector<Coords>& pts, int d, std::size_t cap = kDefaultCap);

/// Component label per vertex (the smallest vertex id of its component),
/// by union-find over every rule edge. Pairs are enumerated by a sweep on
/// the first coordinate, independent of the grid bucketing.
std::vector<VertexId> exact_cc(const std::vector<GridVertex>& vs, const ImplicitGridGraph& g,
                               std::size_t cap = kDefaultCap);
/// Every rule edge, endpoints as vertex ids.
std::vector<EdgeKey> all_edges(const std::vector<GridVertex>& vs, const ImplicitGridGraph& g,
                               std::size_t cap = kDefaultCap);
/// Kruskal on all_edges; sorted by EdgeKey.
std::vector<EdgeKey> exact_msf(const std::vector<GridVertex>& vs, const ImplicitGridGraph& g,
                               std::size_t cap = kDefaultCap);

struct DbscanResult {
  std::vector<bool> core;
  std::vector<std::int64_t> primitive;           // smallest core id of the cluster, -1 for non-core
  std::vector<std::vector<std::int64_t>> clusters;  // per point, sorted; empty means noise
};

/// Components of the core graph with edges at distance <= radius, labelled
/// by their smallest core index; -1 for non-core points.
std::vector<std::int64_t> primitive_partition(const std::vector<Coords>& pts, int d, const std::vector<bool>& core,
                                              double radius, std::size_t cap = kDefaultCap);

/// Exact DBSCAN; ball membership is dist <= eps.
DbscanResult exact_dbscan(const std::vector<Coords>& pts, int d, double eps, std::size_t min_pts,
                          std::size_t cap = kDefaultCap);

struct PartitionCertificate {
  int dim = 0;
  Coord x = 0;
  std::vector<Coord> y, z;
  std::size_t left = 0, slab = 0, right = 0;
  double side_bound = 0.0;  // |V| / (4(d+1))
  double slab_bound = 0.0;  // 2c(1+d)^{1/d}|V|^{1-1/d}
  bool sides_ok = false;
  bool slab_ok = false;
};

/// Constructive divider with the side and slab bounds of a binary partition. Throws when
/// |V| <= s_effective or c > (|V|/(1+d))^{1/d} / 2.
PartitionCertificate binary_partition_divider(const std::vector<Coords>& pts, Coord c, int d, std::size_t s_effective);

struct EpsApproxReport {
  double worst = 0.0;
  Box worst_box;
  std::size_t boxes = 0;  // canonical boxes examined
  bool within = false;    // worst <= 1/r
};

/// Exhaustive discrepancy over every canonical axis-parallel box. The last
/// dimension is handled by a max/min subarray scan.
EpsApproxReport verify_eps_approximation(const std::vector<Coords>& ground, const std::vector<Coords>& sample,
                                         int d, double r, std::size_t cap = 200);

/// Number of canonical boxes for a ground set + sample.
std::size_t canonical_box_count(const std::vector<Coords>& ground, const std::vector<Coords>& sample, int d);

/// Largest edge weight on the tree path from u to v.
double path_max(const std::vector<EdgeKey>& tree, VertexId u, VertexId v);

/// All-pairs minimax distances on n <= 200 vertices (Floyd-style);
/// +inf for disconnected pairs.
std::vector<std::vector<double>> minimax_all_pairs(std::size_t n, const std::vector<EdgeKey>& edges);

/// True when every block of `fine` lies inside one block of `coarse`.
bool refines(const std::vector<std::int64_t>& fine, const std::vector<std::int64_t>& coarse);

}  // namespace mpcg::oracle
