#pragma once

#include "mpcg/connect.hpp"

#include <cstdint>
#include <vector>

namespace mpcg {

struct DbscanParams {
  double eps = 1.0;
  std::size_t min_pts = 3;
  double rho = 0.5;
  bool single_label = false;  // border points keep only their smallest cluster id
  SeparatorConfig separator;
};

/// Machines for a DBSCAN run: enough that the neighbour tuples of one
/// machine's cells fill at most a quarter of its round budget, capped at s
/// and never fewer than ceil(n/s).
std::size_t dbscan_machines(std::size_t n, std::size_t s, int d, double budget_factor = 8.0);

/// Offsets o != 0 whose cells lie within eps of the origin cell when the
/// cell side is eps/sqrt(d): sum_j max(0, |o_j| - 1)^2 <= d.
std::vector<Coords> neighbor_offsets(int d);

Coords cell_of(const Coords& x, int d, double side);

struct CellPoint {
  VertexId id = 0;
  Coords x{};
  Coords cell{};
};

struct CellEntry {
  Coords cell{};
  std::int64_t lo = 0;  // storage interval, inclusive machine ids
  std::int64_t hi = 0;
  std::int64_t size = 0;
};

struct CellLayout {
  int d = 0;
  double side = 0.0;
  Dist<CellPoint> points;    // sorted by (cell, id)
  Dist<CellEntry> support;   // per machine, its support cells in order
};

/// Sorts points by cell and works out every cell's storage interval and
/// size.
CellLayout assign_cells(Cluster& cl, Dist<CellPoint> points, int d, double eps);
/// The directory step alone, for points already sorted by (cell, id) with
/// their cells filled in.
CellLayout index_cells(Cluster& cl, Dist<CellPoint> points, int d, double eps);

struct NeighborLoc {
  Coords cell{};      // a support cell of the holding machine
  Coords neighbor{};  // one of its non-empty neighbours
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/// Storage interval of every non-empty neighbour of every support cell, in
/// four super rounds (tuple sort, range all-gather, 2-tuple routing,
/// fill-and-return).
Dist<NeighborLoc> neighbor_locations(Cluster& cl, const CellLayout& layout);

using Flags = std::vector<std::vector<std::uint8_t>>;   // aligned with layout.points
using Labels = std::vector<std::vector<std::int64_t>>;  // aligned with layout.points

/// Core flags in exactly two communication rounds.
Flags label_core_points(Cluster& cl, const CellLayout& layout, const Dist<NeighborLoc>& nei, double eps,
                        std::size_t min_pts);

/// Component id (smallest core id of the primitive cluster) per core point,
/// -1 for non-core points.
Labels primitive_clusters(Cluster& cl, const CellLayout& layout, const Flags& core, const DbscanParams& params,
                          std::size_t* separator_size = nullptr);

/// Cluster ids of core points within eps, per non-core point, in two
/// communication rounds. Core points get their own label.
std::vector<std::vector<std::vector<std::int64_t>>> assign_noncore(Cluster& cl, const CellLayout& layout,
                                                                   const Dist<NeighborLoc>& nei, const Flags& core,
                                                                   const Labels& labels, double eps);

struct DbscanPointResult {
  VertexId id = 0;
  bool core = false;
  std::vector<std::int64_t> clusters;  // empty means noise
};

struct DbscanRun {
  std::vector<DbscanPointResult> points;  // indexed by point id
  std::size_t n_clusters = 0;
  std::size_t noise = 0;
  std::size_t rounds = 0;
  std::size_t cell_rounds = 0;
  std::size_t neighbor_rounds = 0;
  std::size_t core_rounds = 0;
  std::size_t primitive_rounds = 0;
  std::size_t noncore_rounds = 0;
  std::size_t separator_size = 0;
};

DbscanRun approx_dbscan(Cluster& cl, const std::vector<Coords>& pts, int d, const DbscanParams& params);

}  // namespace mpcg
