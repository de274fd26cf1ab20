#pragma once

#include "mpcg/connect.hpp"

#include <vector>

namespace mpcg {

// Levels are nested integer lattices. Level i stores cell indices in units
// of G^(i-1); two level-i vertices are adjacent iff their index distance is
// at most c_growth, i.e. l_i = c_growth * G^(i-1) in input units, and the
// sketch cell at level i is one level-(i+1) unit, G^i.
struct EmstPlan {
  double rho = 0.0;           // requested approximation
  double rho_internal = 0.0;  // rho / 2
  Coord c_growth = 0;
  Coord G = 0;  // lattice refinement per level, floor(c * min(rho', 1) / sqrt d)
};

/// c_growth = max(2, floor(s^(1/d^3)), smallest c giving G >= 2), unless
/// `c_override` > 0. Throws ConfigError when G < 2.
EmstPlan plan_emst(int d, std::size_t s, double rho, Coord c_override = 0);

struct EmstParams {
  double rho = 0.5;
  Coord c_override = 0;
  SeparatorConfig separator;
  std::size_t max_super_rounds = 64;
};

struct EmstEdge {
  VertexId a = 0;  // original point ids, a < b
  VertexId b = 0;
  double w = 0.0;  // Euclidean distance between the original points
  std::size_t level = 0;
};

struct EmstLevel {
  std::size_t level = 0;
  double unit = 1.0;       // lattice unit in input coordinates
  double threshold = 0.0;  // l_i in input coordinates
  std::size_t vertices = 0;
  std::size_t msf_edges = 0;
  std::size_t added = 0;
  std::size_t separator_size = 0;
  std::size_t rounds = 0;  // MPC rounds spent in this super round
};

struct EmstResult {
  EmstPlan plan;
  std::vector<EmstEdge> edges;  // sorted by (a, b)
  double total_weight = 0.0;
  std::size_t super_rounds = 0;
  std::size_t rounds = 0;
  std::vector<EmstLevel> levels;
};

/// Round graph over level vertices: x holds lattice indices, payload[0] the
/// component id from the previous level, id the represented point.
ImplicitGridGraph emst_round_graph(int d, Coord c, double unit);

/// One vertex per non-empty cell of side G (in current lattice units): the
/// minimum-pt vertex of the cell, re-indexed to the coarser lattice, with
/// its current component id (payload[1]) promoted to payload[0].
Dist<GridVertex> sketch_stage(Cluster& cl, Dist<GridVertex> vs, int d, Coord G);

/// Pairs each vertex with its component label (matched by id) and stores
/// the label in payload[1].
Dist<GridVertex> attach_labels(Cluster& cl, const Dist<GridVertex>& vs, const Dist<VertexLabel>& labels);

/// Approximate Euclidean MST of integer points. Throws ConfigError on
/// duplicate points and RoundCapExceeded past max_super_rounds.
EmstResult approx_emst(Cluster& cl, const std::vector<Coords>& pts, int d, const EmstParams& params);

}  // namespace mpcg
