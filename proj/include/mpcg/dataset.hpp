#pragma once

#include "mpcg/common.hpp"
#include "mpcg/grid_graph.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mpcg {

struct Dataset {
  int d = 2;
  Coord delta = 0;  // coordinates lie in [0, delta]
  std::vector<Coords> pts;
  std::string kind = "file";
  std::uint64_t seed = 0;
};

struct GenerateParams {
  std::string kind = "uniform";  // uniform | clustered | lattice-path | lattice-two-clusters | lattice-cube
  int d = 2;
  std::size_t n = 100;
  Coord delta = 1000;
  std::uint64_t seed = 1;
  std::size_t clusters = 4;  // clustered: number of blobs
  double spread = 3.0;       // clustered: per-axis standard deviation
  Coord gap = 2;             // lattice-two-clusters: coordinate gap between the blocks
};

/// Deterministic per seed; points are distinct.
Dataset generate(const GenerateParams& p);

/// Point file: header "d n delta", then n rows of d integers.
Dataset read_points(std::istream& in);
Dataset read_points_file(const std::string& path);
void write_points(std::ostream& out, const Dataset& ds);

struct GraphInput {
  int d = 2;
  Coord c = 1;
  std::vector<GridVertex> vertices;
};

/// Graph file: header "d c n", then n rows of d integers and up to two
/// optional payload words. Vertex ids are row indices.
GraphInput read_graph(std::istream& in);
GraphInput read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const GraphInput& g);

/// Vertices with ids equal to point indices.
std::vector<GridVertex> to_vertices(const std::vector<Coords>& pts);

}  // namespace mpcg
