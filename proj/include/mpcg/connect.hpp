#pragma once

#include "mpcg/grid_graph.hpp"
#include "mpcg/mpc.hpp"
#include "mpcg/separator.hpp"

#include <vector>

namespace mpcg {

struct CompressedEdge {
  std::uint32_t u = 0, v = 0;        // local vertex indices (kept nodes)
  EdgeKey bottleneck;                // heaviest edge of the underlying path
  std::size_t bottleneck_edge = 0;   // index of that edge in the input forest
};

/// Prunes non-terminal leaves, then contracts degree-2 non-terminal
/// vertices. `forest` holds indices into `edges`; `terminal[i]` marks the
/// vertices that must survive (the separator vertices S_i).
std::vector<CompressedEdge> compress_forest(std::size_t n_vertices, const std::vector<LocalEdge>& edges,
                                            const std::vector<std::size_t>& forest,
                                            const std::vector<bool>& terminal);

struct VertexLabel {
  VertexId id = 0;
  VertexId label = 0;  // smallest vertex id in the component
};

struct ConnectOptions {
  bool msf = false;
  SeparatorConfig separator;
};

struct ConnectResult {
  Dist<VertexLabel> labels;
  Dist<EdgeKey> msf_edges;  // filled when options.msf
  PseudoSeparator separator;
  std::size_t merge_edges = 0;       // |union of E'_i| shipped to M0
  std::size_t max_extended = 0;      // largest |V_i + S_i|
  std::size_t rounds = 0;
};

/// Connected components (and optionally the minimum spanning forest under
/// the EdgeKey order) of an implicit grid graph, via a pseudo separator,
/// per-part extended subgraphs and one merge at M0.
ConnectResult connect_grid(Cluster& cl, const Dist<GridVertex>& vertices, const ImplicitGridGraph& g,
                           const ConnectOptions& opt = {});

inline ConnectResult cc_grid(Cluster& cl, const Dist<GridVertex>& vertices, const ImplicitGridGraph& g,
                             SeparatorConfig sep = {}) {
  return connect_grid(cl, vertices, g, ConnectOptions{false, sep});
}
inline ConnectResult msf_grid(Cluster& cl, const Dist<GridVertex>& vertices, const ImplicitGridGraph& g,
                              SeparatorConfig sep = {}) {
  return connect_grid(cl, vertices, g, ConnectOptions{true, sep});
}

}  // namespace mpcg
