#pragma once

#include "mpcg/common.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mpcg {

/// A vertex of an implicit grid graph. `payload` carries the O(1) extra
/// words some edge rules read (EMST keeps its component id there).
struct GridVertex {
  VertexId id = 0;
  Coords x{};
  std::array<std::int64_t, 2> payload{};
};

/// Edge formation rule: weight when (u, v) is an edge, nullopt otherwise.
/// The rule is always called with u.id < v.id.
using RuleFn = std::function<std::optional<double>(const GridVertex& u, const GridVertex& v, int d)>;

/// An implicit (d, c)-grid graph minus its vertex set. Edges are never
/// stored; `edge` recomputes them from endpoint data. A raw rule that
/// claims an edge between vertices at L-infinity distance 0 or > c is
/// clipped and counted in `rule_errors`.
class ImplicitGridGraph {
 public:
  ImplicitGridGraph(int d, Coord c, std::string rule_name, RuleFn rule);

  int d() const { return d_; }
  Coord c() const { return c_; }
  const std::string& rule_name() const { return name_; }
  std::size_t rule_errors() const { return *errors_; }

  std::optional<double> edge(const GridVertex& u, const GridVertex& v) const;

  /// Same rule viewed in dimension `d` (used after lifting 2-D input).
  ImplicitGridGraph with_dimension(int d) const;

 private:
  int d_;
  Coord c_;
  std::string name_;
  RuleFn rule_;
  std::shared_ptr<std::size_t> errors_;
};

/// Built-in rules.
ImplicitGridGraph linf_threshold(int d, Coord c);
/// Edge iff squared Euclidean distance <= t^2; weight is the distance.
ImplicitGridGraph euclid_threshold(int d, Coord c, double t);
/// Edge iff L-infinity distance <= c; weight is a hash of the endpoint ids,
/// so distinct pairs get (almost surely) distinct weights.
ImplicitGridGraph hashed_weight(int d, Coord c);
/// By name: linf_threshold, euclid_threshold (param = t), hashed_weight.
ImplicitGridGraph make_rule(const std::string& name, int d, Coord c, double param = 0.0);

/// Adds a zero third coordinate to 2-D vertices.
void lift_dimension(std::vector<GridVertex>& vs);

Coord floor_div(Coord a, Coord b);

struct LocalEdge {
  EdgeKey key;
  std::uint32_t u = 0;  // local indices into the vertex vector
  std::uint32_t v = 0;
};

/// All rule edges among `vs`, found by bucketing into cells of side c and
/// testing the 3^d neighboring cells. `keep(i, j)` may veto a pair before
/// the rule is evaluated.
std::vector<LocalEdge> materialize_edges(const std::vector<GridVertex>& vs, const ImplicitGridGraph& g,
                                         const std::function<bool(std::size_t, std::size_t)>& keep = {});

/// Kruskal under the EdgeKey order. Returns indices into `edges`.
std::vector<std::size_t> kruskal(std::size_t n_vertices, const std::vector<LocalEdge>& edges);

}  // namespace mpcg
