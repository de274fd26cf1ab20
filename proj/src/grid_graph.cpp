#include "mpcg/grid_graph.hpp"

#include <cmath>
#include <unordered_map>

namespace mpcg {

ImplicitGridGraph::ImplicitGridGraph(int d, Coord c, std::string rule_name, RuleFn rule)
    : d_(d), c_(c), name_(std::move(rule_name)), rule_(std::move(rule)),
      errors_(std::make_shared<std::size_t>(0)) {
  if (d < 2 || d > kMaxDim) throw ConfigError("graph", "dimension must lie in [2, 4]");
  if (c < 1) throw ConfigError("graph", "penetration c must be >= 1");
}

std::optional<double> ImplicitGridGraph::edge(const GridVertex& u, const GridVertex& v) const {
  if (u.id == v.id) return std::nullopt;
  const GridVertex& a = u.id < v.id ? u : v;
  const GridVertex& b = u.id < v.id ? v : u;
  auto w = rule_(a, b, d_);
  if (!w) return std::nullopt;
  const Coord dist = linf(a.x, b.x, d_);
  if (dist == 0 || dist > c_) {
    ++*errors_;
    return std::nullopt;
  }
  return w;
}

ImplicitGridGraph ImplicitGridGraph::with_dimension(int d) const {
  ImplicitGridGraph g = *this;
  g.d_ = d;
  return g;
}

ImplicitGridGraph linf_threshold(int d, Coord c) {
  return ImplicitGridGraph(d, c, "linf_threshold",
                           [c](const GridVertex& u, const GridVertex& v, int dd) -> std::optional<double> {
                             if (linf(u.x, v.x, dd) <= c) return 1.0;
                             return std::nullopt;
                           });
}

ImplicitGridGraph euclid_threshold(int d, Coord c, double t) {
  const double t2 = t * t;
  return ImplicitGridGraph(d, c, "euclid_threshold",
                           [t2](const GridVertex& u, const GridVertex& v, int dd) -> std::optional<double> {
                             const auto sq = static_cast<double>(sq_dist(u.x, v.x, dd));
                             if (sq <= t2) return std::sqrt(sq);
                             return std::nullopt;
                           });
}

namespace {
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

ImplicitGridGraph hashed_weight(int d, Coord c) {
  return ImplicitGridGraph(d, c, "hashed_weight",
                           [c](const GridVertex& u, const GridVertex& v, int dd) -> std::optional<double> {
                             if (linf(u.x, v.x, dd) > c) return std::nullopt;
                             const auto h = mix(mix(static_cast<std::uint64_t>(u.id)) ^
                                                static_cast<std::uint64_t>(v.id));
                             return static_cast<double>(h >> 11) / 9007199254740992.0;
                           });
}

ImplicitGridGraph make_rule(const std::string& name, int d, Coord c, double param) {
  if (name == "linf_threshold") return linf_threshold(d, c);
  if (name == "euclid_threshold") return euclid_threshold(d, c, param > 0 ? param : static_cast<double>(c));
  if (name == "hashed_weight") return hashed_weight(d, c);
  throw ConfigError("graph", "unknown edge rule '" + name + "'");
}

void lift_dimension(std::vector<GridVertex>& vs) {
  for (auto& v : vs) v.x[2] = 0;
}

Coord floor_div(Coord a, Coord b) {
  Coord q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

namespace {

struct CellHash {
  std::size_t operator()(const Coords& k) const {
    std::uint64_t h = 0x12345;
    for (auto v : k) h = mix(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

std::vector<LocalEdge> materialize_edges(const std::vector<GridVertex>& vs, const ImplicitGridGraph& g,
                                         const std::function<bool(std::size_t, std::size_t)>& keep) {
  const int d = g.d();
  const Coord c = g.c();
  std::unordered_map<Coords, std::vector<std::uint32_t>, CellHash> cells;
  std::vector<Coords> cell_of(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    Coords k{};
    for (int j = 0; j < d; ++j) k[j] = floor_div(vs[i].x[j], c);
    cell_of[i] = k;
    cells[k].push_back(static_cast<std::uint32_t>(i));
  }
  int offsets = 1;
  for (int j = 0; j < d; ++j) offsets *= 3;

  std::vector<LocalEdge> edges;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (int o = 0; o < offsets; ++o) {
      Coords k = cell_of[i];
      int code = o;
      for (int j = 0; j < d; ++j) {
        k[j] += code % 3 - 1;
        code /= 3;
      }
      auto it = cells.find(k);
      if (it == cells.end()) continue;
      for (auto j : it->second) {
        if (j <= i) continue;
        if (keep && !keep(i, j)) continue;
        if (auto w = g.edge(vs[i], vs[j]))
          edges.push_back(LocalEdge{EdgeKey::make(*w, vs[i].id, vs[j].id), static_cast<std::uint32_t>(i), j});
      }
    }
  }
  return edges;
}

std::vector<std::size_t> kruskal(std::size_t n_vertices, const std::vector<LocalEdge>& edges) {
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return edges[a].key < edges[b].key; });
  UnionFind uf(n_vertices);
  std::vector<std::size_t> picked;
  for (auto e : order)
    if (uf.unite(edges[e].u, edges[e].v)) picked.push_back(e);
  return picked;
}

}  // namespace mpcg
