#include "mpcg/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <tuple>

namespace mpcg {

std::size_t dbscan_machines(std::size_t n, std::size_t s, int d, double budget_factor) {
  const std::size_t base = (n + s - 1) / s;
  const double nei = static_cast<double>(neighbor_offsets(d).size());
  const auto spread = static_cast<std::size_t>(std::ceil(4.0 * n * (nei + 1.0) / (budget_factor * s)));
  return std::max<std::size_t>({1, base, std::min(spread, s)});
}

std::vector<Coords> neighbor_offsets(int d) {
  const auto reach = static_cast<Coord>(std::floor(std::sqrt(static_cast<double>(d)))) + 1;
  std::vector<Coords> out;
  Coords o{};
  for (int j = 0; j < d; ++j) o[j] = -reach;
  while (true) {
    Coord gap = 0;
    bool zero = true;
    for (int j = 0; j < d; ++j) {
      const Coord a = std::max<Coord>(0, std::abs(o[j]) - 1);
      gap += a * a;
      zero = zero && o[j] == 0;
    }
    if (!zero && gap <= d) out.push_back(o);
    int j = 0;
    while (j < d && o[j] == reach) o[j++] = -reach;
    if (j == d) break;
    ++o[j];
  }
  return out;
}

Coords cell_of(const Coords& x, int d, double side) {
  Coords c{};
  for (int j = 0; j < d; ++j) c[j] = static_cast<Coord>(std::floor(static_cast<double>(x[j]) / side));
  return c;
}

namespace {

Coords shifted(const Coords& c, const Coords& o, int d) {
  Coords r = c;
  for (int j = 0; j < d; ++j) r[j] += o[j];
  return r;
}

bool within(const Coords& a, const Coords& b, int d, double eps) {
  return static_cast<double>(sq_dist(a, b, d)) <= eps * eps;
}

struct Edge {
  bool any = false;
  Coords first{}, last{};
  std::int64_t first_count = 0, last_count = 0;
  bool whole = false;  // the machine holds a single cell
};

}  // namespace

CellLayout assign_cells(Cluster& cl, Dist<CellPoint> points, int d, double eps) {
  if (!(eps > 0.0)) throw ConfigError("dbscan", "eps must be positive");
  CellLayout lay;
  lay.d = d;
  lay.side = eps / std::sqrt(static_cast<double>(d));
  for (auto& part : points)
    for (auto& p : part) p.cell = cell_of(p.x, d, lay.side);
  mpc_sort(cl, points, [](const CellPoint& a, const CellPoint& b) { return std::tie(a.cell, a.id) < std::tie(b.cell, b.id); },
           "dbscan.cells.sort");
  return index_cells(cl, std::move(points), d, eps);
}

CellLayout index_cells(Cluster& cl, Dist<CellPoint> points, int d, double eps) {
  CellLayout lay;
  lay.d = d;
  lay.side = eps / std::sqrt(static_cast<double>(d));
  const std::size_t m = cl.machines();
  std::vector<Edge> edges(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& v = points[i];
    if (v.empty()) continue;
    auto& e = edges[i];
    e.any = true;
    e.first = v.front().cell;
    e.last = v.back().cell;
    for (const auto& p : v) {
      e.first_count += p.cell == e.first;
      e.last_count += p.cell == e.last;
    }
    e.whole = e.first == e.last;
  }
  if (m > 1) edges = all_gather(cl, edges, "dbscan.cells.edges");

  lay.support.assign(m, {});
  for (std::size_t i = 0; i < m; ++i) {
    const auto& v = points[i];
    for (std::size_t a = 0; a < v.size();) {
      std::size_t b = a;
      while (b < v.size() && v[b].cell == v[a].cell) ++b;
      CellEntry ce{v[a].cell, static_cast<std::int64_t>(i), static_cast<std::int64_t>(i),
                   static_cast<std::int64_t>(b - a)};
      if (a == 0)
        for (std::size_t j = i; j-- > 0;) {
          if (!edges[j].any) continue;
          if (edges[j].last != ce.cell) break;
          ce.lo = static_cast<std::int64_t>(j);
          ce.size += edges[j].last_count;
          if (!edges[j].whole) break;
        }
      if (b == v.size())
        for (std::size_t j = i + 1; j < m; ++j) {
          if (!edges[j].any) continue;
          if (edges[j].first != ce.cell) break;
          ce.hi = static_cast<std::int64_t>(j);
          ce.size += edges[j].first_count;
          if (!edges[j].whole) break;
        }
      lay.support[i].push_back(ce);
      a = b;
    }
  }
  lay.points = std::move(points);
  return lay;
}

namespace {

struct Tuple4 {
  Coords cell{};
  std::int64_t machine = 0;
  Coords neighbor{};
};

struct Tuple2 {
  Coords cell{};
  std::int64_t lo = 0, hi = 0;
};

struct Range {
  bool any = false;
  Coords lo{}, hi{};
};

}  // namespace

Dist<NeighborLoc> neighbor_locations(Cluster& cl, const CellLayout& layout) {
  const std::size_t m = cl.machines();
  const int d = layout.d;
  const auto offsets = neighbor_offsets(d);

  Dist<Tuple4> tuples(m);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& ce : layout.support[i])
      for (const auto& o : offsets) tuples[i].push_back(Tuple4{ce.cell, static_cast<std::int64_t>(i), shifted(ce.cell, o, d)});
  mpc_sort(cl, tuples,
           [](const Tuple4& a, const Tuple4& b) {
             return std::tie(a.neighbor, a.cell, a.machine) < std::tie(b.neighbor, b.cell, b.machine);
           },
           "dbscan.nei.sort");

  std::vector<Range> ranges(m);
  for (std::size_t i = 0; i < m; ++i)
    if (!tuples[i].empty()) ranges[i] = Range{true, tuples[i].front().neighbor, tuples[i].back().neighbor};
  ranges = all_gather(cl, ranges, "dbscan.nei.ranges");

  // The first holder of each cell announces its storage interval.
  auto out2 = cl.make_outbox<Tuple2>();
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& ce : layout.support[i]) {
      if (ce.lo != static_cast<std::int64_t>(i)) continue;
      for (std::size_t j = 0; j < m; ++j)
        if (ranges[j].any && !(ce.cell < ranges[j].lo) && !(ranges[j].hi < ce.cell))
          out2[i][j].push_back(Tuple2{ce.cell, ce.lo, ce.hi});
    }
  auto locs = cl.exchange(out2, "dbscan.nei.locations");

  auto back = cl.make_outbox<NeighborLoc>();
  for (std::size_t j = 0; j < m; ++j) {
    std::map<Coords, std::pair<std::int64_t, std::int64_t>> known;
    for (const auto& t : locs[j]) known[t.cell] = {t.lo, t.hi};
    for (const auto& t : tuples[j]) {
      auto it = known.find(t.neighbor);
      if (it == known.end()) continue;
      back[j][static_cast<std::size_t>(t.machine)].push_back(NeighborLoc{t.cell, t.neighbor, it->second.first, it->second.second});
    }
  }
  return cl.exchange(back, "dbscan.nei.return");
}

namespace {

struct Query {
  VertexId id = 0;
  Coords x{};
  Coords cell{};
  std::int64_t origin = 0;
  std::int64_t index = 0;
};

struct Reply {
  std::int64_t index = 0;
  std::int64_t value = 0;
};

// Machines holding any non-empty neighbour of each support cell, plus the
// cell's own interval when `with_own`.
std::map<Coords, std::vector<std::size_t>> destinations(const CellLayout& layout, const Dist<NeighborLoc>& nei,
                                                        std::size_t i, bool with_own) {
  std::map<Coords, std::set<std::size_t>> acc;
  for (const auto& ce : layout.support[i]) {
    auto& s = acc[ce.cell];
    if (with_own)
      for (auto k = ce.lo; k <= ce.hi; ++k) s.insert(static_cast<std::size_t>(k));
  }
  for (const auto& nl : nei[i])
    for (auto k = nl.lo; k <= nl.hi; ++k) acc[nl.cell].insert(static_cast<std::size_t>(k));
  std::map<Coords, std::vector<std::size_t>> out;
  for (auto& [c, s] : acc) out[c] = std::vector<std::size_t>(s.begin(), s.end());
  return out;
}

}  // namespace

Flags label_core_points(Cluster& cl, const CellLayout& layout, const Dist<NeighborLoc>& nei, double eps,
                        std::size_t min_pts) {
  const std::size_t m = cl.machines();
  const int d = layout.d;
  Flags core(m);
  std::vector<std::vector<std::int64_t>> counts(m);
  auto out = cl.make_outbox<Query>();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& pts = layout.points[i];
    core[i].assign(pts.size(), 0);
    counts[i].assign(pts.size(), 0);
    std::map<Coords, std::int64_t> size;
    for (const auto& ce : layout.support[i]) size[ce.cell] = ce.size;
    const auto dest = destinations(layout, nei, i, false);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto sz = size.at(pts[k].cell);
      // Points sharing a cell are within eps of each other.
      counts[i][k] = sz;
      if (static_cast<std::size_t>(sz) >= min_pts) {
        core[i][k] = 1;
        continue;
      }
      for (auto j : dest.at(pts[k].cell))
        out[i][j].push_back(Query{pts[k].id, pts[k].x, pts[k].cell, static_cast<std::int64_t>(i), static_cast<std::int64_t>(k)});
    }
  }
  auto in = cl.exchange(out, "dbscan.core.query");
  auto replies = cl.make_outbox<Reply>();
  for (std::size_t j = 0; j < m; ++j)
    for (const auto& q : in[j]) {
      std::int64_t hits = 0;
      for (const auto& p : layout.points[j])
        if (p.cell != q.cell && within(p.x, q.x, d, eps)) ++hits;
      replies[j][static_cast<std::size_t>(q.origin)].push_back(Reply{q.index, hits});
    }
  auto back = cl.exchange(replies, "dbscan.core.reply");
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& r : back[i]) counts[i][static_cast<std::size_t>(r.index)] += r.value;
    for (std::size_t k = 0; k < counts[i].size(); ++k)
      if (static_cast<std::size_t>(counts[i][k]) >= min_pts) core[i][k] = 1;
  }
  return core;
}

namespace {

struct CorePoint {
  Coords cell{};  // fine cell of side rho*eps/(2 sqrt d)
  VertexId id = 0;
  std::int64_t origin = 0;
  std::int64_t index = 0;
  VertexId corner = 0;  // smallest core id in the fine cell
};

struct CornerEdge {
  bool any = false;
  Coords first{}, last{};
  VertexId first_id = 0;
  VertexId last_cell_first_id = 0;
};

struct LabelJoin {
  VertexId key = 0;
  int kind = 0;  // 0 label, 1 core point
  std::int64_t origin = 0;
  std::int64_t index = 0;
  VertexId label = 0;
};

}  // namespace

Labels primitive_clusters(Cluster& cl, const CellLayout& layout, const Flags& core, const DbscanParams& params,
                          std::size_t* separator_size) {
  if (!(params.rho > 0.0)) throw ConfigError("dbscan", "rho must be positive");
  const std::size_t m = cl.machines();
  const int d = layout.d;
  const double side = params.rho * params.eps / (2.0 * std::sqrt(static_cast<double>(d)));
  const double t = std::pow((1.0 + params.rho / 2.0) * 2.0 * std::sqrt(static_cast<double>(d)) / params.rho, 2.0) *
                   (1.0 + 1e-12);
  const auto c = static_cast<Coord>(std::floor(std::sqrt(t)));

  Dist<CorePoint> cps(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < layout.points[i].size(); ++k)
      if (core[i][k]) {
        const auto& p = layout.points[i][k];
        cps[i].push_back(CorePoint{cell_of(p.x, d, side), p.id, static_cast<std::int64_t>(i), static_cast<std::int64_t>(k), 0});
      }
  mpc_sort(cl, cps, [](const CorePoint& a, const CorePoint& b) { return std::tie(a.cell, a.id) < std::tie(b.cell, b.id); },
           "dbscan.primitive.sort");

  // Corner id of each fine cell; a cell can start on an earlier machine.
  std::vector<CornerEdge> edges(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& v = cps[i];
    for (std::size_t k = 0; k < v.size(); ++k) v[k].corner = (k > 0 && v[k - 1].cell == v[k].cell) ? v[k - 1].corner : v[k].id;
    if (v.empty()) continue;
    edges[i] = CornerEdge{true, v.front().cell, v.back().cell, v.front().id, v.back().corner};
  }
  if (m > 1) edges = all_gather(cl, edges, "dbscan.primitive.corners");
  Dist<GridVertex> corners(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& v = cps[i];
    if (v.empty()) continue;
    std::optional<VertexId> inherited;
    for (std::size_t j = i; j-- > 0;) {
      if (!edges[j].any) continue;
      if (edges[j].last != v.front().cell) break;
      inherited = edges[j].last_cell_first_id;
      if (edges[j].first != edges[j].last) break;
    }
    for (auto& p : v) {
      if (inherited && p.cell == v.front().cell) {
        p.corner = *inherited;
        continue;
      }
      if (p.corner == p.id) {
        GridVertex g;
        g.id = p.id;
        g.x = p.cell;
        corners[i].push_back(g);
      }
    }
  }

  const auto limit = t;
  ImplicitGridGraph g(d, c, "dbscan_corner_rule", [limit](const GridVertex& u, const GridVertex& v, int dim)
                          -> std::optional<double> {
    if (static_cast<double>(sq_dist(u.x, v.x, dim)) <= limit) return 1.0;
    return std::nullopt;
  });
  auto cc = cc_grid(cl, corners, g, params.separator);
  if (separator_size) *separator_size = cc.separator.separator_size;

  Dist<LabelJoin> join(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& l : cc.labels[i]) join[i].push_back(LabelJoin{l.id, 0, 0, 0, l.label});
    for (const auto& p : cps[i]) join[i].push_back(LabelJoin{p.corner, 1, p.origin, p.index, 0});
  }
  mpc_sort(cl, join, [](const LabelJoin& a, const LabelJoin& b) { return std::tie(a.key, a.kind) < std::tie(b.key, b.kind); },
           "dbscan.primitive.join");
  std::vector<std::optional<LabelJoin>> last_label(m);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& r : join[i])
      if (r.kind == 0) last_label[i] = r;
  if (m > 1) last_label = all_gather(cl, last_label, "dbscan.primitive.join.boundary");
  auto home = cl.make_outbox<Reply>();
  for (std::size_t i = 0; i < m; ++i) {
    std::optional<LabelJoin> cur;
    for (std::size_t j = i; j-- > 0;)
      if (last_label[j]) {
        cur = last_label[j];
        break;
      }
    for (const auto& r : join[i]) {
      if (r.kind == 0) {
        cur = r;
        continue;
      }
      if (!cur || cur->key != r.key) throw Error("dbscan", "core point without a corner label");
      home[i][static_cast<std::size_t>(r.origin)].push_back(Reply{r.index, cur->label});
    }
  }
  auto back = cl.exchange(home, "dbscan.primitive.return");
  Labels labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    labels[i].assign(layout.points[i].size(), -1);
    for (const auto& r : back[i]) labels[i][static_cast<std::size_t>(r.index)] = r.value;
  }
  return labels;
}

std::vector<std::vector<std::vector<std::int64_t>>> assign_noncore(Cluster& cl, const CellLayout& layout,
                                                                   const Dist<NeighborLoc>& nei, const Flags& core,
                                                                   const Labels& labels, double eps) {
  const std::size_t m = cl.machines();
  const int d = layout.d;
  std::vector<std::vector<std::vector<std::int64_t>>> out(m);
  auto queries = cl.make_outbox<Query>();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& pts = layout.points[i];
    out[i].assign(pts.size(), {});
    const auto dest = destinations(layout, nei, i, true);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (core[i][k]) {
        out[i][k] = {labels[i][k]};
        continue;
      }
      for (auto j : dest.at(pts[k].cell))
        queries[i][j].push_back(Query{pts[k].id, pts[k].x, pts[k].cell, static_cast<std::int64_t>(i), static_cast<std::int64_t>(k)});
    }
  }
  auto in = cl.exchange(queries, "dbscan.border.query");
  auto replies = cl.make_outbox<Reply>();
  for (std::size_t j = 0; j < m; ++j)
    for (const auto& q : in[j]) {
      std::set<std::int64_t> ids;
      for (std::size_t k = 0; k < layout.points[j].size(); ++k)
        if (core[j][k] && within(layout.points[j][k].x, q.x, d, eps)) ids.insert(labels[j][k]);
      for (auto id : ids) replies[j][static_cast<std::size_t>(q.origin)].push_back(Reply{q.index, id});
    }
  auto back = cl.exchange(replies, "dbscan.border.reply");
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& r : back[i]) out[i][static_cast<std::size_t>(r.index)].push_back(r.value);
    for (auto& ids : out[i]) {
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }
  }
  return out;
}

DbscanRun approx_dbscan(Cluster& cl, const std::vector<Coords>& pts, int d, const DbscanParams& params) {
  if (params.min_pts < 1) throw ConfigError("dbscan", "minPts must be at least 1");
  if (cl.machines() > cl.s()) throw ConfigError("dbscan", "requires m <= s");
  DbscanRun run;
  const std::size_t start = cl.rounds();
  std::vector<CellPoint> input(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) input[i] = CellPoint{static_cast<VertexId>(i), pts[i], {}};

  auto mark = cl.rounds();
  auto layout = assign_cells(cl, distribute_blocks(input, cl.machines()), d, params.eps);
  run.cell_rounds = cl.rounds() - mark;
  mark = cl.rounds();
  auto nei = neighbor_locations(cl, layout);
  run.neighbor_rounds = cl.rounds() - mark;
  mark = cl.rounds();
  auto core = label_core_points(cl, layout, nei, params.eps, params.min_pts);
  run.core_rounds = cl.rounds() - mark;
  mark = cl.rounds();
  auto labels = primitive_clusters(cl, layout, core, params, &run.separator_size);
  run.primitive_rounds = cl.rounds() - mark;
  mark = cl.rounds();
  auto clusters = assign_noncore(cl, layout, nei, core, labels, params.eps);
  run.noncore_rounds = cl.rounds() - mark;
  run.rounds = cl.rounds() - start;

  run.points.resize(pts.size());
  std::set<std::int64_t> distinct;
  for (std::size_t i = 0; i < layout.points.size(); ++i)
    for (std::size_t k = 0; k < layout.points[i].size(); ++k) {
      auto& r = run.points[static_cast<std::size_t>(layout.points[i][k].id)];
      r.id = layout.points[i][k].id;
      r.core = core[i][k] != 0;
      r.clusters = std::move(clusters[i][k]);
      if (params.single_label && r.clusters.size() > 1) r.clusters.resize(1);
      if (r.clusters.empty()) ++run.noise;
      if (r.core) distinct.insert(r.clusters.front());
    }
  run.n_clusters = distinct.size();
  return run;
}

}  // namespace mpcg
