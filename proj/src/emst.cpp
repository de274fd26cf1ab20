#include "mpcg/emst.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace mpcg {

EmstPlan plan_emst(int d, std::size_t s, double rho, Coord c_override) {
  if (!(rho > 0.0)) throw ConfigError("emst", "rho must be positive");
  if (d < 1 || d > kMaxDim) throw ConfigError("emst", "unsupported dimension");
  EmstPlan p;
  p.rho = rho;
  p.rho_internal = rho / 2.0;
  const double shrink = std::min(p.rho_internal, 1.0) / std::sqrt(static_cast<double>(d));
  if (c_override > 0) {
    p.c_growth = c_override;
  } else {
    const auto root_c = static_cast<Coord>(std::floor(std::pow(static_cast<double>(s), 1.0 / (d * d * d)) + 1e-9));
    const auto progress_c = static_cast<Coord>(std::ceil(2.0 / shrink - 1e-9));
    p.c_growth = std::max<Coord>({2, root_c, progress_c});
  }
  p.G = static_cast<Coord>(std::floor(static_cast<double>(p.c_growth) * shrink + 1e-9));
  if (p.G < 2)
    throw ConfigError("emst", "c_growth=" + std::to_string(p.c_growth) +
                                  " makes no progress at this rho; raise rho, s or c_growth");
  return p;
}

ImplicitGridGraph emst_round_graph(int d, Coord c, double unit) {
  const auto c2 = c * c;
  return ImplicitGridGraph(d, c, "emst_round_rule", [c2, unit](const GridVertex& u, const GridVertex& v, int dim)
                               -> std::optional<double> {
    const auto sq = sq_dist(u.x, v.x, dim);
    if (sq > c2) return std::nullopt;
    if (u.payload[0] == v.payload[0]) return 0.0;
    return std::sqrt(static_cast<double>(sq)) * unit;
  });
}

namespace {

struct JoinRec {
  VertexId id = 0;
  int kind = 0;  // 0 label, 1 vertex
  GridVertex v;
  VertexId label = 0;
};

bool cell_less(const GridVertex& a, const GridVertex& b) {
  if (a.x != b.x) return a.x < b.x;
  return a.id < b.id;
}

}  // namespace

Dist<GridVertex> attach_labels(Cluster& cl, const Dist<GridVertex>& vs, const Dist<VertexLabel>& labels) {
  const std::size_t m = cl.machines();
  Dist<JoinRec> recs(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& l : labels[i]) recs[i].push_back(JoinRec{l.id, 0, GridVertex{}, l.label});
    for (const auto& v : vs[i]) recs[i].push_back(JoinRec{v.id, 1, v, 0});
  }
  mpc_sort(cl, recs, [](const JoinRec& a, const JoinRec& b) { return std::tie(a.id, a.kind) < std::tie(b.id, b.kind); },
           "emst.join.sort");
  // A label may sit at the end of an earlier machine than its vertex.
  std::vector<std::optional<JoinRec>> lasts(m);
  for (std::size_t i = 0; i < m; ++i)
    if (!recs[i].empty()) lasts[i] = recs[i].back();
  if (m > 1) lasts = all_gather(cl, lasts, "emst.join.boundary");
  Dist<GridVertex> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::optional<JoinRec> prev;
    for (std::size_t j = i; j-- > 0;)
      if (lasts[j]) {
        prev = lasts[j];
        break;
      }
    for (const auto& r : recs[i]) {
      if (r.kind == 1) {
        if (!prev || prev->kind != 0 || prev->id != r.id) throw Error("emst", "vertex without component label");
        GridVertex v = r.v;
        v.payload[1] = prev->label;
        out[i].push_back(v);
      }
      prev = r;
    }
  }
  return out;
}

Dist<GridVertex> sketch_stage(Cluster& cl, Dist<GridVertex> vs, int d, Coord G) {
  for (auto& part : vs)
    for (auto& v : part) {
      for (int j = 0; j < d; ++j) v.x[j] = floor_div(v.x[j], G);
      v.payload[0] = v.payload[1];
      v.payload[1] = 0;
    }
  mpc_sort(cl, vs, cell_less, "emst.sketch.sort");
  const std::size_t m = cl.machines();
  std::vector<std::optional<Coords>> last_cell(m);
  for (std::size_t i = 0; i < m; ++i)
    if (!vs[i].empty()) last_cell[i] = vs[i].back().x;
  if (m > 1) last_cell = all_gather(cl, last_cell, "emst.sketch.dedup");
  Dist<GridVertex> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::optional<Coords> prev;
    for (std::size_t j = i; j-- > 0;)
      if (last_cell[j]) {
        prev = last_cell[j];
        break;
      }
    for (const auto& v : vs[i]) {
      if (!prev || *prev != v.x) out[i].push_back(v);
      prev = v.x;
    }
  }
  return out;
}

EmstResult approx_emst(Cluster& cl, const std::vector<Coords>& pts, int d, const EmstParams& params) {
  EmstResult res;
  res.plan = plan_emst(d, cl.s(), params.rho, params.c_override);
  const std::size_t n = pts.size();
  const std::size_t start_rounds = cl.rounds();
  if (n <= 1) return res;
  if (std::set<Coords>(pts.begin(), pts.end()).size() != n) throw ConfigError("emst", "duplicate input points");

  const std::size_t m = cl.machines();
  std::vector<GridVertex> level1(n);
  for (std::size_t i = 0; i < n; ++i) {
    level1[i].id = static_cast<VertexId>(i);
    level1[i].x = pts[i];
    level1[i].payload = {static_cast<std::int64_t>(i), 0};
  }
  Dist<GridVertex> V = distribute_blocks(level1, m);
  Dist<EmstEdge> accumulated(m);
  std::size_t total = 0;
  double unit = 1.0;

  for (std::size_t level = 1; total < n - 1; ++level) {
    if (level > params.max_super_rounds) throw RoundCapExceeded("emst", "super round cap reached");
    const std::size_t before = cl.rounds();
    EmstLevel log;
    log.level = level;
    log.unit = unit;
    log.threshold = static_cast<double>(res.plan.c_growth) * unit;
    log.vertices = total_size(V);

    auto g = emst_round_graph(d, res.plan.c_growth, unit);
    auto msf = msf_grid(cl, V, g, params.separator);
    log.separator_size = msf.separator.separator_size;
    Dist<EmstEdge> added(m);
    for (std::size_t i = 0; i < m; ++i)
      for (const auto& e : msf.msf_edges[i]) {
        ++log.msf_edges;
        if (e.w == 0.0) continue;
        const auto a = static_cast<std::size_t>(e.a), b = static_cast<std::size_t>(e.b);
        added[i].push_back(EmstEdge{e.a, e.b, std::sqrt(static_cast<double>(sq_dist(pts[a], pts[b], d))), level});
      }
    log.added = count_to(cl, added, 0, "emst.count");
    total += log.added;
    for (std::size_t i = 0; i < m; ++i) accumulated[i].insert(accumulated[i].end(), added[i].begin(), added[i].end());
    if (total > n - 1) throw Error("emst", "more than n-1 tree edges");
    if (total < n - 1) {
      V = sketch_stage(cl, attach_labels(cl, V, msf.labels), d, res.plan.G);
      unit *= static_cast<double>(res.plan.G);
    }
    log.rounds = cl.rounds() - before;
    res.levels.push_back(log);
    res.super_rounds = level;
  }

  res.edges = flatten(accumulated);
  for (auto& e : res.edges)
    if (e.a > e.b) std::swap(e.a, e.b);
  std::sort(res.edges.begin(), res.edges.end(),
            [](const EmstEdge& x, const EmstEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  for (std::size_t i = 1; i < res.edges.size(); ++i)
    if (res.edges[i].a == res.edges[i - 1].a && res.edges[i].b == res.edges[i - 1].b)
      throw Error("emst", "duplicate tree edge");
  for (const auto& e : res.edges) res.total_weight += e.w;
  res.rounds = cl.rounds() - start_rounds;
  return res;
}

}  // namespace mpcg
