#include "helpers.hpp"
#include "mpcg/emst.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

using namespace mpcg;
using th::config_for;

namespace {

std::vector<Coords> points_of(const std::vector<GridVertex>& vs) {
  std::vector<Coords> out;
  for (const auto& v : vs) out.push_back(v.x);
  return out;
}

GridVertex gv(VertexId id, Coord a, Coord b, std::int64_t comp, std::int64_t cid = 0) {
  GridVertex v;
  v.id = id;
  v.x = {a, b, 0, 0};
  v.payload = {comp, cid};
  return v;
}

std::vector<EdgeKey> as_keys(const EmstResult& r) {
  std::vector<EdgeKey> out;
  for (const auto& e : r.edges) out.push_back(EdgeKey::make(e.w, e.a, e.b));
  return out;
}

void expect_spanning_tree(const EmstResult& r, std::size_t n) {
  ASSERT_EQ(r.edges.size(), n - 1);
  UnionFind uf(n);
  for (const auto& e : r.edges) EXPECT_TRUE(uf.unite(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b)));
}

std::size_t s_near(std::size_t n) { return std::max<std::size_t>(16, static_cast<std::size_t>(std::pow(n, 0.9))); }

}  // namespace

TEST(EmstPlan, NinePointInstanceParameters) {
  auto p = plan_emst(2, 1024, std::sqrt(2.0), 4);
  EXPECT_EQ(p.c_growth, 4);
  EXPECT_EQ(p.G, 2);
  EXPECT_NEAR(p.rho_internal, std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(EmstPlan, DefaultGrowthMakesProgress) {
  for (int d : {2, 3})
    for (double rho : {0.5, 1.0}) {
      auto p = plan_emst(d, 900, rho);
      EXPECT_GE(p.G, 2);
      EXPECT_LE(static_cast<double>(p.G), p.c_growth * p.rho_internal / std::sqrt(d) + 1e-9);
    }
  EXPECT_THROW(plan_emst(3, 900, 0.5, 2), ConfigError);
  EXPECT_THROW(plan_emst(2, 900, 0.0), ConfigError);
}

TEST(EmstRoundGraph, RuleClauses) {
  auto g = emst_round_graph(2, 4, 2.0);
  EXPECT_EQ(g.edge(gv(0, 0, 0, 7), gv(1, 2, 2, 7)), 0.0);
  EXPECT_DOUBLE_EQ(*g.edge(gv(0, 0, 0, 7), gv(1, 3, 0, 8)), 6.0);
  EXPECT_FALSE(g.edge(gv(0, 0, 0, 7), gv(1, 3, 3, 8)));
}

TEST(EmstRoundGraph, MaterializedMatchesAllPairs) {
  auto vs = th::gen_vertices("uniform", 2, 300, 60, 4);
  for (auto& v : vs) v.payload[0] = v.id % 5;
  auto g = emst_round_graph(2, 5, 1.0);
  std::set<std::pair<VertexId, VertexId>> got, want;
  for (const auto& e : materialize_edges(vs, g)) got.insert({e.key.a, e.key.b});
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j)
      if (sq_dist(vs[i].x, vs[j].x, 2) <= 25) want.insert({vs[i].id, vs[j].id});
  EXPECT_EQ(got, want);
}

TEST(Sketch, SingletonAndSharedCell) {
  Cluster one(config_for(1, 16));
  auto s1 = flatten(sketch_stage(one, Dist<GridVertex>{{gv(3, 5, 5, 3, 9)}}, 2, 2));
  ASSERT_EQ(s1.size(), 1u);
  EXPECT_EQ(s1[0].id, 3);
  EXPECT_EQ(s1[0].x[0], 2);
  EXPECT_EQ(s1[0].payload[0], 9);

  Cluster two(config_for(4, 12, 1, 2));
  Dist<GridVertex> vs{{gv(8, 1, 1, 8, 40), gv(5, 0, 0, 5, 41)}, {gv(2, 9, 9, 2, 42), gv(6, 3, 1, 6, 43)}};
  auto out = flatten(sketch_stage(two, vs, 2, 2));
  ASSERT_EQ(out.size(), 3u);
  std::map<VertexId, std::int64_t> comp;
  for (const auto& v : out) comp[v.id] = v.payload[0];
  EXPECT_EQ(comp.count(8), 0u);
  EXPECT_EQ(comp[5], 41);
}

TEST(Sketch, CountMatchesDistinctCells) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto vs = th::gen_vertices("uniform", 3, 2000, 100, seed);
    Cluster cl(config_for(vs.size(), 200, seed));
    std::set<Coords> cells;
    for (const auto& v : vs) {
      Coords c{};
      for (int j = 0; j < 3; ++j) c[j] = floor_div(v.x[j], 3);
      cells.insert(c);
    }
    auto out = flatten(sketch_stage(cl, distribute_blocks(vs, cl.machines()), 3, 3));
    EXPECT_EQ(out.size(), cells.size());
    std::set<VertexId> ids;
    for (const auto& v : out) ids.insert(v.id);
    EXPECT_EQ(ids.size(), out.size());
    EXPECT_FALSE(cl.budget_violated());
  }
}

TEST(AttachLabels, JoinsById) {
  auto vs = th::gen_vertices("uniform", 2, 600, 100, 3);
  Cluster cl(config_for(vs.size(), 64, 2));
  Dist<VertexLabel> labels(cl.machines());
  for (std::size_t i = 0; i < vs.size(); ++i)
    labels[(i * 7) % cl.machines()].push_back(VertexLabel{vs[i].id, vs[i].id * 3 + 1});
  auto out = flatten(attach_labels(cl, distribute_blocks(vs, cl.machines()), labels));
  ASSERT_EQ(out.size(), vs.size());
  for (const auto& v : out) EXPECT_EQ(v.payload[1], v.id * 3 + 1);
}

TEST(ApproxEmst, TrivialSizes) {
  Cluster c1(config_for(1, 16));
  auto r1 = approx_emst(c1, {Coords{4, 4}}, 2, EmstParams{});
  EXPECT_TRUE(r1.edges.empty());
  EXPECT_EQ(r1.rounds, 0u);
  Cluster c2(config_for(2, 16));
  auto r2 = approx_emst(c2, {Coords{0, 0}, Coords{30, 40}}, 2, EmstParams{});
  ASSERT_EQ(r2.edges.size(), 1u);
  EXPECT_DOUBLE_EQ(r2.edges[0].w, 50.0);
}

TEST(ApproxEmst, RejectsDuplicatePoints) {
  Cluster cl(config_for(3, 16));
  EXPECT_THROW(approx_emst(cl, {Coords{1, 1}, Coords{2, 2}, Coords{1, 1}}, 2, EmstParams{}), ConfigError);
}

TEST(ApproxEmst, NinePointInstanceShape) {
  std::vector<Coords> pts{{1, 1}, {2, 3}, {3, 1}, {9, 2}, {11, 1}, {1, 10}, {3, 12}, {13, 13}, {14, 11}};
  Cluster cl(config_for(pts.size(), 4, 1));
  EmstParams p;
  p.rho = std::sqrt(2.0);
  p.c_override = 4;
  auto r = approx_emst(cl, pts, 2, p);
  EXPECT_LE(r.super_rounds, 3u);
  EXPECT_EQ(r.edges.size(), 8u);
  ASSERT_FALSE(r.levels.empty());
  EXPECT_DOUBLE_EQ(r.levels[0].threshold, 4.0);
  if (r.levels.size() >= 3) {
    EXPECT_DOUBLE_EQ(r.levels[1].threshold, 8.0);
    EXPECT_DOUBLE_EQ(r.levels[2].threshold, 16.0);
  }
  expect_spanning_tree(r, pts.size());
}

TEST(ApproxEmst, LatticePathIsExact) {
  auto pts = points_of(th::gen_vertices("lattice-path", 2, 200, 0, 1));
  Cluster cl(config_for(pts.size(), 64));
  auto r = approx_emst(cl, pts, 2, EmstParams{});
  EXPECT_DOUBLE_EQ(r.total_weight, oracle::exact_mst(pts, 2).total_weight);
}

TEST(ApproxEmst, BoundsAgainstExactMst) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const int d = seed % 2 ? 2 : 3;
    const double rho = seed % 4 < 2 ? 0.5 : 1.0;
    const std::size_t n = 200 + 50 * seed;
    auto pts = points_of(th::gen_vertices(seed % 3 ? "uniform" : "clustered", d, n, 1 << 12, seed));
    Cluster cl(config_for(n, s_near(n), seed));
    EmstParams p;
    p.rho = rho;
    auto r = approx_emst(cl, pts, d, p);
    expect_spanning_tree(r, n);
    auto opt = oracle::exact_mst(pts, d);
    EXPECT_LE(r.total_weight, (1 + rho) * opt.total_weight) << "seed " << seed;
    auto tree = as_keys(r);
    for (const auto& e : opt.edges)
      EXPECT_LE(oracle::path_max(tree, e.a, e.b), (1 + rho) * e.w) << "seed " << seed;
  }
}

TEST(ApproxEmst, SameCellPointsAreConnectedAfterEachLevel) {
  auto pts = points_of(th::gen_vertices("clustered", 2, 800, 1 << 10, 6));
  Cluster cl(config_for(pts.size(), s_near(pts.size()), 6));
  auto r = approx_emst(cl, pts, 2, EmstParams{});
  Coord side = 1;
  for (std::size_t lvl = 1; lvl <= r.super_rounds; ++lvl) {
    side *= r.plan.G;
    UnionFind uf(pts.size());
    for (const auto& e : r.edges)
      if (e.level <= lvl) uf.unite(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b));
    std::map<std::pair<Coord, Coord>, std::size_t> rep;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto [it, fresh] = rep.try_emplace({floor_div(pts[i][0], side), floor_div(pts[i][1], side)}, i);
      if (!fresh) EXPECT_EQ(uf.find(i), uf.find(it->second)) << "level " << lvl;
    }
  }
}

TEST(ApproxEmst, DeterministicPerSeed) {
  auto pts = points_of(th::gen_vertices("uniform", 3, 500, 1 << 10, 2));
  auto run = [&] {
    Cluster cl(config_for(pts.size(), s_near(pts.size()), 9));
    auto r = approx_emst(cl, pts, 3, EmstParams{});
    return std::make_pair(as_keys(r), r.rounds);
  };
  EXPECT_EQ(run(), run());
}
