#include "helpers.hpp"
#include "mpcg/connect.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

using namespace mpcg;
using th::config_for;
using th::gen_vertices;

namespace {

std::map<VertexId, VertexId> label_map(const ConnectResult& r) {
  std::map<VertexId, VertexId> out;
  for (const auto& m : r.labels)
    for (const auto& l : m) EXPECT_TRUE(out.emplace(l.id, l.label).second) << "duplicate label for " << l.id;
  return out;
}

std::vector<EdgeKey> sorted_edges(const ConnectResult& r) {
  auto e = flatten(r.msf_edges);
  std::sort(e.begin(), e.end());
  return e;
}

LocalEdge le(std::uint32_t u, std::uint32_t v, double w) { return LocalEdge{EdgeKey::make(w, u, v), u, v}; }

}  // namespace

TEST(CompressForest, PathThroughOneInnerVertex) {
  std::vector<LocalEdge> es{le(0, 1, 2.0), le(1, 2, 7.0)};
  auto out = compress_forest(3, es, {0, 1}, {true, false, true});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(std::min(out[0].u, out[0].v), 0u);
  EXPECT_EQ(std::max(out[0].u, out[0].v), 2u);
  EXPECT_EQ(out[0].bottleneck.w, 7.0);
  EXPECT_EQ(out[0].bottleneck_edge, 1u);
}

TEST(CompressForest, NoTerminalsPrunesEverything) {
  std::vector<LocalEdge> es{le(0, 1, 1), le(1, 2, 1), le(1, 3, 1)};
  EXPECT_TRUE(compress_forest(4, es, {0, 1, 2}, {false, false, false, false}).empty());
}

TEST(CompressForest, RandomTreesRespectStructure) {
  std::mt19937_64 g(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t n = 40;
    std::vector<LocalEdge> es;
    for (std::uint32_t v = 1; v < n; ++v)
      es.push_back(le(static_cast<std::uint32_t>(g() % v), v, static_cast<double>(g() % 1000)));
    std::vector<std::size_t> forest(es.size());
    std::iota(forest.begin(), forest.end(), std::size_t{0});
    std::vector<bool> term(n, false);
    std::vector<std::uint32_t> all(n);
    std::iota(all.begin(), all.end(), 0u);
    std::shuffle(all.begin(), all.end(), g);
    for (int k = 0; k < 5; ++k) term[all[k]] = true;
    auto out = compress_forest(n, es, forest, term);
    EXPECT_LE(out.size(), 10u);
    std::map<std::uint32_t, int> deg;
    for (const auto& ce : out) {
      ++deg[ce.u];
      ++deg[ce.v];
    }
    for (auto [v, dg] : deg)
      if (dg == 1) EXPECT_TRUE(term[v]);
    // The compressed forest connects exactly the terminals' tree.
    UnionFind uf(n);
    for (const auto& ce : out) EXPECT_TRUE(uf.unite(ce.u, ce.v));
    for (int k = 1; k < 5; ++k) EXPECT_EQ(uf.find(all[0]), uf.find(all[k]));
  }
}

TEST(CcGrid, CollinearPathIsOneComponent) {
  auto vs = gen_vertices("lattice-path", 3, 600, 0, 1);
  Cluster cl(config_for(vs.size(), 100));
  auto res = cc_grid(cl, distribute_blocks(vs, cl.machines()), linf_threshold(3, 1));
  auto labels = label_map(res);
  ASSERT_EQ(labels.size(), vs.size());
  for (auto [id, l] : labels) EXPECT_EQ(l, 0);
}

TEST(CcGrid, GapSplitsTwoClusters) {
  GenerateParams p;
  p.kind = "lattice-two-clusters";
  p.d = 2;
  p.n = 800;
  p.gap = 3;
  auto vs = to_vertices(generate(p).pts);
  Cluster cl(config_for(vs.size(), 400));
  auto res = cc_grid(cl, distribute_blocks(vs, cl.machines()), linf_threshold(2, 2));
  std::set<VertexId> distinct;
  for (auto [id, l] : label_map(res)) distinct.insert(l);
  EXPECT_EQ(distinct.size(), 2u);
}

TEST(CcGrid, MatchesUnionFindOracle) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const int d = seed % 2 ? 2 : 3;
    const Coord c = static_cast<Coord>(1 + seed % 3);
    auto vs = gen_vertices("clustered", d, 1200, 400, seed, 12, 4.0);
    auto g = linf_threshold(d, c);
    Cluster cl(config_for(vs.size(), 256, seed));
    ConnectResult res;
    try {
      res = cc_grid(cl, distribute_blocks(vs, cl.machines()), g);
    } catch (const SeparatorOverflow&) {
      continue;
    }
    ++checked;
    auto oracle = oracle::exact_cc(vs, g);
    auto got = label_map(res);
    for (std::size_t i = 0; i < vs.size(); ++i) ASSERT_EQ(got.at(vs[i].id), oracle[i]) << "seed " << seed;
    EXPECT_FALSE(cl.budget_violated()) << "seed " << seed;
  }
  EXPECT_GE(checked, 40);
}

TEST(MsfGrid, UnitPathWeight) {
  auto vs = gen_vertices("lattice-path", 2, 500, 0, 1);
  Cluster cl(config_for(vs.size(), 100));
  auto res = msf_grid(cl, distribute_blocks(vs, cl.machines()), linf_threshold(2, 1));
  auto e = sorted_edges(res);
  EXPECT_EQ(e.size(), 499u);
  double w = 0;
  for (const auto& k : e) w += k.w;
  EXPECT_EQ(w, 499.0);
}

TEST(MsfGrid, SinglePartIsLocalKruskal) {
  auto vs = gen_vertices("uniform", 2, 200, 30, 2);
  auto g = hashed_weight(2, 2);
  Cluster cl(config_for(vs.size(), 256, 1, 1));
  auto res = msf_grid(cl, distribute_blocks(vs, 1), g);
  EXPECT_EQ(res.separator.separator_size, 0u);
  auto es = materialize_edges(vs, g);
  std::vector<EdgeKey> want;
  for (auto f : kruskal(vs.size(), es)) want.push_back(es[f].key);
  std::sort(want.begin(), want.end());
  EXPECT_EQ(sorted_edges(res), want);
}

TEST(MsfGrid, MatchesKruskalOracle) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const int d = seed % 2 ? 2 : 3;
    const Coord c = static_cast<Coord>(1 + seed % 3);
    auto vs = gen_vertices("clustered", d, 1000, 400, seed + 100, 10, 4.0);
    auto g = hashed_weight(d, c);
    Cluster cl(config_for(vs.size(), 256, seed));
    ConnectResult res;
    try {
      res = msf_grid(cl, distribute_blocks(vs, cl.machines()), g);
    } catch (const SeparatorOverflow&) {
      continue;
    }
    ++checked;
    auto want = oracle::exact_msf(vs, g);
    ASSERT_EQ(sorted_edges(res), want) << "seed " << seed;
    std::set<VertexId> comps;
    for (auto [id, l] : label_map(res)) comps.insert(l);
    EXPECT_EQ(want.size(), vs.size() - comps.size());
  }
  EXPECT_GE(checked, 40);
}
