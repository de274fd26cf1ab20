#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

using namespace mpcg;
using th::config_for;
using th::gen_vertices;

namespace {

std::vector<Coords> lattice3(Coord side_a, Coord side_b, Coord side_c) {
  std::vector<Coords> pts;
  for (Coord a = 0; a < side_a; ++a)
    for (Coord b = 0; b < side_b; ++b)
      for (Coord c = 0; c < side_c; ++c) pts.push_back(Coords{a, b, c, 0});
  return pts;
}

void expect_coverage(const PseudoSeparator& sep, const std::vector<GridVertex>& vs) {
  std::multiset<VertexId> seen;
  std::map<std::int64_t, std::size_t> sizes;
  std::size_t s_count = 0;
  for (const auto& m : sep.layout)
    for (const auto& pv : m) {
      seen.insert(pv.v.id);
      if (pv.part == kSeparatorPart)
        ++s_count;
      else
        ++sizes[pv.part];
    }
  ASSERT_EQ(seen.size(), vs.size());
  EXPECT_EQ(std::set<VertexId>(seen.begin(), seen.end()).size(), vs.size());
  EXPECT_EQ(s_count, sep.separator_size);
  ASSERT_EQ(sizes.size(), sep.parts.size());
  for (const auto& p : sep.parts) EXPECT_EQ(sizes[p.id], p.size);
}

}  // namespace

TEST(FindDivider, FourByFourLatticeLifted) {
  std::vector<Coords> pts;
  for (Coord a = 0; a < 4; ++a)
    for (Coord b = 0; b < 4; ++b) pts.push_back(Coords{a, b, 0, 0});
  DividerParams p{1, 3, 4.0, 16.0};
  auto ch = find_divider_local(pts, p);
  ASSERT_TRUE(ch);
  EXPECT_EQ(ch->divider.dim, 0);
  EXPECT_EQ(ch->divider.x, 1);
  EXPECT_EQ(ch->slab, 4u);
  EXPECT_EQ(ch->left, 4u);
  EXPECT_EQ(ch->right, 8u);
}

TEST(FindDivider, DegenerateSampleHasNoDivider) {
  std::vector<Coords> pts(40, Coords{5, 5, 5, 0});
  EXPECT_FALSE(find_divider_local(pts, DividerParams{1, 3, 8.0, 40.0}));
}

TEST(FindDivider, CountsMatchRescan) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto vs = gen_vertices("uniform", 3, 500, 60, seed);
    std::vector<Coords> pts;
    for (const auto& v : vs) pts.push_back(v.x);
    for (Coord c : {1, 2, 3}) {
      auto ch = find_divider_local(pts, DividerParams{c, 3, 12.0, 5000.0});
      ASSERT_TRUE(ch);
      std::size_t l = 0, s = 0, r = 0;
      for (const auto& q : pts) {
        const int side = ch->divider.side(q);
        (side < 0 ? l : side > 0 ? r : s)++;
      }
      EXPECT_EQ(l, ch->left);
      EXPECT_EQ(s, ch->slab);
      EXPECT_EQ(r, ch->right);
    }
  }
}

TEST(MultiPartition, SmallSampleIsNotSplit) {
  auto pts = lattice3(3, 3, 3);
  auto tree = local_multi_partition(pts, 100.0, DividerParams{1, 3, 8.0, 27.0}, 27.0);
  EXPECT_TRUE(tree.dividers().empty());
  EXPECT_EQ(tree.leaves, 1);
}

TEST(MultiPartition, LatticeLeavesAreBelowThreshold) {
  auto pts = lattice3(12, 12, 12);
  const double K = static_cast<double>(pts.size()) / 4.0;
  DividerParams p{1, 3, 8.0, 0.0};
  auto tree = local_multi_partition(pts, K, p, static_cast<double>(pts.size()));
  ASSERT_FALSE(tree.dividers().empty());
  // Replay the tree against the sample.
  std::vector<std::size_t> leaf_count(static_cast<std::size_t>(tree.leaves));
  for (const auto& q : pts) {
    const int leaf = tree.classify(q);
    if (leaf >= 0) ++leaf_count[static_cast<std::size_t>(leaf)];
  }
  for (const auto& nd : tree.nodes)
    if (!nd.divider) {
      EXPECT_LT(static_cast<double>(nd.sample_count), K);
      EXPECT_EQ(leaf_count[static_cast<std::size_t>(nd.leaf)], nd.sample_count);
    } else {
      const auto& l = tree.nodes[static_cast<std::size_t>(nd.left)];
      const auto& r = tree.nodes[static_cast<std::size_t>(nd.right)];
      const double floor_side = static_cast<double>(nd.sample_count) / (8.0 * 4.0);
      EXPECT_GE(static_cast<double>(l.sample_count), floor_side);
      EXPECT_GE(static_cast<double>(r.sample_count), floor_side);
      // Slab inside the node's box.
      EXPECT_GE(nd.divider->x, nd.box.lo[nd.divider->dim]);
      EXPECT_LE(nd.divider->x + nd.divider->width - 1, nd.box.hi[nd.divider->dim]);
    }
}

TEST(PartitionTree, SlabSwallowsEverything) {
  PartitionTree t;
  PartitionNode root;
  root.divider = CDivider{0, 0, 5};
  root.left = 1;
  root.right = 2;
  t.nodes = {root, PartitionNode{}, PartitionNode{}};
  t.nodes[1].leaf = 0;
  t.nodes[2].leaf = 1;
  for (Coord x = 0; x < 5; ++x) EXPECT_EQ(t.classify(Coords{x, 7, 7, 0}), -1);
  EXPECT_EQ(t.classify(Coords{-1, 0, 0, 0}), 0);
  EXPECT_EQ(t.classify(Coords{5, 0, 0, 0}), 1);
}

TEST(Separator, SmallInputIsOnePart) {
  auto vs = gen_vertices("uniform", 3, 50, 100, 1);
  Cluster cl(config_for(50, 64));
  auto sep = compute_pseudo_separator(cl, distribute_blocks(vs, cl.machines()), linf_threshold(3, 1));
  EXPECT_EQ(sep.separator_size, 0u);
  ASSERT_EQ(sep.parts.size(), 1u);
  EXPECT_EQ(sep.parts[0].size, 50u);
}

TEST(Separator, OneSuperRoundOnCubeLattice) {
  auto pts = lattice3(20, 20, 20);
  auto vs = to_vertices(pts);
  const std::size_t s = 1000, n = vs.size();
  Cluster cl(config_for(n, s, 3));
  SuperRoundState st;
  auto blocks = distribute_blocks(vs, cl.machines());
  st.data.resize(cl.machines());
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (auto& v : blocks[i]) st.data[i].push_back(PlacedVertex{v, 0});
  ASSERT_TRUE(separator_super_round(cl, st, 3, 1));
  const double r = 2.0 * std::cbrt(1000.0);
  const double l = std::min(1.0 / 3.0, std::log(8.0) / std::log(r));
  std::map<std::int64_t, std::size_t> sizes;
  for (const auto& m : st.data)
    for (const auto& pv : m)
      if (pv.part != kSeparatorPart) ++sizes[pv.part];
  EXPECT_GT(sizes.size(), 1u);
  for (auto [id, sz] : sizes) EXPECT_LE(static_cast<double>(sz), 3.0 * n / std::pow(r, l));
  EXPECT_FALSE(cl.budget_violated());
}

TEST(Separator, CubeLatticeFullRun) {
  auto vs = to_vertices(lattice3(20, 20, 20));
  auto g = linf_threshold(3, 1);
  Cluster cl(config_for(vs.size(), 1000, 5));
  SeparatorConfig cfg;
  cfg.ceiling = CeilingMode::strict;
  auto sep = compute_pseudo_separator(cl, distribute_blocks(vs, cl.machines()), g, cfg);
  expect_coverage(sep, vs);
  EXPECT_EQ(cross_part_edges(sep, vs, g), 0u);
  for (const auto& p : sep.parts) EXPECT_LE(p.size, 8u * 4u * 1000u);
  EXPECT_FALSE(cl.budget_violated());
  for (const auto& d : sep.dividers) EXPECT_EQ(d.divider.width, 1);
}

TEST(Separator, StrictCeilingRejectsLargeC) {
  auto vs = gen_vertices("uniform", 3, 100, 50, 1);
  Cluster cl(config_for(100, 64));
  SeparatorConfig cfg;
  cfg.ceiling = CeilingMode::strict;
  EXPECT_THROW(compute_pseudo_separator(cl, distribute_blocks(vs, cl.machines()), linf_threshold(3, 3), cfg),
               ConfigError);
}

TEST(Separator, TwoClustersNeverShareAPart) {
  GenerateParams p;
  p.kind = "lattice-two-clusters";
  p.d = 3;
  p.n = 2000;
  p.gap = 4;
  auto vs = to_vertices(generate(p).pts);
  auto g = linf_threshold(3, 2);
  Cluster cl(config_for(vs.size(), 400, 2));
  auto sep = compute_pseudo_separator(cl, distribute_blocks(vs, cl.machines()), g);
  expect_coverage(sep, vs);
  EXPECT_EQ(cross_part_edges(sep, vs, g), 0u);
  std::map<std::int64_t, std::set<bool>> sides;
  for (const auto& m : sep.layout)
    for (const auto& pv : m)
      if (pv.part != kSeparatorPart) sides[pv.part].insert(pv.v.id >= 1000);
  for (const auto& [part, which] : sides) {
    if (which.size() < 2) continue;
    // A mixed part must hold both clusters entirely.
    std::size_t size = 0;
    for (const auto& q : sep.parts)
      if (q.id == part) size = q.size;
    EXPECT_EQ(size, vs.size());
  }
}

TEST(Separator, LiftedTwoDimensionalInputIsValid) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto vs = gen_vertices("uniform", 2, 3000, 120, seed);
    auto g = linf_threshold(2, 1);
    Cluster cl(config_for(vs.size(), 300, seed));
    auto sep = compute_pseudo_separator(cl, distribute_blocks(vs, cl.machines()), g);
    EXPECT_EQ(sep.d, 3);
    expect_coverage(sep, vs);
    EXPECT_EQ(cross_part_edges(sep, vs, g), 0u) << "seed " << seed;
    for (const auto& p : sep.parts) EXPECT_LE(p.size, 8u * 4u * 300u);
  }
}

TEST(Separator, DeterministicPerSeed) {
  auto vs = gen_vertices("uniform", 3, 4000, 40, 8);
  auto g = linf_threshold(3, 1);
  auto run = [&](std::uint64_t seed) {
    Cluster cl(config_for(vs.size(), 500, seed));
    auto sep = compute_pseudo_separator(cl, distribute_blocks(vs, cl.machines()), g);
    std::vector<std::pair<VertexId, std::int64_t>> out;
    for (const auto& m : sep.layout)
      for (const auto& pv : m) out.push_back({pv.v.id, pv.part});
    return std::make_pair(out, cl.rounds());
  };
  EXPECT_EQ(run(3), run(3));
}

TEST(Separator, SizeConstantStaysBounded) {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto vs = gen_vertices("uniform", 3, 3000, 30, seed);
    const std::size_t s = 400;
    Cluster cl(config_for(vs.size(), s, seed));
    auto sep = compute_pseudo_separator(cl, distribute_blocks(vs, cl.machines()), linf_threshold(3, 1));
    const double scale = 1.0 * vs.size() * std::log2(static_cast<double>(s)) / std::cbrt(static_cast<double>(s));
    worst = std::max(worst, static_cast<double>(sep.separator_size) / scale);
  }
  EXPECT_LT(worst, 16.0);
  RecordProperty("worst_separator_constant", std::to_string(worst));
}
