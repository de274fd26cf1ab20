#include "mpcg/dataset.hpp"
#include "mpcg/oracle.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace mpcg;

namespace {

GenerateParams params(const std::string& kind, int d, std::size_t n, Coord delta, std::uint64_t seed) {
  GenerateParams p;
  p.kind = kind;
  p.d = d;
  p.n = n;
  p.delta = delta;
  p.seed = seed;
  return p;
}

}  // namespace

TEST(Generate, LatticePath) {
  const auto ds = generate(params("lattice-path", 2, 10, 0, 1));
  ASSERT_EQ(ds.pts.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(ds.pts[i], (Coords{static_cast<Coord>(i), 0, 0, 0}));
  EXPECT_EQ(ds.delta, 9);
}

TEST(Generate, TwoClustersSplitWhenGapExceedsC) {
  for (int d : {2, 3})
    for (Coord c : {1, 2, 3}) {
      auto p = params("lattice-two-clusters", d, 64, 0, 1);
      p.gap = c + 1;
      const auto vs = to_vertices(generate(p).pts);
      const auto labels = oracle::exact_cc(vs, linf_threshold(d, c));
      EXPECT_EQ(std::set<VertexId>(labels.begin(), labels.end()).size(), 2u) << "d=" << d << " c=" << c;
    }
}

TEST(Generate, DeterministicPerSeedAndDistinct) {
  for (const char* kind : {"uniform", "clustered"}) {
    auto p = params(kind, 3, 500, 200, 5);
    p.spread = 10.0;
    const auto a = generate(p), b = generate(p);
    p.seed = 6;
    const auto c = generate(p);
    EXPECT_EQ(a.pts, b.pts) << kind;
    EXPECT_NE(a.pts, c.pts) << kind;
    EXPECT_EQ(std::set<Coords>(a.pts.begin(), a.pts.end()).size(), a.pts.size()) << kind;
    for (const auto& x : a.pts)
      for (int j = 0; j < 3; ++j) {
        EXPECT_GE(x[j], 0);
        EXPECT_LE(x[j], 200);
      }
  }
}

TEST(Generate, RejectsBadParameters) {
  EXPECT_THROW(generate(params("uniform", 2, 100, 5, 1)), ConfigError);  // 36 cells for 100 points
  EXPECT_THROW(generate(params("spiral", 2, 10, 100, 1)), ConfigError);
  EXPECT_THROW(generate(params("uniform", 1, 10, 100, 1)), ConfigError);
}

TEST(PointFile, RoundTrip) {
  const auto ds = generate(params("uniform", 3, 50, 30, 2));
  std::stringstream ss;
  write_points(ss, ds);
  const auto back = read_points(ss);
  EXPECT_EQ(back.d, 3);
  EXPECT_EQ(back.delta, ds.delta);
  EXPECT_EQ(back.pts, ds.pts);
}

TEST(PointFile, RejectsMalformed) {
  std::istringstream bad_header("2 x 10\n");
  EXPECT_THROW(read_points(bad_header), ConfigError);
  std::istringstream short_rows("2 3 10\n1 2\n3 4\n");
  EXPECT_THROW(read_points(short_rows), ConfigError);
  std::istringstream outside("2 1 10\n11 0\n");
  EXPECT_THROW(read_points(outside), ConfigError);
}

TEST(GraphFile, RoundTripAndPayload) {
  std::istringstream in("2 3 3\n0 0\n4 5 7 9\n1 1 2\n");
  const auto g = read_graph(in);
  EXPECT_EQ(g.d, 2);
  EXPECT_EQ(g.c, 3);
  ASSERT_EQ(g.vertices.size(), 3u);
  EXPECT_EQ(g.vertices[1].id, 1);
  EXPECT_EQ(g.vertices[1].payload[0], 7);
  EXPECT_EQ(g.vertices[1].payload[1], 9);
  EXPECT_EQ(g.vertices[2].payload[0], 2);
  EXPECT_EQ(g.vertices[2].payload[1], 0);

  std::stringstream ss;
  write_graph(ss, g);
  const auto back = read_graph(ss);
  ASSERT_EQ(back.vertices.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back.vertices[i].x, g.vertices[i].x);
}

TEST(GraphFile, RejectsMalformed) {
  std::istringstream truncated("2 1 3\n0 0\n");
  EXPECT_THROW(read_graph(truncated), ConfigError);
  std::istringstream negative("2 1 1\n-1 0\n");
  EXPECT_THROW(read_graph(negative), ConfigError);
}
