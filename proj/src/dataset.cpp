#include "mpcg/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace mpcg {

namespace {

std::size_t lattice_side(std::size_t n, int d) {
  auto side = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 1.0 / d) - 1e-9));
  while (std::pow(static_cast<double>(side), d) < static_cast<double>(n)) ++side;
  return std::max<std::size_t>(side, 1);
}

/// The i-th point of a side^d lattice in lexicographic order.
Coords lattice_point(std::size_t i, std::size_t side, int d) {
  Coords p{};
  for (int j = d - 1; j >= 0; --j) {
    p[j] = static_cast<Coord>(i % side);
    i /= side;
  }
  return p;
}

Coord clamp(Coord v, Coord lo, Coord hi) { return std::max(lo, std::min(hi, v)); }

}  // namespace

Dataset generate(const GenerateParams& p) {
  if (p.d < 2 || p.d > kMaxDim) throw ConfigError("generate", "d must lie in [2, 4]");
  Dataset ds;
  ds.d = p.d;
  ds.kind = p.kind;
  ds.seed = p.seed;
  std::mt19937_64 gen(p.seed);

  if (p.kind == "lattice-path") {
    for (std::size_t i = 0; i < p.n; ++i) {
      Coords c{};
      c[0] = static_cast<Coord>(i);
      ds.pts.push_back(c);
    }
  } else if (p.kind == "lattice-cube") {
    const auto side = lattice_side(p.n, p.d);
    for (std::size_t i = 0; i < p.n; ++i) ds.pts.push_back(lattice_point(i, side, p.d));
  } else if (p.kind == "lattice-two-clusters") {
    const std::size_t half = p.n / 2;
    const auto side = lattice_side(std::max<std::size_t>(p.n - half, 1), p.d);
    const Coord shift = static_cast<Coord>(side) - 1 + p.gap;
    for (std::size_t i = 0; i < p.n; ++i) {
      const bool second = i >= half;
      Coords c = lattice_point(second ? i - half : i, side, p.d);
      if (second) c[0] += shift;
      ds.pts.push_back(c);
    }
  } else if (p.kind == "uniform" || p.kind == "clustered") {
    double room = 1.0;
    for (int j = 0; j < p.d; ++j) room *= static_cast<double>(p.delta + 1);
    if (room < 2.0 * static_cast<double>(p.n)) throw ConfigError("generate", "delta too small for n distinct points");
    std::uniform_int_distribution<Coord> uni(0, p.delta);
    std::vector<Coords> centers;
    for (std::size_t k = 0; k < std::max<std::size_t>(p.clusters, 1); ++k) {
      Coords c{};
      for (int j = 0; j < p.d; ++j) c[j] = uni(gen);
      centers.push_back(c);
    }
    std::normal_distribution<double> noise(0.0, p.spread);
    std::uniform_int_distribution<std::size_t> which(0, centers.size() - 1);
    std::set<Coords> seen;
    const std::size_t max_tries = 100 * p.n + 1000;
    for (std::size_t tries = 0; ds.pts.size() < p.n; ++tries) {
      if (tries > max_tries) throw ConfigError("generate", "could not draw enough distinct points");
      Coords c{};
      if (p.kind == "uniform") {
        for (int j = 0; j < p.d; ++j) c[j] = uni(gen);
      } else {
        const auto& ctr = centers[which(gen)];
        for (int j = 0; j < p.d; ++j)
          c[j] = clamp(ctr[j] + static_cast<Coord>(std::llround(noise(gen))), 0, p.delta);
      }
      if (seen.insert(c).second) ds.pts.push_back(c);
    }
  } else {
    throw ConfigError("generate", "unknown dataset kind '" + p.kind + "'");
  }
  for (const auto& c : ds.pts)
    for (int j = 0; j < p.d; ++j) ds.delta = std::max(ds.delta, c[j]);
  if (p.kind == "uniform" || p.kind == "clustered") ds.delta = std::max(ds.delta, p.delta);
  return ds;
}

Dataset read_points(std::istream& in) {
  Dataset ds;
  std::size_t n = 0;
  if (!(in >> ds.d >> n >> ds.delta)) throw ConfigError("points", "bad header, expected 'd n delta'");
  if (ds.d < 2 || ds.d > kMaxDim) throw ConfigError("points", "d must lie in [2, 4]");
  ds.pts.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < ds.d; ++j) {
      if (!(in >> ds.pts[i][j])) throw ConfigError("points", "truncated at row " + std::to_string(i));
      if (ds.pts[i][j] < 0 || ds.pts[i][j] > ds.delta)
        throw ConfigError("points", "coordinate outside [0, delta] at row " + std::to_string(i));
    }
  return ds;
}

Dataset read_points_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("points", "cannot open " + path);
  return read_points(f);
}

void write_points(std::ostream& out, const Dataset& ds) {
  out << ds.d << ' ' << ds.pts.size() << ' ' << ds.delta << '\n';
  for (const auto& p : ds.pts) {
    for (int j = 0; j < ds.d; ++j) out << (j ? " " : "") << p[j];
    out << '\n';
  }
}

GraphInput read_graph(std::istream& in) {
  GraphInput g;
  std::size_t n = 0;
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("graph", "missing header");
  std::istringstream hs(header);
  if (!(hs >> g.d >> g.c >> n)) throw ConfigError("graph", "bad header, expected 'd c n'");
  if (g.d < 2 || g.d > kMaxDim) throw ConfigError("graph", "d must lie in [2, 4]");
  std::string line;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw ConfigError("graph", "truncated at row " + std::to_string(i));
    std::istringstream ls(line);
    GridVertex v;
    v.id = static_cast<VertexId>(i);
    for (int j = 0; j < g.d; ++j)
      if (!(ls >> v.x[j]) || v.x[j] < 0) throw ConfigError("graph", "bad coordinates at row " + std::to_string(i));
    for (auto& w : v.payload)
      if (!(ls >> w)) break;
    g.vertices.push_back(v);
  }
  return g;
}

GraphInput read_graph_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("graph", "cannot open " + path);
  return read_graph(f);
}

void write_graph(std::ostream& out, const GraphInput& g) {
  out << g.d << ' ' << g.c << ' ' << g.vertices.size() << '\n';
  for (const auto& v : g.vertices) {
    for (int j = 0; j < g.d; ++j) out << (j ? " " : "") << v.x[j];
    out << '\n';
  }
}

std::vector<GridVertex> to_vertices(const std::vector<Coords>& pts) {
  std::vector<GridVertex> vs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    vs[i].id = static_cast<VertexId>(i);
    vs[i].x = pts[i];
  }
  return vs;
}

}  // namespace mpcg
