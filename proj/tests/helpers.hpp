#pragma once

#include "mpcg/dataset.hpp"
#include "mpcg/mpc.hpp"
#include "mpcg/oracle.hpp"
#include "mpcg/separator.hpp"

namespace mpcg::th {

inline ClusterConfig config_for(std::size_t n, std::size_t s, std::uint64_t seed = 1, std::size_t m = 0) {
  ClusterConfig c;
  c.n_total = n;
  c.s = s;
  c.m = m;
  c.rng_seed = seed;
  return c;
}

inline std::vector<GridVertex> gen_vertices(const std::string& kind, int d, std::size_t n, Coord delta,
                                            std::uint64_t seed, std::size_t clusters = 4, double spread = 3.0) {
  GenerateParams p;
  p.kind = kind;
  p.d = d;
  p.n = n;
  p.delta = delta;
  p.seed = seed;
  p.clusters = clusters;
  p.spread = spread;
  return to_vertices(generate(p).pts);
}

}  // namespace mpcg::th
