#include "mpcg/separator.hpp"

#include "mpcg/oracle.hpp"

#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace mpcg {

std::optional<DividerChoice> find_divider_local(const std::vector<Coords>& sample, const DividerParams& p) {
  const std::size_t n = sample.size();
  if (n < 3) return std::nullopt;
  const double N = static_cast<double>(n);
  const int d = p.d;
  const double side_min =
      std::max({1.0, N * (1.0 / (4.0 * d + 4.0) - 1.0 / p.r), N / (8.0 * (d + 1.0))});
  const double slab_max = 2.0 * static_cast<double>(p.c) * std::pow(1.0 + d, 1.0 / d) * N *
                          (std::pow(std::max(p.v_est, 1.0), -1.0 / d) + 1.0 / p.r);

  std::optional<DividerChoice> best;
  auto better = [](const DividerChoice& a, const DividerChoice& b) {
    // a.slab / min(a) < b.slab / min(b), cross-multiplied.
    const auto ma = std::min(a.left, a.right), mb = std::min(b.left, b.right);
    const auto lhs = a.slab * mb, rhs = b.slab * ma;
    if (lhs != rhs) return lhs < rhs;
    if (a.divider.dim != b.divider.dim) return a.divider.dim < b.divider.dim;
    return a.divider.x < b.divider.x;
  };
  std::vector<Coord> v(n);
  std::vector<Coord> cand;
  for (int j = 0; j < d; ++j) {
    for (std::size_t t = 0; t < n; ++t) v[t] = sample[t][j];
    std::sort(v.begin(), v.end());
    // Counts are piecewise constant in x with breaks at v+1 and v-c+1.
    cand.clear();
    for (auto val : v) {
      cand.push_back(val + 1);
      cand.push_back(val - p.c + 1);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (auto x : cand) {
      const auto left = static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
      const auto right = static_cast<std::size_t>(v.end() - std::lower_bound(v.begin(), v.end(), x + p.c));
      const std::size_t slab = n - left - right;
      if (static_cast<double>(left) < side_min || static_cast<double>(right) < side_min) continue;
      if (static_cast<double>(slab) > slab_max) continue;
      DividerChoice ch{CDivider{j, x, p.c}, left, slab, right};
      if (!best || better(ch, *best)) best = ch;
    }
  }
  return best;
}

int PartitionTree::classify(const Coords& p) const {
  int at = 0;
  while (true) {
    const auto& nd = nodes[static_cast<std::size_t>(at)];
    if (!nd.divider) return nd.leaf;
    const int s = nd.divider->side(p);
    if (s == 0) return -1;
    at = s < 0 ? nd.left : nd.right;
  }
}

std::vector<CDivider> PartitionTree::dividers() const {
  std::vector<CDivider> out;
  for (const auto& nd : nodes)
    if (nd.divider) out.push_back(*nd.divider);
  return out;
}

PartitionTree local_multi_partition(const std::vector<Coords>& sample, double K, const DividerParams& p,
                                    double v_total) {
  PartitionTree tree;
  if (sample.empty()) {
    tree.nodes.push_back(PartitionNode{});
    tree.nodes[0].leaf = tree.leaves++;
    return tree;
  }
  const double scale = v_total / static_cast<double>(sample.size());
  std::vector<std::vector<Coords>> members;
  auto add_node = [&](std::vector<Coords> pts) {
    PartitionNode nd;
    nd.box = mbr(pts, p.d);
    nd.sample_count = pts.size();
    tree.nodes.push_back(nd);
    members.push_back(std::move(pts));
    return static_cast<int>(tree.nodes.size() - 1);
  };
  add_node(sample);
  for (std::size_t at = 0; at < tree.nodes.size(); ++at) {
    if (static_cast<double>(tree.nodes[at].sample_count) < K) continue;
    DividerParams q = p;
    q.v_est = static_cast<double>(tree.nodes[at].sample_count) * scale;
    auto choice = find_divider_local(members[at], q);
    if (!choice) continue;
    std::vector<Coords> lhs, rhs;
    for (const auto& pt : members[at]) {
      const int s = choice->divider.side(pt);
      if (s < 0) lhs.push_back(pt);
      if (s > 0) rhs.push_back(pt);
    }
    members[at].clear();
    members[at].shrink_to_fit();
    const int l = add_node(std::move(lhs));
    const int r = add_node(std::move(rhs));
    tree.nodes[at].divider = choice->divider;
    tree.nodes[at].left = l;
    tree.nodes[at].right = r;
  }
  for (auto& nd : tree.nodes)
    if (!nd.divider) nd.leaf = tree.leaves++;
  return tree;
}

bool check_c_ceiling(Coord c, std::size_t s, int d, CeilingMode mode) {
  const double ceiling = std::pow(static_cast<double>(s), 1.0 / (d * d * d));
  if (static_cast<double>(c) <= ceiling + 1e-12) return true;
  if (mode == CeilingMode::strict)
    throw ConfigError("separator", "c=" + std::to_string(c) + " exceeds s^{1/d^3}=" + std::to_string(ceiling));
  return false;
}

namespace {

struct PartSummary {
  std::int64_t part = 0;
  std::int64_t count = 0;
  std::int64_t machine = 0;
  Box box;
};

struct ActiveInstance {
  std::int64_t part = 0;
  std::int64_t total = 0;
  std::int64_t first = 0;  // coordinator: machine holding the first vertex
  std::int64_t last = 0;
};

struct InstanceCount {
  std::int64_t part = 0;
  std::int64_t count = 0;
};

struct SampledPoint {
  std::int64_t part = 0;
  Coords x{};
};

struct TreeRecord {
  std::int64_t instance = 0;
  std::int32_t node = 0;
  std::int32_t dim = -1;  // -1 for a leaf
  Coord x = 0;
  std::int32_t left = -1, right = -1;
  std::int64_t leaf_part = 0;
  bool terminal = false;
  Box box;
};

/// Per-machine runs of non-separator parts.
std::vector<PartSummary> local_summaries(const std::vector<PlacedVertex>& local, std::size_t machine, int d) {
  std::vector<PartSummary> out;
  for (const auto& pv : local) {
    if (out.empty() || out.back().part != pv.part) {
      PartSummary ps;
      ps.part = pv.part;
      ps.machine = static_cast<std::int64_t>(machine);
      ps.box.d = d;
      ps.box.lo = ps.box.hi = pv.v.x;
      out.push_back(ps);
    }
    auto& ps = out.back();
    ++ps.count;
    for (int j = 0; j < d; ++j) {
      ps.box.lo[j] = std::min(ps.box.lo[j], pv.v.x[j]);
      ps.box.hi[j] = std::max(ps.box.hi[j], pv.v.x[j]);
    }
  }
  return out;
}

struct PlacedLess {
  bool operator()(const PlacedVertex& a, const PlacedVertex& b) const {
    return std::tie(a.part, a.v.id) < std::tie(b.part, b.v.id);
  }
};

}  // namespace

bool separator_super_round(Cluster& cl, SuperRoundState& st, int d, Coord c) {
  const std::size_t m = cl.machines();
  const std::size_t s = cl.s();

  // Instance sizes to M0, then the active table to everyone.
  Dist<PartSummary> summaries(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (auto& ps : local_summaries(st.data[i], i, d))
      if (ps.part != kSeparatorPart) summaries[i].push_back(ps);
  }
  auto at_m0 = gather_to(cl, summaries, 0, "sep.count");
  std::map<std::int64_t, ActiveInstance> totals;
  for (const auto& ps : at_m0) {
    auto [it, fresh] = totals.try_emplace(ps.part, ActiveInstance{ps.part, 0, ps.machine, ps.machine});
    it->second.total += ps.count;
    it->second.first = std::min(it->second.first, ps.machine);
    it->second.last = std::max(it->second.last, ps.machine);
  }
  std::vector<ActiveInstance> active;
  for (const auto& [part, inst] : totals) {
    if (static_cast<std::size_t>(inst.total) <= s) continue;
    if (std::binary_search(st.terminal.begin(), st.terminal.end(), part)) continue;
    active.push_back(inst);
  }
  auto table = broadcast(cl, 0, active, "sep.active")[0];
  if (table.empty()) return false;

  std::map<std::int64_t, ActiveInstance> by_part;
  for (const auto& a : table) by_part[a.part] = a;

  // Per-instance Bernoulli sampling, coordinated by each instance's first
  // machine; failed instances retry together.
  const std::size_t k =
      std::max<std::size_t>(1, static_cast<std::size_t>(cl.config().sample_beta * static_cast<double>(s)));
  std::set<std::int64_t> pending;
  for (const auto& a : table) pending.insert(a.part);
  std::map<std::int64_t, std::vector<Coords>> samples;
  for (std::size_t attempt = 1; !pending.empty(); ++attempt) {
    if (attempt > cl.config().sample_retry_cap)
      throw SamplingFailure("separator", "instance sample stayed outside [k, 3k]");
    Dist<SampledPoint> picked(m);
    auto counts = cl.make_outbox<InstanceCount>();
    for (std::size_t i = 0; i < m; ++i) {
      auto gen = cl.rng(i, 0x5e9a);
      std::map<std::int64_t, std::int64_t> local;
      for (const auto& pv : st.data[i]) {
        if (!pending.count(pv.part)) continue;
        const double p = std::min(1.0, 2.0 * static_cast<double>(k) / static_cast<double>(by_part[pv.part].total));
        std::bernoulli_distribution coin(p);
        local[pv.part];
        if (coin(gen)) {
          picked[i].push_back(SampledPoint{pv.part, pv.v.x});
          ++local[pv.part];
        }
      }
      for (auto [part, cnt] : local)
        counts[i][static_cast<std::size_t>(by_part[part].first)].push_back(InstanceCount{part, cnt});
    }
    auto tallies = cl.exchange(counts, "sep.sample.candidates");
    std::set<std::int64_t> ok;
    auto verdicts = cl.make_outbox<InstanceCount>();
    for (std::size_t i = 0; i < m; ++i) {
      std::map<std::int64_t, std::int64_t> sum;
      for (const auto& t : tallies[i]) sum[t.part] += t.count;
      for (auto [part, total] : sum) {
        const bool good = static_cast<std::size_t>(total) >= k && static_cast<std::size_t>(total) <= 3 * k;
        if (good) ok.insert(part);
        const auto& a = by_part[part];
        for (auto j = a.first; j <= a.last; ++j)
          verdicts[i][static_cast<std::size_t>(j)].push_back(InstanceCount{part, good ? 1 : 0});
      }
    }
    cl.exchange(verdicts, "sep.sample.verdict");
    if (ok.empty()) continue;
    auto ship = cl.make_outbox<SampledPoint>();
    for (std::size_t i = 0; i < m; ++i)
      for (const auto& sp : picked[i])
        if (ok.count(sp.part)) ship[i][static_cast<std::size_t>(by_part[sp.part].first)].push_back(sp);
    auto got = cl.exchange(ship, "sep.sample.collect");
    for (std::size_t i = 0; i < m; ++i)
      for (const auto& sp : got[i]) samples[sp.part].push_back(sp.x);
    for (auto part : ok) pending.erase(part);
  }

  // Coordinators partition their samples locally and report the trees.
  const double r = 2.0 * std::pow(static_cast<double>(s), 1.0 / d);
  auto trees = cl.make_outbox<TreeRecord>();
  for (const auto& a : table) {
    auto& smp = samples[a.part];
    const double N = static_cast<double>(smp.size());
    const double ratio = static_cast<double>(a.total) / static_cast<double>(s);
    const double l = std::min(1.0 / 3.0, std::log(ratio) / std::log(r));
    const double K = std::min(2.0 * N / std::pow(r, l), N * static_cast<double>(s) / static_cast<double>(a.total));
    DividerParams dp{c, d, r, static_cast<double>(a.total)};
    auto tree = local_multi_partition(smp, K, dp, static_cast<double>(a.total));
    for (std::size_t t = 0; t < tree.nodes.size(); ++t) {
      const auto& nd = tree.nodes[t];
      TreeRecord rec;
      rec.instance = a.part;
      rec.node = static_cast<std::int32_t>(t);
      rec.box = nd.box;
      if (nd.divider) {
        rec.dim = nd.divider->dim;
        rec.x = nd.divider->x;
        rec.left = nd.left;
        rec.right = nd.right;
      } else {
        rec.leaf_part = nd.leaf;
      }
      trees[static_cast<std::size_t>(a.first)][0].push_back(rec);
    }
  }
  auto all_trees = cl.exchange(trees, "sep.trees")[0];

  // M0 names the new instances and publishes every tree.
  std::stable_sort(all_trees.begin(), all_trees.end(), [](const TreeRecord& x, const TreeRecord& y) {
    return std::tie(x.instance, x.node) < std::tie(y.instance, y.node);
  });
  for (std::size_t t = 0; t < all_trees.size();) {
    std::size_t e = t;
    while (e < all_trees.size() && all_trees[e].instance == all_trees[t].instance) ++e;
    const bool undivided = (e - t == 1);
    for (std::size_t u = t; u < e; ++u) {
      auto& rec = all_trees[u];
      if (rec.dim < 0) {
        rec.leaf_part = st.next_id++;
        rec.terminal = undivided;
        if (undivided) st.terminal.insert(std::upper_bound(st.terminal.begin(), st.terminal.end(), rec.leaf_part),
                                          rec.leaf_part);
      } else {
        st.log.push_back(DividerLogEntry{rec.instance, CDivider{rec.dim, rec.x, c}, rec.box});
      }
    }
    t = e;
  }
  auto published = broadcast(cl, 0, all_trees, "sep.publish");

  // Classify local vertices by walking the published trees.
  for (std::size_t i = 0; i < m; ++i) {
    std::map<std::int64_t, std::vector<TreeRecord>> forest;
    for (const auto& rec : published[i]) forest[rec.instance].push_back(rec);
    for (auto& pv : st.data[i]) {
      auto it = forest.find(pv.part);
      if (it == forest.end()) continue;
      const auto& nodes = it->second;
      std::size_t at = 0;
      while (true) {
        const auto& rec = nodes[at];
        if (rec.dim < 0) {
          pv.part = rec.leaf_part;
          break;
        }
        const int side = CDivider{rec.dim, rec.x, c}.side(pv.v.x);
        if (side == 0) {
          pv.part = kSeparatorPart;
          break;
        }
        at = static_cast<std::size_t>(side < 0 ? rec.left : rec.right);
      }
    }
  }
  mpc_sort(cl, st.data, PlacedLess{}, "sep.sort");
  return true;
}

PseudoSeparator compute_pseudo_separator(Cluster& cl, Dist<GridVertex> vertices, const ImplicitGridGraph& g,
                                         const SeparatorConfig& cfg) {
  const std::size_t start_rounds = cl.rounds();
  const std::size_t m = cl.machines();
  PseudoSeparator out;
  out.d = std::max(g.d(), 3);
  if (g.d() == 2)
    for (auto& part : vertices) lift_dimension(part);
  check_c_ceiling(g.c(), cl.s(), out.d, cfg.ceiling);

  SuperRoundState st;
  st.data.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& v : vertices[i]) st.data[i].push_back(PlacedVertex{v, 0});

  while (separator_super_round(cl, st, out.d, g.c())) {
    if (++out.super_rounds > cfg.max_super_rounds)
      throw RoundCapExceeded("separator", "more than " + std::to_string(cfg.max_super_rounds) + " super rounds");
  }

  Dist<PartSummary> summaries(m);
  for (std::size_t i = 0; i < m; ++i) summaries[i] = local_summaries(st.data[i], i, out.d);
  auto at_m0 = gather_to(cl, summaries, 0, "sep.summary");
  std::map<std::int64_t, PartInfo> parts;
  for (const auto& ps : at_m0) {
    if (ps.part == kSeparatorPart) {
      out.separator_size += static_cast<std::size_t>(ps.count);
      continue;
    }
    auto [it, fresh] = parts.try_emplace(ps.part);
    auto& info = it->second;
    if (fresh) {
      info.id = ps.part;
      info.box = ps.box;
      info.first_machine = static_cast<std::size_t>(ps.machine);
    }
    info.size += static_cast<std::size_t>(ps.count);
    info.first_machine = std::min(info.first_machine, static_cast<std::size_t>(ps.machine));
    for (int j = 0; j < out.d; ++j) {
      info.box.lo[j] = std::min(info.box.lo[j], ps.box.lo[j]);
      info.box.hi[j] = std::max(info.box.hi[j], ps.box.hi[j]);
    }
  }
  for (auto& [id, info] : parts) out.parts.push_back(info);
  out.layout = std::move(st.data);
  out.dividers = std::move(st.log);
  out.rounds = cl.rounds() - start_rounds;
  return out;
}

std::size_t cross_part_edges(const PseudoSeparator& sep, const std::vector<GridVertex>& original,
                             const ImplicitGridGraph& g) {
  std::unordered_map<VertexId, std::int64_t> part;
  for (const auto& m : sep.layout)
    for (const auto& pv : m) part[pv.v.id] = pv.part;
  std::size_t bad = 0;
  for (const auto& e : oracle::all_edges(original, g, original.size())) {
    const auto pa = part.at(e.a), pb = part.at(e.b);
    if (pa != kSeparatorPart && pb != kSeparatorPart && pa != pb) ++bad;
  }
  return bad;
}

}  // namespace mpcg
