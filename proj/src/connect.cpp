#include "mpcg/connect.hpp"

#include <limits>
#include <map>
#include <unordered_map>

namespace mpcg {

std::vector<CompressedEdge> compress_forest(std::size_t n_vertices, const std::vector<LocalEdge>& edges,
                                            const std::vector<std::size_t>& forest,
                                            const std::vector<bool>& terminal) {
  std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> adj(n_vertices);
  for (auto e : forest) {
    adj[edges[e].u].push_back({edges[e].v, e});
    adj[edges[e].v].push_back({edges[e].u, e});
  }
  std::vector<std::size_t> deg(n_vertices);
  for (std::size_t i = 0; i < n_vertices; ++i) deg[i] = adj[i].size();
  std::vector<bool> removed(n_vertices, false);
  std::vector<std::uint32_t> queue;
  for (std::size_t i = 0; i < n_vertices; ++i)
    if (!terminal[i] && deg[i] <= 1) {
      removed[i] = true;
      queue.push_back(static_cast<std::uint32_t>(i));
    }
  while (!queue.empty()) {
    const auto x = queue.back();
    queue.pop_back();
    for (auto [y, e] : adj[x]) {
      if (removed[y]) continue;
      if (--deg[y] <= 1 && !terminal[y]) {
        removed[y] = true;
        queue.push_back(y);
      }
    }
  }
  auto key_node = [&](std::size_t i) { return !removed[i] && (terminal[i] || deg[i] >= 3); };

  std::vector<bool> visited(edges.size(), false);
  std::vector<CompressedEdge> out;
  for (std::size_t k = 0; k < n_vertices; ++k) {
    if (!key_node(k)) continue;
    for (auto [first, e0] : adj[k]) {
      if (removed[first] || visited[e0]) continue;
      visited[e0] = true;
      std::size_t best = e0;
      std::size_t prev_edge = e0;
      std::uint32_t cur = first;
      while (!key_node(cur)) {
        // cur has exactly two live edges; leave by the one not yet taken.
        for (auto [nxt, e] : adj[cur]) {
          if (e == prev_edge || removed[nxt]) continue;
          visited[e] = true;
          if (edges[best].key < edges[e].key) best = e;
          prev_edge = e;
          cur = nxt;
          break;
        }
      }
      out.push_back(CompressedEdge{static_cast<std::uint32_t>(k), cur, edges[best].key, best});
    }
  }
  return out;
}

namespace {

struct PartSpan {
  std::int64_t first = 0, last = 0;
  bool empty = true;
};

struct MergeRecord {
  bool anchor = false;  // anchor: (a = S vertex, tree_min) of a local tree
  VertexId a = 0, b = 0;
  EdgeKey key;
  std::int64_t origin = 0;  // owner machine
  std::int64_t part = 0;
  std::int64_t index = 0;   // compressed-edge index within the part
  VertexId tree_min = 0;
};

struct OutEdge {
  std::int64_t part = 0;
  std::int64_t index = 0;
};

struct LocalPart {
  std::int64_t id = 0;
  std::vector<GridVertex> verts;  // V_i followed by S_i
  std::size_t core = 0;           // |V_i|
  std::vector<LocalEdge> edges;
  std::vector<std::size_t> forest;
  std::vector<CompressedEdge> compressed;
  UnionFind trees;
};

}  // namespace

ConnectResult connect_grid(Cluster& cl, const Dist<GridVertex>& vertices, const ImplicitGridGraph& g,
                           const ConnectOptions& opt) {
  const std::size_t start_rounds = cl.rounds();
  const std::size_t m = cl.machines();
  const Coord c = g.c();
  ConnectResult res;
  res.separator = compute_pseudo_separator(cl, vertices, g, opt.separator);
  const auto& sep = res.separator;
  const int wd = sep.d;

  if (sep.separator_size > cl.s())
    throw SeparatorOverflow("connect", "separator holds " + std::to_string(sep.separator_size) +
                                           " vertices, more than s=" + std::to_string(cl.s()));

  // S to M0, then to everyone.
  Dist<GridVertex> s_local(m);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& pv : sep.layout[i])
      if (pv.part == kSeparatorPart) s_local[i].push_back(pv.v);
  auto s_at_m0 = gather_to(cl, s_local, 0, "connect.gather_s");
  auto s_everywhere = broadcast(cl, 0, s_at_m0, "connect.broadcast_s");

  // Route every part to the machine holding its first vertex.
  std::vector<PartSpan> spans(m);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& pv : sep.layout[i]) {
      if (pv.part == kSeparatorPart) continue;
      if (spans[i].empty) spans[i].first = pv.part;
      spans[i].last = pv.part;
      spans[i].empty = false;
    }
  auto known = all_gather(cl, spans, "connect.spans");
  auto route = cl.make_outbox<PlacedVertex>();
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t first_owner = i;
    if (!known[i].empty)
      for (std::size_t j = i; j-- > 0;) {
        if (known[j].empty) continue;
        if (known[j].last != known[i].first) break;
        first_owner = j;
      }
    for (const auto& pv : sep.layout[i]) {
      if (pv.part == kSeparatorPart) continue;
      route[i][pv.part == known[i].first ? first_owner : i].push_back(pv);
    }
  }
  auto owned = cl.exchange(route, "connect.route");

  // Local phase: extended subgraph, spanning forest, compression.
  std::vector<std::vector<LocalPart>> parts(m);
  auto merge = cl.make_outbox<MergeRecord>();
  for (std::size_t i = 0; i < m; ++i) {
    auto& in = owned[i];
    std::stable_sort(in.begin(), in.end(),
                     [](const PlacedVertex& a, const PlacedVertex& b) { return a.part < b.part; });
    const auto& S = s_everywhere[i];
    std::size_t stored = S.size();
    for (std::size_t t = 0; t < in.size();) {
      std::size_t e = t;
      LocalPart lp;
      lp.id = in[t].part;
      while (e < in.size() && in[e].part == lp.id) lp.verts.push_back(in[e++].v);
      lp.core = lp.verts.size();
      const Box h = mbr_of(lp.verts, wd, [](const GridVertex& v) -> const Coords& { return v.x; }).expanded(c);
      for (const auto& sv : S)
        if (h.contains(sv.x)) lp.verts.push_back(sv);
      res.max_extended = std::max(res.max_extended, lp.verts.size());
      stored += lp.verts.size();
      const std::size_t core = lp.core;
      lp.edges = materialize_edges(lp.verts, g, [core](std::size_t a, std::size_t b) { return a < core || b < core; });
      lp.forest = kruskal(lp.verts.size(), lp.edges);
      std::vector<bool> terminal(lp.verts.size(), false);
      for (std::size_t v = core; v < lp.verts.size(); ++v) terminal[v] = true;
      lp.compressed = compress_forest(lp.verts.size(), lp.edges, lp.forest, terminal);

      lp.trees = UnionFind(lp.verts.size());
      for (auto f : lp.forest) lp.trees.unite(lp.edges[f].u, lp.edges[f].v);
      std::unordered_map<std::size_t, VertexId> tree_min, anchor;
      for (std::size_t v = 0; v < lp.verts.size(); ++v) {
        const auto r = lp.trees.find(v);
        auto [it, fresh] = tree_min.try_emplace(r, lp.verts[v].id);
        if (!fresh) it->second = std::min(it->second, lp.verts[v].id);
        if (terminal[v]) {
          auto [at, f2] = anchor.try_emplace(r, lp.verts[v].id);
          if (!f2) at->second = std::min(at->second, lp.verts[v].id);
        }
      }
      for (std::size_t k = 0; k < lp.compressed.size(); ++k) {
        const auto& ce = lp.compressed[k];
        MergeRecord rec;
        rec.a = lp.verts[ce.u].id;
        rec.b = lp.verts[ce.v].id;
        rec.key = ce.bottleneck;
        rec.origin = static_cast<std::int64_t>(i);
        rec.part = lp.id;
        rec.index = static_cast<std::int64_t>(k);
        merge[i][0].push_back(rec);
      }
      for (auto [root, s_id] : anchor) {
        MergeRecord rec;
        rec.anchor = true;
        rec.a = s_id;
        rec.tree_min = tree_min[root];
        merge[i][0].push_back(rec);
      }
      parts[i].push_back(std::move(lp));
      t = e;
    }
    cl.note_store(i, stored);
  }
  // Anchors are emitted from hash order; fix the order for determinism.
  for (auto& box : merge)
    std::stable_sort(box[0].begin(), box[0].end(), [](const MergeRecord& x, const MergeRecord& y) {
      return std::tie(x.anchor, x.part, x.index, x.a) < std::tie(y.anchor, y.part, y.index, y.a);
    });
  auto merged = cl.exchange(merge, "connect.merge")[0];
  for (const auto& r : merged) res.merge_edges += r.anchor ? 0 : 1;
  if (merged.size() > cl.capacity())
    throw MergeOverflow("connect", "merge set of " + std::to_string(merged.size()) + " records exceeds " +
                                       std::to_string(cl.capacity()));

  // M0: separator-only edges, then the merged graph H'.
  std::vector<GridVertex> S = s_at_m0;
  auto s_edges = materialize_edges(S, g);
  auto s_forest = kruskal(S.size(), s_edges);

  std::unordered_map<VertexId, std::size_t> idx;
  std::vector<VertexId> ids;
  auto index_of = [&](VertexId v) {
    auto [it, fresh] = idx.try_emplace(v, ids.size());
    if (fresh) ids.push_back(v);
    return it->second;
  };
  for (const auto& sv : S) index_of(sv.id);
  struct Candidate {
    EdgeKey key;
    std::size_t a, b;
    std::int64_t record;  // index into merged, -1 for separator edges
  };
  std::vector<Candidate> cand;
  for (auto f : s_forest)
    cand.push_back({s_edges[f].key, index_of(S[s_edges[f].u].id), index_of(S[s_edges[f].v].id), -1});
  for (std::size_t r = 0; r < merged.size(); ++r)
    if (!merged[r].anchor)
      cand.push_back({merged[r].key, index_of(merged[r].a), index_of(merged[r].b), static_cast<std::int64_t>(r)});
  std::sort(cand.begin(), cand.end(), [](const Candidate& x, const Candidate& y) { return x.key < y.key; });
  UnionFind uf(ids.size());
  std::vector<bool> in_tree(merged.size(), false);
  Dist<EdgeKey> msf(m);
  for (const auto& e : cand) {
    if (!uf.unite(e.a, e.b)) continue;
    if (e.record >= 0)
      in_tree[static_cast<std::size_t>(e.record)] = true;
    else
      msf[0].push_back(e.key);
  }
  std::vector<VertexId> comp_min(ids.size(), std::numeric_limits<VertexId>::max());
  for (std::size_t v = 0; v < ids.size(); ++v) comp_min[uf.find(v)] = std::min(comp_min[uf.find(v)], ids[v]);
  for (const auto& r : merged)
    if (r.anchor) {
      auto root = uf.find(idx.at(r.a));
      comp_min[root] = std::min(comp_min[root], r.tree_min);
    }
  std::vector<VertexLabel> s_labels;
  for (const auto& sv : S) s_labels.push_back(VertexLabel{sv.id, comp_min[uf.find(idx.at(sv.id))]});
  auto labels_everywhere = broadcast(cl, 0, s_labels, "connect.labels");

  Dist<OutEdge> outs(m);
  if (opt.msf) {
    auto verdict = cl.make_outbox<OutEdge>();
    for (std::size_t r = 0; r < merged.size(); ++r)
      if (!merged[r].anchor && !in_tree[r])
        verdict[0][static_cast<std::size_t>(merged[r].origin)].push_back(OutEdge{merged[r].part, merged[r].index});
    outs = cl.exchange(verdict, "connect.verdict");
  }

  // Owners finish: labels for V_i, forest minus reopened bottlenecks.
  res.labels.assign(m, {});
  res.labels[0] = s_labels;
  for (std::size_t i = 0; i < m; ++i) {
    std::unordered_map<VertexId, VertexId> s_label;
    for (const auto& l : labels_everywhere[i]) s_label[l.id] = l.label;
    std::map<std::int64_t, std::vector<std::int64_t>> out_by_part;
    for (const auto& o : outs[i]) out_by_part[o.part].push_back(o.index);
    for (auto& lp : parts[i]) {
      std::unordered_map<std::size_t, VertexId> tree_label;
      for (std::size_t v = lp.core; v < lp.verts.size(); ++v) tree_label[lp.trees.find(v)] = s_label.at(lp.verts[v].id);
      // Trees without a separator vertex are whole components.
      std::unordered_map<std::size_t, VertexId> own_min;
      for (std::size_t v = 0; v < lp.core; ++v) {
        auto [it, fresh] = own_min.try_emplace(lp.trees.find(v), lp.verts[v].id);
        if (!fresh) it->second = std::min(it->second, lp.verts[v].id);
      }
      for (std::size_t v = 0; v < lp.core; ++v) {
        const auto r = lp.trees.find(v);
        auto it = tree_label.find(r);
        res.labels[i].push_back(VertexLabel{lp.verts[v].id, it != tree_label.end() ? it->second : own_min[r]});
      }
      if (!opt.msf) continue;
      std::vector<bool> dropped(lp.edges.size(), false);
      for (auto k : out_by_part[lp.id]) dropped[lp.compressed[static_cast<std::size_t>(k)].bottleneck_edge] = true;
      for (auto f : lp.forest)
        if (!dropped[f]) msf[i].push_back(lp.edges[f].key);
    }
  }
  if (opt.msf) res.msf_edges = std::move(msf);
  res.rounds = cl.rounds() - start_rounds;
  return res;
}

}  // namespace mpcg
