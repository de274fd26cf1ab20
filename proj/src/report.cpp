#include "mpcg/report.hpp"

#include "mpcg/connect.hpp"
#include "mpcg/dbscan.hpp"
#include "mpcg/emst.hpp"
#include "mpcg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mpcg {

using Json = nlohmann::ordered_json;

namespace {

const char* ceiling_name(CeilingMode m) { return m == CeilingMode::strict ? "strict" : "relaxed"; }

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(v);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig c;
  for (const auto& [key, v, line] : parse_key_values(text, "experiment")) {
    try {
      if (key == "name") c.name = v;
      else if (key == "pipeline") c.pipeline = v;
      else if (key == "input") c.input = v;
      else if (key == "input_kind") c.input_kind = v;
      else if (key == "kind") c.gen.kind = v;
      else if (key == "d") c.gen.d = std::stoi(v);
      else if (key == "n") c.gen.n = std::stoull(v);
      else if (key == "delta") c.gen.delta = std::stoll(v);
      else if (key == "clusters") c.gen.clusters = std::stoull(v);
      else if (key == "spread") c.gen.spread = std::stod(v);
      else if (key == "gap") c.gen.gap = std::stoll(v);
      else if (key == "s") c.s = std::stoull(v);
      else if (key == "alpha") c.alpha = std::stod(v);
      else if (key == "budget") c.budget = std::stod(v);
      else if (key == "seed") c.seed = std::stoull(v);
      else if (key == "machines") c.machines = std::stoull(v);
      else if (key == "c") c.c = std::stoll(v);
      else if (key == "rule") c.rule = v;
      else if (key == "rule_param") c.rule_param = std::stod(v);
      else if (key == "ceiling") {
        if (v != "strict" && v != "relaxed") throw std::invalid_argument(v);
        c.ceiling = v == "strict" ? CeilingMode::strict : CeilingMode::relaxed;
      } else if (key == "rho") c.rho = std::stod(v);
      else if (key == "c_growth") c.c_growth = std::stoll(v);
      else if (key == "eps") c.eps = std::stod(v);
      else if (key == "min_pts") c.min_pts = std::stoull(v);
      else if (key == "single_label") c.single_label = parse_bool(v);
      else if (key == "oracle_cap") c.oracle_cap = std::stoull(v);
      else if (key == "emit_output") c.emit_output = parse_bool(v);
      else throw ConfigError("experiment", "line " + std::to_string(line) + ": unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("experiment", "line " + std::to_string(line) + ": bad value for " + key);
    }
  }
  static const std::vector<std::string> pipelines{"grid-cc", "grid-msf", "separator", "emst", "dbscan"};
  if (std::find(pipelines.begin(), pipelines.end(), c.pipeline) == pipelines.end())
    throw ConfigError("experiment", "unknown pipeline '" + c.pipeline + "'");
  if (c.input_kind != "points" && c.input_kind != "graph")
    throw ConfigError("experiment", "input_kind must be points or graph");
  if (c.name.empty() || c.name.find('/') != std::string::npos)
    throw ConfigError("experiment", "name must be a non-empty path component");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("experiment", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["name"] = name;
  j["pipeline"] = pipeline;
  j["input"] = input;
  j["input_kind"] = input_kind;
  j["kind"] = gen.kind;
  j["d"] = gen.d;
  j["n"] = gen.n;
  j["delta"] = gen.delta;
  j["clusters"] = gen.clusters;
  j["spread"] = gen.spread;
  j["gap"] = gen.gap;
  j["s"] = s;
  j["alpha"] = alpha;
  j["budget"] = budget;
  j["seed"] = seed;
  j["machines"] = machines;
  j["c"] = c;
  j["rule"] = rule;
  j["rule_param"] = rule_param;
  j["ceiling"] = ceiling_name(ceiling);
  j["rho"] = rho;
  j["c_growth"] = c_growth;
  j["eps"] = eps;
  j["min_pts"] = min_pts;
  j["single_label"] = single_label;
  j["oracle_cap"] = oracle_cap;
  j["emit_output"] = emit_output;
  return j;
}

std::string rounds_csv(const std::vector<RoundStats>& stats) {
  std::ostringstream os;
  os << "round,phase,max_sent,max_received,max_store,violation\n";
  for (const auto& r : stats) {
    const std::size_t store = r.store_peak.empty() ? 0 : *std::max_element(r.store_peak.begin(), r.store_peak.end());
    os << r.round_index << ',' << r.phase << ',' << r.max_sent() << ',' << r.max_received() << ',' << store << ','
       << (r.budget_violation ? 1 : 0) << '\n';
  }
  return os.str();
}

namespace {

struct Input {
  int d = 2;
  Coord c = 1;
  std::vector<GridVertex> vs;  // ids are row indices
  std::vector<Coords> pts;
};

Input load_input(const ExperimentConfig& cfg) {
  Input in;
  if (cfg.input_kind == "graph") {
    if (cfg.input.empty()) throw ConfigError("experiment", "input_kind=graph needs an input file");
    auto g = read_graph_file(cfg.input);
    in.d = g.d;
    in.c = g.c;
    in.vs = std::move(g.vertices);
    for (const auto& v : in.vs) in.pts.push_back(v.x);
    return in;
  }
  Dataset ds;
  if (cfg.input.empty()) {
    GenerateParams p = cfg.gen;
    p.seed = cfg.seed;
    ds = generate(p);
  } else {
    ds = read_points_file(cfg.input);
  }
  in.d = ds.d;
  in.c = cfg.c;
  in.pts = std::move(ds.pts);
  in.vs = to_vertices(in.pts);
  return in;
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

std::string skip_note(const ExperimentConfig& cfg) {
  return "SKIP: n > oracle_cap (" + std::to_string(cfg.oracle_cap) + ")";
}

// FNV-1a over the decimal rendering, so digests do not depend on layout.
std::string digest(const std::vector<std::int64_t>& xs) {
  std::uint64_t h = 1469598103934665603ull;
  for (auto x : xs) {
    for (char ch : std::to_string(x) + ",") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ull;
    }
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

std::vector<std::int64_t> labels_by_id(const Dist<VertexLabel>& labels, std::size_t n) {
  std::vector<std::int64_t> out(n, -1);
  for (const auto& part : labels)
    for (const auto& l : part) out.at(static_cast<std::size_t>(l.id)) = l.label;
  return out;
}

std::size_t distinct(std::vector<std::int64_t> xs) {
  std::sort(xs.begin(), xs.end());
  return static_cast<std::size_t>(std::unique(xs.begin(), xs.end()) - xs.begin());
}

struct Sections {
  Json summary = Json::object();
  Json verdicts = Json::object();
  Json output = Json::object();
  Json rounds = Json::object();
};

void run_grid(Cluster& cl, const ExperimentConfig& cfg, const Input& in, bool msf, Sections& out) {
  const auto g = make_rule(cfg.rule, in.d, in.c, cfg.rule_param);
  const std::size_t n = in.vs.size();
  auto res = connect_grid(cl, distribute_blocks(in.vs, cl.machines()), g,
                          ConnectOptions{msf, SeparatorConfig{cfg.ceiling}});
  const auto labels = labels_by_id(res.labels, n);
  const std::size_t comps = distinct(labels);
  out.summary["components"] = comps;
  out.summary["separator_size"] = res.separator.separator_size;
  out.summary["merge_edges"] = res.merge_edges;
  out.summary["max_extended"] = res.max_extended;
  out.summary["labels_digest"] = digest(labels);
  out.rounds["separator"] = res.separator.rounds;
  out.rounds["connect"] = res.rounds;

  std::vector<EdgeKey> edges;
  if (msf) {
    edges = flatten(res.msf_edges);
    std::sort(edges.begin(), edges.end());
    double w = 0.0;
    std::vector<std::int64_t> flat;
    for (const auto& e : edges) {
      w += e.w;
      flat.push_back(e.a);
      flat.push_back(e.b);
    }
    out.summary["edges"] = edges.size();
    out.summary["total_weight"] = w;
    out.summary["edges_digest"] = digest(flat);
    out.verdicts["edge_count"] = verdict(edges.size() + comps == n);
  }
  if (n <= cfg.oracle_cap) {
    const auto exact = oracle::exact_cc(in.vs, g, cfg.oracle_cap);
    out.verdicts["partition_equals_exact"] =
        verdict(std::equal(exact.begin(), exact.end(), labels.begin(), labels.end()));
    if (msf) out.verdicts["edges_equal_exact"] = verdict(oracle::exact_msf(in.vs, g, cfg.oracle_cap) == edges);
  } else {
    out.verdicts["partition_equals_exact"] = skip_note(cfg);
    if (msf) out.verdicts["edges_equal_exact"] = skip_note(cfg);
  }
  if (cfg.emit_output) {
    out.output["labels"] = labels;
    if (msf) {
      Json es = Json::array();
      for (const auto& e : edges) es.push_back({e.a, e.b, e.w});
      out.output["edges"] = es;
    }
  }
}

Json box_json(const Box& b, int d) {
  Json lo = Json::array(), hi = Json::array();
  for (int j = 0; j < d; ++j) {
    lo.push_back(b.lo[j]);
    hi.push_back(b.hi[j]);
  }
  return Json{{"lo", lo}, {"hi", hi}};
}

void run_separator(Cluster& cl, const ExperimentConfig& cfg, const Input& in, Sections& out) {
  const auto g = make_rule(cfg.rule, in.d, in.c, cfg.rule_param);
  const std::size_t n = in.vs.size();
  auto sep = compute_pseudo_separator(cl, distribute_blocks(in.vs, cl.machines()), g, SeparatorConfig{cfg.ceiling});
  std::size_t max_part = 0;
  for (const auto& p : sep.parts) max_part = std::max(max_part, p.size);
  const double s = static_cast<double>(cl.s());
  const double part_bound = 8.0 * (in.d + 1) * s;
  const double sep_bound = 16.0 * static_cast<double>(in.c) * static_cast<double>(n) * std::log2(s) / std::cbrt(s);
  const std::size_t cross = cross_part_edges(sep, in.vs, g);

  out.summary["separator_size"] = sep.separator_size;
  out.summary["separator_bound"] = sep_bound;
  out.summary["parts"] = sep.parts.size();
  out.summary["max_part_size"] = max_part;
  out.summary["part_size_bound"] = part_bound;
  out.summary["cross_part_edges"] = cross;
  out.summary["super_rounds"] = sep.super_rounds;
  out.rounds["separator"] = sep.rounds;
  out.verdicts["no_cross_part_edges"] = verdict(cross == 0);
  out.verdicts["max_part_size"] = verdict(static_cast<double>(max_part) <= part_bound);
  out.verdicts["separator_size"] = verdict(static_cast<double>(sep.separator_size) <= sep_bound);

  if (cfg.emit_output) {
    std::vector<std::int64_t> ids;
    for (const auto& m : sep.layout)
      for (const auto& pv : m)
        if (pv.part == kSeparatorPart) ids.push_back(pv.v.id);
    std::sort(ids.begin(), ids.end());
    out.output["separator"] = ids;
    Json parts = Json::array();
    for (const auto& p : sep.parts) parts.push_back({{"id", p.id}, {"size", p.size}, {"mbr", box_json(p.box, sep.d)}});
    out.output["parts"] = parts;
    Json divs = Json::array();
    for (const auto& e : sep.dividers)
      divs.push_back({{"dim", e.divider.dim}, {"x", e.divider.x}, {"box", box_json(e.box, sep.d)}});
    out.output["dividers"] = divs;
  }
}

void run_emst(Cluster& cl, const ExperimentConfig& cfg, const Input& in, Sections& out) {
  EmstParams p;
  p.rho = cfg.rho;
  p.c_override = cfg.c_growth;
  p.separator.ceiling = cfg.ceiling;
  const auto res = approx_emst(cl, in.pts, in.d, p);
  const std::size_t n = in.pts.size();

  out.summary["c_growth"] = res.plan.c_growth;
  out.summary["G"] = res.plan.G;
  out.summary["super_rounds"] = res.super_rounds;
  out.summary["edges"] = res.edges.size();
  out.summary["total_weight"] = res.total_weight;
  Json levels = Json::array();
  for (const auto& l : res.levels)
    levels.push_back({{"level", l.level},
                      {"threshold", l.threshold},
                      {"vertices", l.vertices},
                      {"added", l.added},
                      {"separator_size", l.separator_size},
                      {"rounds", l.rounds}});
  out.summary["levels"] = levels;
  std::vector<std::int64_t> flat;
  std::vector<EdgeKey> tree;
  for (const auto& e : res.edges) {
    flat.push_back(e.a);
    flat.push_back(e.b);
    tree.push_back(EdgeKey::make(e.w, e.a, e.b));
  }
  out.summary["edges_digest"] = digest(flat);
  out.rounds["emst"] = res.rounds;

  UnionFind uf(n);
  bool acyclic = true;
  for (const auto& e : res.edges) acyclic = uf.unite(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b)) && acyclic;
  out.verdicts["spanning_tree"] = verdict(acyclic && (n == 0 || res.edges.size() == n - 1));

  if (n <= cfg.oracle_cap) {
    const auto exact = oracle::exact_mst(in.pts, in.d, cfg.oracle_cap);
    const double ratio = exact.total_weight > 0.0 ? res.total_weight / exact.total_weight : 1.0;
    out.summary["exact_weight"] = exact.total_weight;
    out.summary["ratio_overall"] = ratio;
    double worst = 0.0;
    bool edgewise = true;
    for (const auto& e : exact.edges) {
      const double pm = oracle::path_max(tree, e.a, e.b);
      worst = std::max(worst, pm / e.w);
      if (pm > (1.0 + cfg.rho) * e.w) edgewise = false;
    }
    out.summary["ratio_edgewise_max"] = worst;
    out.verdicts["weight_bound"] = verdict(res.total_weight <= (1.0 + cfg.rho) * exact.total_weight);
    out.verdicts["edgewise_bound"] = verdict(edgewise);
  } else {
    out.verdicts["weight_bound"] = skip_note(cfg);
    out.verdicts["edgewise_bound"] = skip_note(cfg);
  }
  if (cfg.emit_output) {
    Json es = Json::array();
    for (const auto& e : res.edges) es.push_back({e.a, e.b, e.w});
    out.output["edges"] = es;
  }
}

void run_dbscan(Cluster& cl, const ExperimentConfig& cfg, const Input& in, Sections& out) {
  DbscanParams p;
  p.eps = cfg.eps;
  p.min_pts = cfg.min_pts;
  p.rho = cfg.rho;
  p.single_label = cfg.single_label;
  p.separator.ceiling = cfg.ceiling;
  const auto run = approx_dbscan(cl, in.pts, in.d, p);
  const std::size_t n = in.pts.size();

  std::vector<std::int64_t> ours(n, -1), flat;
  std::size_t cores = 0;
  for (const auto& r : run.points) {
    if (r.core) {
      ours[static_cast<std::size_t>(r.id)] = r.clusters.front();
      ++cores;
    }
    flat.push_back(r.core ? 1 : 0);
    flat.insert(flat.end(), r.clusters.begin(), r.clusters.end());
    flat.push_back(-2);
  }
  out.summary["core_points"] = cores;
  out.summary["n_clusters"] = run.n_clusters;
  out.summary["noise"] = run.noise;
  out.summary["separator_size"] = run.separator_size;
  out.summary["points_digest"] = digest(flat);
  out.rounds["cells"] = run.cell_rounds;
  out.rounds["neighbors"] = run.neighbor_rounds;
  out.rounds["core"] = run.core_rounds;
  out.rounds["primitive"] = run.primitive_rounds;
  out.rounds["noncore"] = run.noncore_rounds;
  out.verdicts["core_rounds"] = verdict(run.core_rounds == 2);

  if (n <= cfg.oracle_cap) {
    const auto exact = oracle::exact_dbscan(in.pts, in.d, cfg.eps, cfg.min_pts, cfg.oracle_cap);
    bool core_ok = true;
    for (std::size_t i = 0; i < n; ++i) core_ok = core_ok && exact.core[i] == run.points[i].core;
    out.verdicts["core_flags_exact"] = verdict(core_ok);
    const auto lower = oracle::primitive_partition(in.pts, in.d, exact.core, cfg.eps, cfg.oracle_cap);
    const auto upper = oracle::primitive_partition(in.pts, in.d, exact.core, (1.0 + cfg.rho) * cfg.eps, cfg.oracle_cap);
    out.verdicts["sandwich_lower"] = verdict(core_ok && oracle::refines(lower, ours));
    out.verdicts["sandwich_upper"] = verdict(core_ok && oracle::refines(ours, upper));

    // Non-core points: exactly the labels of core points within eps.
    bool assign_ok = true;
    const double e2 = cfg.eps * cfg.eps;
    for (std::size_t i = 0; i < n && assign_ok; ++i) {
      if (run.points[i].core) continue;
      std::vector<std::int64_t> want;
      for (std::size_t j = 0; j < n; ++j)
        if (run.points[j].core && static_cast<double>(sq_dist(in.pts[i], in.pts[j], in.d)) <= e2)
          want.push_back(ours[j]);
      std::sort(want.begin(), want.end());
      want.erase(std::unique(want.begin(), want.end()), want.end());
      if (cfg.single_label && want.size() > 1) want.resize(1);
      assign_ok = want == run.points[i].clusters;
    }
    out.verdicts["noncore_assignment"] = verdict(assign_ok);
  } else {
    for (const char* k : {"core_flags_exact", "sandwich_lower", "sandwich_upper", "noncore_assignment"})
      out.verdicts[k] = skip_note(cfg);
  }
  if (cfg.emit_output) {
    Json pts = Json::array();
    for (const auto& r : run.points) pts.push_back({{"id", r.id}, {"core", r.core}, {"clusters", r.clusters}});
    out.output["points"] = pts;
  }
}

std::string error_kind(const Error& e) {
  if (dynamic_cast<const BudgetError*>(&e)) return "BudgetError";
  if (dynamic_cast<const SamplingFailure*>(&e)) return "SamplingFailure";
  if (dynamic_cast<const RoundCapExceeded*>(&e)) return "RoundCapExceeded";
  if (dynamic_cast<const SeparatorOverflow*>(&e)) return "SeparatorOverflow";
  if (dynamic_cast<const MergeOverflow*>(&e)) return "MergeOverflow";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const OracleCapExceeded*>(&e)) return "OracleCapExceeded";
  return "Error";
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  const Input in = load_input(cfg);
  const std::size_t n = in.vs.size();

  ClusterConfig cc;
  cc.n_total = std::max<std::size_t>(n, 1);
  cc.s = cfg.alpha > 0.0 ? ClusterConfig::s_for_alpha(cc.n_total, cfg.alpha) : cfg.s;
  cc.budget_factor = cfg.budget;
  cc.rng_seed = cfg.seed;
  cc.m = cfg.machines;
  if (cc.m == 0 && cfg.pipeline == "dbscan") cc.m = dbscan_machines(cc.n_total, cc.s, in.d, cfg.budget);
  Cluster cl(cc);

  Sections sec;
  Json error = nullptr;
  try {
    if (cfg.pipeline == "grid-cc") run_grid(cl, cfg, in, false, sec);
    else if (cfg.pipeline == "grid-msf") run_grid(cl, cfg, in, true, sec);
    else if (cfg.pipeline == "separator") run_separator(cl, cfg, in, sec);
    else if (cfg.pipeline == "emst") run_emst(cl, cfg, in, sec);
    else run_dbscan(cl, cfg, in, sec);
    sec.verdicts["completed"] = "PASS";
  } catch (const Error& e) {
    error = Json{{"stage", e.stage()}, {"type", error_kind(e)}, {"round", cl.rounds() + 1}, {"message", e.what()}};
    sec.verdicts["completed"] = "FAIL";
  }

  std::size_t max_sent = 0, max_recv = 0;
  Json per_round = Json::array();
  for (const auto& r : cl.stats()) {
    max_sent = std::max(max_sent, r.max_sent());
    max_recv = std::max(max_recv, r.max_received());
    per_round.push_back({{"round", r.round_index}, {"phase", r.phase}, {"max_sent", r.max_sent()},
                         {"max_received", r.max_received()}});
  }
  sec.verdicts["traffic_budget"] = verdict(!cl.budget_violated());
  sec.rounds["total"] = cl.rounds();

  ExperimentOutcome out;
  Json& rep = out.report;
  rep["algorithm"] = cfg.pipeline;
  rep["config"] = cfg.to_json();
  rep["effective"] = {{"n", n},     {"d", in.d},           {"c", in.c},
                      {"s", cl.s()}, {"machines", cl.machines()}, {"capacity", cl.capacity()}};
  rep["rounds"] = sec.rounds;
  rep["traffic"] = {{"max_sent", max_sent},
                    {"max_received", max_recv},
                    {"violations", cl.violation_count()},
                    {"per_round", per_round}};
  rep["summary"] = sec.summary;
  rep["verdicts"] = sec.verdicts;
  if (!error.is_null()) rep["error"] = error;
  if (cfg.emit_output) rep["output"] = sec.output;

  out.all_pass = true;
  for (const auto& [k, v] : sec.verdicts.items())
    if (v.get<std::string>().rfind("SKIP", 0) != 0 && v != "PASS") out.all_pass = false;
  out.rounds_csv = rounds_csv(cl.stats());
  return out;
}

std::filesystem::path write_outcome(const ExperimentOutcome& out, const ExperimentConfig& cfg,
                                    const std::filesystem::path& root, double wall_seconds) {
  const auto dir = root / cfg.name / std::to_string(cfg.seed);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "report.json") << out.report.dump(2) << '\n';
  std::ofstream(dir / "rounds.csv") << out.rounds_csv;
  // wall time would break byte-identical reports, so it lives beside them
  if (wall_seconds >= 0.0) std::ofstream(dir / "timing.json") << Json{{"wall_seconds", wall_seconds}}.dump() << '\n';
  return dir;
}

}  // namespace mpcg
