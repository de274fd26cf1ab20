#include "mpcg/dataset.hpp"
#include "mpcg/oracle.hpp"
#include "mpcg/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>

using namespace mpcg;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string out_dir;  // write report.json/rounds.csv under it
  std::string csv;      // rounds.csv copy
  std::string ceiling = "relaxed";
  std::optional<std::string> input_kind;
};

void add_dataset_flags(CLI::App* app, ExperimentConfig& cfg) {
  app->add_option("--input", cfg.input, "point or graph file; omitted: generate");
  app->add_option("--kind", cfg.gen.kind, "generator kind")
      ->check(CLI::IsMember({"uniform", "clustered", "lattice-path", "lattice-two-clusters", "lattice-cube"}));
  app->add_option("--d", cfg.gen.d, "dimension")->check(CLI::Range(2, kMaxDim));
  app->add_option("--n", cfg.gen.n, "points");
  app->add_option("--delta", cfg.gen.delta, "coordinate range [0, delta]");
  app->add_option("--clusters", cfg.gen.clusters, "clustered: blobs");
  app->add_option("--spread", cfg.gen.spread, "clustered: per-axis deviation");
  app->add_option("--gap", cfg.gen.gap, "lattice-two-clusters: gap");
}

void add_cluster_flags(CLI::App* app, ExperimentConfig& cfg, Common& com) {
  app->add_option("--s", cfg.s, "words per machine");
  app->add_option("--alpha", cfg.alpha, "s = n^alpha when > 0");
  app->add_option("--budget", cfg.budget, "per-round traffic budget factor");
  app->add_option("--seed", cfg.seed, "seed for generator and cluster");
  app->add_option("--machines", cfg.machines, "machine count; 0 picks the default");
  app->add_option("--ceiling", com.ceiling, "c ceiling mode")->check(CLI::IsMember({"strict", "relaxed"}));
  app->add_option("--oracle-cap", cfg.oracle_cap, "largest n checked against oracles");
  app->add_option("--name", cfg.name, "experiment name for --out-dir");
  app->add_option("--out-dir", com.out_dir, "also write <dir>/<name>/<seed>/report.json");
  app->add_option("--csv", com.csv, "write per-round metrics here");
}

void add_graph_flags(CLI::App* app, ExperimentConfig& cfg, Common& com) {
  app->add_option("--c", cfg.c, "grid graph c (point input)");
  app->add_option("--rule", cfg.rule, "edge rule")
      ->check(CLI::IsMember({"linf_threshold", "euclid_threshold", "hashed_weight"}));
  app->add_option("--rule-param", cfg.rule_param, "rule parameter");
  app->add_option("--input-kind", com.input_kind, "graph or points")->check(CLI::IsMember({"graph", "points"}));
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (const auto dash = tok.find('-'); dash != std::string::npos && dash > 0) {
      const auto a = std::stoull(tok.substr(0, dash)), b = std::stoull(tok.substr(dash + 1));
      for (auto s = a; s <= b; ++s) out.push_back(s);
    } else {
      out.push_back(std::stoull(tok));
    }
  }
  if (out.empty()) throw CLI::ValidationError("--seeds", "no seeds");
  return out;
}

struct Timed {
  ExperimentOutcome out;
  double seconds = 0.0;
};

Timed timed_run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Timed t{run_experiment(cfg)};
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

// Independent runs, at most `jobs` at a time; results keep input order.
std::vector<Timed> run_all(const std::vector<ExperimentConfig>& cfgs, std::size_t jobs) {
  std::vector<Timed> res(cfgs.size());
  jobs = std::max<std::size_t>(jobs, 1);
  for (std::size_t at = 0; at < cfgs.size(); at += jobs) {
    std::vector<std::future<Timed>> fs;
    for (std::size_t i = at; i < std::min(cfgs.size(), at + jobs); ++i)
      fs.push_back(std::async(std::launch::async, timed_run, std::cref(cfgs[i])));
    for (std::size_t i = 0; i < fs.size(); ++i) res[at + i] = fs[i].get();
  }
  return res;
}

int run_single(ExperimentConfig cfg, const Common& com, const std::string& default_kind) {
  cfg.ceiling = com.ceiling == "strict" ? CeilingMode::strict : CeilingMode::relaxed;
  cfg.input_kind = com.input_kind.value_or(cfg.input.empty() ? "points" : default_kind);
  cfg.emit_output = true;
  const auto t = timed_run(cfg);
  std::cout << t.out.report.dump(2) << '\n';
  if (!com.csv.empty()) std::ofstream(com.csv) << t.out.rounds_csv;
  if (!com.out_dir.empty()) write_outcome(t.out, cfg, com.out_dir, t.seconds);
  return t.out.all_pass ? 0 : 1;
}

Json edges_json(const std::vector<EdgeKey>& es) {
  Json out = Json::array();
  for (const auto& e : es) out.push_back({e.a, e.b, e.w});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-graph MPC algorithms on a simulated cluster"};
  app.require_subcommand(1);
  int code = 0;

  // generate
  GenerateParams gp;
  std::string gen_out;
  std::optional<Coord> gen_graph_c;
  auto* gen = app.add_subcommand("generate", "write a dataset");
  gen->add_option("--kind", gp.kind, "generator kind")
      ->check(CLI::IsMember({"uniform", "clustered", "lattice-path", "lattice-two-clusters", "lattice-cube"}));
  gen->add_option("--d", gp.d, "dimension")->check(CLI::Range(2, kMaxDim));
  gen->add_option("--n", gp.n, "points");
  gen->add_option("--delta", gp.delta, "coordinate range");
  gen->add_option("--seed", gp.seed, "seed");
  gen->add_option("--clusters", gp.clusters, "clustered: blobs");
  gen->add_option("--spread", gp.spread, "clustered: per-axis deviation");
  gen->add_option("--gap", gp.gap, "lattice-two-clusters: gap");
  gen->add_option("--graph-c", gen_graph_c, "write a graph file with this c instead of a point file");
  gen->add_option("--out", gen_out, "output file (default stdout)");
  gen->callback([&] {
    const auto ds = generate(gp);
    std::ofstream file;
    if (!gen_out.empty()) file.open(gen_out);
    std::ostream& os = gen_out.empty() ? std::cout : file;
    if (gen_graph_c) write_graph(os, GraphInput{ds.d, *gen_graph_c, to_vertices(ds.pts)});
    else write_points(os, ds);
  });

  // one-shot pipelines
  struct Sub {
    const char* name;
    const char* help;
    const char* default_kind;
    bool graph;
  };
  const Sub subs[] = {{"separator", "pseudo separator of a grid graph", "graph", true},
                      {"grid-cc", "connected components of a grid graph", "graph", true},
                      {"grid-msf", "minimum spanning forest of a grid graph", "graph", true},
                      {"emst", "approximate Euclidean MST", "points", false},
                      {"dbscan", "approximate DBSCAN", "points", false}};
  std::vector<ExperimentConfig> sub_cfg(std::size(subs));
  std::vector<Common> sub_com(std::size(subs));
  for (std::size_t i = 0; i < std::size(subs); ++i) {
    auto& cfg = sub_cfg[i];
    auto& com = sub_com[i];
    cfg.pipeline = subs[i].name;
    cfg.name = subs[i].name;
    auto* sc = app.add_subcommand(subs[i].name, subs[i].help);
    add_dataset_flags(sc, cfg);
    add_cluster_flags(sc, cfg, com);
    if (subs[i].graph) add_graph_flags(sc, cfg, com);
    if (cfg.pipeline == "emst") {
      sc->add_option("--rho", cfg.rho, "approximation");
      sc->add_option("--c-growth", cfg.c_growth, "override c; 0 derives it");
    }
    if (cfg.pipeline == "dbscan") {
      sc->add_option("--eps", cfg.eps, "radius")->required();
      sc->add_option("--minpts", cfg.min_pts, "core threshold")->required();
      sc->add_option("--rho", cfg.rho, "approximation");
      sc->add_flag("--single-label", cfg.single_label, "border points keep one cluster id");
    }
    const char* kind = subs[i].default_kind;
    sc->callback([&cfg, &com, &code, kind] { code = run_single(cfg, com, kind); });
  }

  // oracle
  auto* orc = app.add_subcommand("oracle", "exact sequential answers");
  orc->require_subcommand(1);
  std::string o_input;
  std::string o_rule = "linf_threshold";
  double o_param = 0.0, o_eps = 1.0;
  std::size_t o_minpts = 3, o_cap = oracle::kDefaultCap;
  auto graph_in = [&] { return read_graph_file(o_input); };
  for (const char* name : {"cc", "msf"}) {
    auto* sc = orc->add_subcommand(name, std::string("exact ") + name + " of a graph file");
    sc->add_option("--input", o_input, "graph file")->required();
    sc->add_option("--rule", o_rule, "edge rule");
    sc->add_option("--rule-param", o_param, "rule parameter");
    sc->add_option("--cap", o_cap, "largest n accepted");
    const std::string which = name;
    sc->callback([&, which] {
      const auto gi = graph_in();
      const auto g = make_rule(o_rule, gi.d, gi.c, o_param);
      if (which == "cc") std::cout << Json{{"labels", oracle::exact_cc(gi.vertices, g, o_cap)}}.dump(2) << '\n';
      else std::cout << Json{{"edges", edges_json(oracle::exact_msf(gi.vertices, g, o_cap))}}.dump(2) << '\n';
    });
  }
  auto* omst = orc->add_subcommand("mst", "exact Euclidean MST of a point file");
  omst->add_option("--input", o_input, "point file")->required();
  omst->add_option("--cap", o_cap, "largest n accepted");
  omst->callback([&] {
    const auto ds = read_points_file(o_input);
    const auto r = oracle::exact_mst(ds.pts, ds.d, o_cap);
    std::cout << Json{{"edges", edges_json(r.edges)}, {"total_weight", r.total_weight}}.dump(2) << '\n';
  });
  auto* odb = orc->add_subcommand("dbscan", "exact DBSCAN of a point file");
  odb->add_option("--input", o_input, "point file")->required();
  odb->add_option("--eps", o_eps, "radius")->required();
  odb->add_option("--minpts", o_minpts, "core threshold")->required();
  odb->add_option("--cap", o_cap, "largest n accepted");
  odb->callback([&] {
    const auto ds = read_points_file(o_input);
    const auto r = oracle::exact_dbscan(ds.pts, ds.d, o_eps, o_minpts, o_cap);
    Json pts = Json::array();
    for (std::size_t i = 0; i < ds.pts.size(); ++i)
      pts.push_back({{"id", i}, {"core", static_cast<bool>(r.core[i])}, {"clusters", r.clusters[i]}});
    std::cout << Json{{"points", pts}}.dump(2) << '\n';
  });

  // run / bench over config files
  std::vector<std::string> configs;
  std::string out_root = "out", seeds_spec;
  std::vector<std::size_t> bench_n;
  std::size_t jobs = 1;
  auto* run = app.add_subcommand("run", "run experiment configs, writing out/<name>/<seed>/");
  auto* bench = app.add_subcommand("bench", "run configs over seeds and sizes, one CSV row per run");
  for (auto* sc : {run, bench}) {
    sc->add_option("configs", configs, "experiment config files")->required()->check(CLI::ExistingFile);
    sc->add_option("--out", out_root, "artifact root");
    sc->add_option("--seeds", seeds_spec, "e.g. 1-5,9; default: the config seed");
    sc->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
  }
  bench->add_option("--n", bench_n, "override n, one run per value")->delimiter(',');

  auto expand = [&](bool sizes) {
    std::vector<ExperimentConfig> all;
    for (const auto& path : configs) {
      const auto base = ExperimentConfig::load(path);
      const auto seeds = seeds_spec.empty() ? std::vector<std::uint64_t>{base.seed} : parse_seeds(seeds_spec);
      const auto ns = sizes && !bench_n.empty() ? bench_n : std::vector<std::size_t>{base.gen.n};
      for (auto n : ns)
        for (auto s : seeds) {
          auto c = base;
          c.gen.n = n;
          c.seed = s;
          if (sizes && !bench_n.empty()) c.name = base.name + "-n" + std::to_string(n);
          all.push_back(c);
        }
    }
    return all;
  };
  run->callback([&] {
    const auto cfgs = expand(false);
    const auto res = run_all(cfgs, jobs);
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      const auto dir = write_outcome(res[i].out, cfgs[i], out_root, res[i].seconds);
      std::cout << (res[i].out.all_pass ? "PASS " : "FAIL ") << dir.string() << '\n';
      if (!res[i].out.all_pass) code = 1;
    }
  });
  bench->callback([&] {
    const auto cfgs = expand(true);
    const auto res = run_all(cfgs, jobs);
    std::cout << "name,pipeline,n,s,machines,seed,rounds,max_sent,max_received,violations,seconds,pass\n";
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      const auto& r = res[i].out.report;
      write_outcome(res[i].out, cfgs[i], out_root, res[i].seconds);
      std::cout << cfgs[i].name << ',' << cfgs[i].pipeline << ',' << r["effective"]["n"] << ','
                << r["effective"]["s"] << ',' << r["effective"]["machines"] << ',' << cfgs[i].seed << ','
                << r["rounds"]["total"] << ',' << r["traffic"]["max_sent"] << ',' << r["traffic"]["max_received"]
                << ',' << r["traffic"]["violations"] << ',' << res[i].seconds << ','
                << (res[i].out.all_pass ? "PASS" : "FAIL") << '\n';
      if (!res[i].out.all_pass) code = 1;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return code;
}
