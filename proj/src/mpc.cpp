#include "mpcg/mpc.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace mpcg {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string trim(std::string_view v) {
  const auto b = v.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = v.find_last_not_of(" \t\r");
  return std::string(v.substr(b, e - b + 1));
}

}  // namespace

std::size_t ClusterConfig::machines() const {
  if (m != 0) return m;
  return std::max<std::size_t>(1, (n_total + s - 1) / s);
}

std::size_t ClusterConfig::capacity() const {
  return static_cast<std::size_t>(std::floor(budget_factor * static_cast<double>(s)));
}

double ClusterConfig::alpha() const {
  if (n_total < 2) return 1.0;
  return std::log(static_cast<double>(s)) / std::log(static_cast<double>(n_total));
}

void ClusterConfig::validate() const {
  if (s < 2) throw ConfigError("config", "s must be at least 2");
  if (machines() < 1) throw ConfigError("config", "need at least one machine");
  if (!(budget_factor > 0)) throw ConfigError("config", "budget_factor must be positive");
  if (!(sample_beta > 0) || sample_beta * 3 > 1.0)
    throw ConfigError("config", "sample_beta must lie in (0, 1/3]");
  if (max_round_cap == 0) throw ConfigError("config", "max_round_cap must be positive");
}

std::size_t ClusterConfig::s_for_alpha(std::size_t n, double alpha) {
  const double v = std::round(std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), alpha));
  return std::max<std::size_t>(2, static_cast<std::size_t>(v));
}

std::vector<KeyValue> parse_key_values(std::string_view text, std::string_view what) {
  std::vector<KeyValue> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(std::string(what), "line " + std::to_string(lineno) + ": expected key=value");
    out.push_back(KeyValue{trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)), lineno});
  }
  return out;
}

ClusterConfig ClusterConfig::parse(std::string_view text) {
  ClusterConfig cfg;
  std::optional<double> alpha;
  bool have_s = false;
  for (const auto& [key, val, lineno] : parse_key_values(text, "config")) {
    try {
      if (key == "n") cfg.n_total = std::stoull(val);
      else if (key == "s") cfg.s = std::stoull(val), have_s = true;
      else if (key == "alpha") alpha = std::stod(val);
      else if (key == "m") cfg.m = std::stoull(val);
      else if (key == "budget_factor") cfg.budget_factor = std::stod(val);
      else if (key == "rng_seed" || key == "seed") cfg.rng_seed = std::stoull(val);
      else if (key == "max_round_cap") cfg.max_round_cap = std::stoull(val);
      else if (key == "sample_beta") cfg.sample_beta = std::stod(val);
      else if (key == "sample_retry_cap") cfg.sample_retry_cap = std::stoull(val);
      // unknown keys belong to other consumers of the same file
    } catch (const std::logic_error&) {
      throw ConfigError("config", "line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  if (alpha && !have_s) cfg.s = s_for_alpha(cfg.n_total, *alpha);
  cfg.validate();
  return cfg;
}

ClusterConfig ClusterConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::size_t RoundStats::max_sent() const {
  return sent.empty() ? 0 : *std::max_element(sent.begin(), sent.end());
}
std::size_t RoundStats::max_received() const {
  return received.empty() ? 0 : *std::max_element(received.begin(), received.end());
}

void write_stats_jsonl(std::ostream& os, const std::vector<RoundStats>& stats) {
  for (const auto& r : stats)
    for (std::size_t i = 0; i < r.sent.size(); ++i)
      os << "{\"round\":" << r.round_index << ",\"machine\":" << i
         << ",\"sent_words\":" << r.sent[i] << ",\"received_words\":" << r.received[i]
         << ",\"store_peak\":" << r.store_peak[i] << "}\n";
}

Cluster::Cluster(ClusterConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  m_ = cfg_.machines();
  capacity_ = cfg_.capacity();
  pending_store_.assign(m_, 0);
}

bool Cluster::budget_violated() const { return violation_count() > 0; }

std::size_t Cluster::violation_count() const {
  return static_cast<std::size_t>(
      std::count_if(stats_.begin(), stats_.end(), [](const RoundStats& r) { return r.budget_violation; }));
}

std::mt19937_64 Cluster::rng(std::size_t machine, std::uint64_t salt) const {
  std::uint64_t h = splitmix(cfg_.rng_seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(machine));
  h = splitmix(h ^ static_cast<std::uint64_t>(stats_.size()));
  h = splitmix(h ^ salt);
  return std::mt19937_64(h);
}

void Cluster::note_store(std::size_t machine, std::size_t words) {
  pending_store_[machine] = std::max(pending_store_[machine], words);
}

void Cluster::finish_round(RoundStats st) {
  st.store_peak.assign(m_, 0);
  for (std::size_t i = 0; i < m_; ++i) {
    st.store_peak[i] = std::max(pending_store_[i], st.received[i]);
    if (st.sent[i] > capacity_ || st.received[i] > capacity_ || st.store_peak[i] > capacity_)
      st.budget_violation = true;
  }
  pending_store_.assign(m_, 0);
  stats_.push_back(std::move(st));
  if (stats_.size() > cfg_.max_round_cap)
    throw RoundCapExceeded("mpc", "exceeded max_round_cap=" + std::to_string(cfg_.max_round_cap));
}

ProgramResult run_program(const ClusterConfig& config, const RoundProgram& program,
                          Dist<Word> initial) {
  Cluster cl(config);
  const std::size_t m = cl.machines();
  initial.resize(m);
  ProgramResult res{std::move(initial), {}};
  if (!program) return res;
  Dist<std::vector<Word>> inbox(m, std::vector<std::vector<Word>>(m));
  for (;;) {
    Outbox<std::vector<Word>> out(m, std::vector<std::vector<std::vector<Word>>>(m));
    bool all_halt = true;
    bool any_message = false;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<std::vector<Word>> outbox(m);
      auto gen = cl.rng(i);
      MachineContext ctx{i, cl.rounds(), m, res.stores[i], inbox[i], outbox, gen};
      program(ctx);
      all_halt = all_halt && ctx.halt;
      for (std::size_t j = 0; j < m; ++j) {
        if (outbox[j].empty()) continue;
        any_message = true;
        out[i][j].push_back(std::move(outbox[j]));
      }
      cl.note_store(i, res.stores[i].size());
    }
    if (all_halt && !any_message) break;
    // Deliver, keeping the per-source split for the next compute phase.
    Dist<std::vector<Word>> next(m, std::vector<std::vector<Word>>(m));
    Outbox<Word> flat(m, std::vector<std::vector<Word>>(m));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (!out[i][j].empty()) {
          next[j][i] = out[i][j].front();
          flat[i][j] = std::move(out[i][j].front());
        }
    cl.exchange(flat, "program");
    inbox = std::move(next);
  }
  res.stats = cl.stats();
  return res;
}

}  // namespace mpcg
