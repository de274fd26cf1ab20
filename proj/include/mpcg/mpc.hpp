#pragma once

// Simulated Massively Parallel Computation cluster.
//
// m machines each own a local store. Machines interact only by handing
// messages to Cluster::exchange, which is the round barrier: it delivers
// every outbox, charges the words to sender and receiver, and appends one
// RoundStats entry. Everything else in this header (sort, broadcast,
// duplicate removal, sampling) is built from exchange calls, so the round
// and traffic numbers it reports are exactly what the algorithms pay.

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mpcg/common.hpp"

namespace mpcg {

template <class T>
using Dist = std::vector<std::vector<T>>;  // [machine] -> local records

template <class T>
using Outbox = std::vector<std::vector<std::vector<T>>>;  // [src][dst]

/// Traffic is charged per fixed-size record. A record type that is not a
/// constant number of fields overloads record_words in its own namespace.
template <class T>
std::size_t record_words(const T&) {
  return 1;
}
template <class T>
std::size_t record_words(const std::vector<T>& v) {
  return std::max<std::size_t>(1, v.size());
}

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// `key = value` lines; '#' starts a comment, blank lines are skipped.
std::vector<KeyValue> parse_key_values(std::string_view text, std::string_view what);

struct ClusterConfig {
  std::size_t n_total = 0;
  std::size_t s = 2;
  std::size_t m = 0;  // 0 selects ceil(n_total / s)
  double budget_factor = 8.0;
  std::uint64_t rng_seed = 1;
  std::size_t max_round_cap = 200000;
  double sample_beta = 0.25;  // sample target k = beta * s
  std::size_t sample_retry_cap = 64;

  std::size_t machines() const;
  std::size_t capacity() const;  // floor(budget_factor * s)
  double alpha() const;          // log_n s, metadata only
  void validate() const;

  /// Parses `key = value` lines; '#' starts a comment. Recognised keys: n,
  /// s, alpha (sets s = round(n^alpha)), m, budget_factor, rng_seed / seed,
  /// max_round_cap, sample_beta, sample_retry_cap.
  static ClusterConfig parse(std::string_view text);
  static ClusterConfig load(const std::string& path);

  /// s = round(n^alpha), clamped to at least 2.
  static std::size_t s_for_alpha(std::size_t n, double alpha);
};

struct RoundStats {
  std::size_t round_index = 0;
  std::string phase;
  std::vector<std::size_t> sent;
  std::vector<std::size_t> received;
  std::vector<std::size_t> store_peak;
  bool budget_violation = false;

  std::size_t max_sent() const;
  std::size_t max_received() const;
};

/// One JSON object per (round, machine).
void write_stats_jsonl(std::ostream& os, const std::vector<RoundStats>& stats);

class Cluster {
 public:
  explicit Cluster(ClusterConfig cfg);

  const ClusterConfig& config() const { return cfg_; }
  std::size_t machines() const { return m_; }
  std::size_t s() const { return cfg_.s; }
  std::size_t capacity() const { return capacity_; }

  std::size_t rounds() const { return stats_.size(); }
  const std::vector<RoundStats>& stats() const { return stats_; }
  bool budget_violated() const;
  std::size_t violation_count() const;

  /// Deterministic stream for (seed, machine, current round, salt).
  std::mt19937_64 rng(std::size_t machine, std::uint64_t salt = 0) const;

  /// Raises the resident-store mark of `machine` for the next round.
  void note_store(std::size_t machine, std::size_t words);
  template <class T>
  void note_store(const Dist<T>& data) {
    for (std::size_t i = 0; i < data.size(); ++i) note_store(i, words_of(data[i]));
  }

  template <class T>
  Outbox<T> make_outbox() const {
    return Outbox<T>(m_, std::vector<std::vector<T>>(m_));
  }

  /// Communication phase of one round. Inboxes concatenate senders in
  /// ascending machine order.
  template <class T>
  Dist<T> exchange(Outbox<T>& out, std::string_view phase) {
    RoundStats st;
    st.round_index = stats_.size() + 1;
    st.phase = std::string(phase);
    st.sent.assign(m_, 0);
    st.received.assign(m_, 0);
    Dist<T> in(m_);
    for (std::size_t src = 0; src < m_; ++src) {
      for (std::size_t dst = 0; dst < m_; ++dst) {
        auto& box = out[src][dst];
        const std::size_t w = words_of(box);
        st.sent[src] += w;
        st.received[dst] += w;
        auto& inbox = in[dst];
        inbox.insert(inbox.end(), std::make_move_iterator(box.begin()),
                     std::make_move_iterator(box.end()));
        box.clear();
      }
    }
    finish_round(std::move(st));
    return in;
  }

  template <class T>
  static std::size_t words_of(const std::vector<T>& v) {
    std::size_t w = 0;
    for (const auto& r : v) w += record_words(r);
    return w;
  }

 private:
  void finish_round(RoundStats st);

  ClusterConfig cfg_;
  std::size_t m_;
  std::size_t capacity_;
  std::vector<RoundStats> stats_;
  std::vector<std::size_t> pending_store_;
};

/// Block distribution by input order: ceil(n/m) records per machine.
template <class T>
Dist<T> distribute_blocks(const std::vector<T>& items, std::size_t m) {
  Dist<T> d(m);
  if (items.empty()) return d;
  const std::size_t per = (items.size() + m - 1) / m;
  for (std::size_t i = 0; i < items.size(); ++i) d[i / per].push_back(items[i]);
  return d;
}

template <class T>
std::vector<T> flatten(const Dist<T>& d) {
  std::vector<T> out;
  for (const auto& part : d) out.insert(out.end(), part.begin(), part.end());
  return out;
}

template <class T>
std::size_t total_size(const Dist<T>& d) {
  std::size_t n = 0;
  for (const auto& part : d) n += part.size();
  return n;
}

// ---------------------------------------------------------------------------
// Generic BSP driver over word stores.

using Word = std::int64_t;

struct MachineContext {
  std::size_t machine;
  std::size_t round;  // number of completed communication rounds
  std::size_t machines;
  std::vector<Word>& store;
  const std::vector<std::vector<Word>>& inbox;  // [src]
  std::vector<std::vector<Word>>& outbox;       // [dst]
  std::mt19937_64& rng;
  bool halt = true;  // vote; messages in outbox keep the program alive
};

using RoundProgram = std::function<void(MachineContext&)>;

struct ProgramResult {
  Dist<Word> stores;
  std::vector<RoundStats> stats;
};

/// Alternates compute and communicate until every machine votes to halt with
/// an empty outbox. Budget violations are recorded, never fatal. Throws
/// RoundCapExceeded past config.max_round_cap rounds.
ProgramResult run_program(const ClusterConfig& config, const RoundProgram& program,
                          Dist<Word> initial);

// ---------------------------------------------------------------------------
// Atomic operations.

/// Machine `dest` receives every record (one round).
template <class T>
std::vector<T> gather_to(Cluster& cl, const Dist<T>& data, std::size_t dest,
                         std::string_view phase) {
  auto out = cl.make_outbox<T>();
  for (std::size_t i = 0; i < cl.machines(); ++i) out[i][dest] = data[i];
  auto in = cl.exchange(out, phase);
  return std::move(in[dest]);
}

/// Every machine sends one small value to every machine (one round).
/// Element j of the result is machine j's contribution; every machine ends
/// up holding the same vector.
template <class T>
std::vector<T> all_gather(Cluster& cl, const std::vector<T>& per_machine, std::string_view phase) {
  const std::size_t m = cl.machines();
  if (m == 1) return per_machine;
  auto out = cl.make_outbox<T>();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i][j].push_back(per_machine[i]);
  auto in = cl.exchange(out, phase);
  return in[0];
}

/// Two-round broadcast of |payload| <= s records held by `source`: split
/// into m near-equal parts, then every part holder re-sends its part to all
/// others. Returns the payload as held by every machine.
template <class T>
Dist<T> broadcast(Cluster& cl, std::size_t source, const std::vector<T>& payload,
                  std::string_view phase = "broadcast") {
  const std::size_t m = cl.machines();
  if (Cluster::words_of(payload) > cl.s())
    throw BudgetError("broadcast", "payload of " + std::to_string(payload.size()) +
                                       " records exceeds s=" + std::to_string(cl.s()));
  if (m > cl.s()) throw ConfigError("broadcast", "requires m <= s");
  if (m == 1) return Dist<T>{payload};

  // Round 1: part i goes to machine i.
  auto out = cl.make_outbox<T>();
  const std::size_t per = (payload.size() + m - 1) / m;
  for (std::size_t i = 0; i < payload.size(); ++i) out[source][per ? i / per : 0].push_back(payload[i]);
  auto parts = cl.exchange(out, phase);

  // Round 2: each part to every other machine; reassemble in part order.
  auto out2 = cl.make_outbox<T>();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) out2[i][j] = parts[i];
  cl.exchange(out2, phase);
  Dist<T> result(m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) result[j].insert(result[j].end(), parts[i].begin(), parts[i].end());
  return result;
}

/// Total record count, learned by `dest` (one round).
template <class T>
std::size_t count_to(Cluster& cl, const Dist<T>& data, std::size_t dest, std::string_view phase) {
  auto out = cl.make_outbox<std::int64_t>();
  for (std::size_t i = 0; i < cl.machines(); ++i)
    out[i][dest].push_back(static_cast<std::int64_t>(data[i].size()));
  auto in = cl.exchange(out, phase);
  std::size_t n = 0;
  for (auto c : in[dest]) n += static_cast<std::size_t>(c);
  return n;
}

struct SampleOutcome {
  std::size_t attempts = 0;
  std::size_t population = 0;
};

/// Bernoulli sampling with retry: every record becomes a candidate with
/// probability min(1, 2k/|V|); the attempt succeeds when the candidate
/// count lies in [k, 3k], and the candidates are then shipped to
/// `coordinator`. Requires |V| >= k and 3k <= capacity. When every machine already
/// knows |V| the caller passes it as `known_population` and the two
/// counting rounds are skipped.
template <class T>
std::vector<T> sample_subset(Cluster& cl, const Dist<T>& data, std::size_t k,
                             std::size_t coordinator = 0, SampleOutcome* outcome = nullptr,
                             std::optional<std::size_t> known_population = std::nullopt) {
  const std::size_t m = cl.machines();
  if (3 * k > cl.capacity()) throw ConfigError("sample_subset", "3k must not exceed the machine capacity");
  std::size_t n = 0;
  if (known_population) {
    n = *known_population;
  } else {
    n = count_to(cl, data, coordinator, "sample.count");
  }
  if (n < k || k == 0)
    throw std::invalid_argument("sample_subset: population smaller than k; caller must skip");
  if (!known_population) {
    auto out = cl.make_outbox<std::int64_t>();
    for (std::size_t j = 0; j < m; ++j) out[coordinator][j].push_back(static_cast<std::int64_t>(n));
    cl.exchange(out, "sample.size");
  }
  const double p = std::min(1.0, 2.0 * static_cast<double>(k) / static_cast<double>(n));
  for (std::size_t attempt = 1; attempt <= cl.config().sample_retry_cap; ++attempt) {
    Dist<std::size_t> picked(m);
    auto out = cl.make_outbox<std::int64_t>();
    for (std::size_t i = 0; i < m; ++i) {
      auto gen = cl.rng(i, 0x5a17);
      std::bernoulli_distribution coin(p);
      for (std::size_t r = 0; r < data[i].size(); ++r)
        if (p >= 1.0 || coin(gen)) picked[i].push_back(r);
      out[i][coordinator].push_back(static_cast<std::int64_t>(picked[i].size()));
    }
    auto counts = cl.exchange(out, "sample.candidates");
    std::size_t total = 0;
    for (auto c : counts[coordinator]) total += static_cast<std::size_t>(c);
    const bool ok = total >= k && total <= 3 * k;
    auto verdict = cl.make_outbox<std::int64_t>();
    for (std::size_t j = 0; j < m; ++j) verdict[coordinator][j].push_back(ok ? 1 : 0);
    cl.exchange(verdict, "sample.verdict");
    if (!ok) continue;
    auto ship = cl.make_outbox<T>();
    for (std::size_t i = 0; i < m; ++i)
      for (auto r : picked[i]) ship[i][coordinator].push_back(data[i][r]);
    auto in = cl.exchange(ship, "sample.collect");
    if (outcome) *outcome = SampleOutcome{attempt, n};
    return std::move(in[coordinator]);
  }
  throw SamplingFailure("sample_subset", "no attempt produced a sample in [k, 3k]");
}

namespace detail {

template <class T>
struct Tagged {
  T rec;
  std::uint32_t origin;
  std::uint64_t offset;
};

template <class T>
std::size_t record_words(const Tagged<T>& t) {
  using mpcg::record_words;
  return record_words(t.rec);
}

template <class T, class Less>
struct TaggedLess {
  Less less;
  bool operator()(const Tagged<T>& a, const Tagged<T>& b) const {
    if (less(a.rec, b.rec)) return true;
    if (less(b.rec, a.rec)) return false;
    return std::tie(a.origin, a.offset) < std::tie(b.origin, b.offset);
  }
};

}  // namespace detail

/// Sample sort. Afterwards machine i holds a sorted run and every key on
/// machine i precedes every key on machine i+1. Equal keys keep their
/// (origin machine, local offset) order, so the result is deterministic.
template <class T, class Less>
void mpc_sort(Cluster& cl, Dist<T>& data, Less less, std::string_view phase = "sort") {
  using detail::Tagged;
  const std::size_t m = cl.machines();
  if (m == 1) {
    std::stable_sort(data[0].begin(), data[0].end(), less);
    return;
  }
  Dist<Tagged<T>> tagged(m);
  for (std::size_t i = 0; i < m; ++i) {
    tagged[i].reserve(data[i].size());
    for (std::size_t r = 0; r < data[i].size(); ++r)
      tagged[i].push_back(Tagged<T>{std::move(data[i][r]), static_cast<std::uint32_t>(i), r});
  }
  detail::TaggedLess<T, Less> tless{less};
  const std::string ph(phase);

  // With many machines the beta*s sample leaves too few candidates per
  // bucket; oversample up to a third of one machine's capacity.
  const std::size_t k = std::max<std::size_t>(
      {1, static_cast<std::size_t>(cl.config().sample_beta * static_cast<double>(cl.s())),
       std::min(8 * m, cl.capacity() / 3)});
  const std::size_t n = count_to(cl, tagged, 0, ph + ".count");
  {
    auto out = cl.make_outbox<std::int64_t>();
    for (std::size_t j = 0; j < m; ++j) out[0][j].push_back(static_cast<std::int64_t>(n));
    cl.exchange(out, ph + ".count");
  }
  if (n == 0) {
    for (auto& d : data) d.clear();
    return;
  }

  // Always the Bernoulli route, so the round schedule does not depend on n.
  // For n <= 2k every record is a candidate.
  auto sample = sample_subset(cl, tagged, std::min(k, n), 0, nullptr, n);
  std::sort(sample.begin(), sample.end(), tless);
  std::vector<Tagged<T>> splitters;
  for (std::size_t j = 1; j < m; ++j) splitters.push_back(sample[(j * sample.size()) / m]);
  auto everywhere = broadcast(cl, 0, splitters, ph + ".splitters");

  auto out = cl.make_outbox<Tagged<T>>();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& sp = everywhere[i];
    for (auto& t : tagged[i]) {
      const std::size_t dst =
          static_cast<std::size_t>(std::upper_bound(sp.begin(), sp.end(), t, tless) - sp.begin());
      out[i][dst].push_back(std::move(t));
    }
  }
  auto in = cl.exchange(out, ph + ".route");
  for (std::size_t i = 0; i < m; ++i) {
    std::sort(in[i].begin(), in[i].end(), tless);
    data[i].clear();
    data[i].reserve(in[i].size());
    for (auto& t : in[i]) data[i].push_back(std::move(t.rec));
  }
  cl.note_store(data);
}

/// Sort, then drop every record equal (under `less`) to its predecessor.
/// The predecessor of a machine's first record is the last record of the
/// nearest non-empty machine before it, learned in one all-gather round.
template <class T, class Less>
void mpc_dedup(Cluster& cl, Dist<T>& data, Less less, std::string_view phase = "dedup") {
  mpc_sort(cl, data, less, std::string(phase) + ".sort");
  const std::size_t m = cl.machines();
  auto same = [&](const T& a, const T& b) { return !less(a, b) && !less(b, a); };
  std::vector<std::optional<T>> lasts(m);
  if (m > 1) {
    std::vector<std::vector<T>> last_rec(m);
    for (std::size_t i = 0; i < m; ++i)
      if (!data[i].empty()) last_rec[i].push_back(data[i].back());
    auto seen = all_gather(cl, last_rec, std::string(phase) + ".boundary");
    for (std::size_t i = 0; i < m; ++i)
      if (!seen[i].empty()) lasts[i] = seen[i].front();
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::optional<T> prev;
    for (std::size_t j = i; j-- > 0;)
      if (lasts[j]) {
        prev = lasts[j];
        break;
      }
    std::vector<T> kept;
    kept.reserve(data[i].size());
    for (auto& r : data[i]) {
      if (prev && same(*prev, r)) continue;
      prev = r;
      kept.push_back(std::move(r));
    }
    data[i] = std::move(kept);
  }
}

}  // namespace mpcg
