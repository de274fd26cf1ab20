#pragma once

#include "mpcg/grid_graph.hpp"
#include "mpcg/mpc.hpp"

#include <optional>
#include <vector>

namespace mpcg {

/// Slab [x, x + width - 1] on dimension `dim`.
struct CDivider {
  int dim = 0;
  Coord x = 0;
  Coord width = 1;

  /// -1 left of the slab, 0 inside, +1 right of it.
  int side(const Coords& p) const {
    if (p[dim] <= x - 1) return -1;
    if (p[dim] >= x + width) return 1;
    return 0;
  }
};

struct DividerParams {
  Coord c = 1;
  int d = 3;
  double r = 2.0;      // approximation parameter, 2 s^{1/d}
  double v_est = 0.0;  // estimated ground-set size behind the sample
};

struct DividerChoice {
  CDivider divider;
  std::size_t left = 0, slab = 0, right = 0;
};

/// Searches every (dim, x) for a divider whose sample counts meet the
/// approximate binary-partition bounds: each side holds at least
/// max(1, N(1/(4d+4) - 1/r), N/(8(d+1))) points and the slab at most
/// 2c(1+d)^{1/d} N (v_est^{-1/d} + 1/r). Among qualifying dividers the one
/// with the smallest slab / min(side) ratio wins, then smallest (dim, x).
/// nullopt when none qualifies.
std::optional<DividerChoice> find_divider_local(const std::vector<Coords>& sample, const DividerParams& p);

struct PartitionNode {
  Box box;  // bounding box of the node's sample points
  std::size_t sample_count = 0;
  std::optional<CDivider> divider;
  int left = -1, right = -1;
  int leaf = -1;  // leaf ordinal when not divided
};

/// Divider tree produced by local_multi_partition. Node 0 is the root.
struct PartitionTree {
  std::vector<PartitionNode> nodes;
  int leaves = 0;

  /// Leaf ordinal of p, or -1 when p falls in a slab on its way down.
  int classify(const Coords& p) const;
  std::vector<CDivider> dividers() const;
};

/// Splits every sub-sample of size >= K with find_divider_local until none
/// remains; sub-samples with no qualifying divider become leaves.
/// `v_total` is the ground-set size the whole sample stands for.
PartitionTree local_multi_partition(const std::vector<Coords>& sample, double K, const DividerParams& p,
                                    double v_total);

enum class CeilingMode { strict, relaxed };

struct SeparatorConfig {
  CeilingMode ceiling = CeilingMode::relaxed;
  std::size_t max_super_rounds = 64;
};

/// A vertex tagged with its part; kSeparatorPart marks separator vertices.
struct PlacedVertex {
  GridVertex v;
  std::int64_t part = 0;
};
inline constexpr std::int64_t kSeparatorPart = -1;

struct PartInfo {
  std::int64_t id = 0;
  std::size_t size = 0;
  Box box;
  std::size_t first_machine = 0;
};

struct DividerLogEntry {
  std::int64_t instance = 0;
  CDivider divider;
  Box box;
};

struct PseudoSeparator {
  int d = 3;  // working dimension (2-D input is lifted)
  Dist<PlacedVertex> layout;  // sorted by (part, id); separator first
  std::vector<PartInfo> parts;
  std::vector<DividerLogEntry> dividers;
  std::size_t separator_size = 0;
  std::size_t super_rounds = 0;
  std::size_t rounds = 0;  // communication rounds spent
};

/// Ceiling check for c against s^{1/d^3}. Returns false when violated in
/// relaxed mode; throws ConfigError in strict mode.
bool check_c_ceiling(Coord c, std::size_t s, int d, CeilingMode mode);

/// Pseudo s-separator by repeated sampled super rounds. `vertices` is the
/// block-distributed vertex set; the graph's rule is only used for its
/// (d, c) parameters.
PseudoSeparator compute_pseudo_separator(Cluster& cl, Dist<GridVertex> vertices, const ImplicitGridGraph& g,
                                         const SeparatorConfig& cfg = {});

/// One super round over every active instance (|V_I| > s and not terminal).
/// Rule edges of `original` whose endpoints lie in two different parts
/// (separator vertices excluded). Exhaustive; zero for a valid separator.
std::size_t cross_part_edges(const PseudoSeparator& sep, const std::vector<GridVertex>& original,
                             const ImplicitGridGraph& g);

/// Exposed for tests; compute_pseudo_separator loops over it.
struct SuperRoundState {
  Dist<PlacedVertex> data;
  std::vector<std::int64_t> terminal;  // instance ids known to be final
  std::int64_t next_id = 1;
  std::vector<DividerLogEntry> log;
};
/// Returns false when no instance was active.
bool separator_super_round(Cluster& cl, SuperRoundState& st, int d, Coord c);

}  // namespace mpcg
