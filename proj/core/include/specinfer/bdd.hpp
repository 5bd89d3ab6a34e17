#pragma once

/// @file bdd.hpp
/// @brief Hash-consed, reduced, ordered, three-terminal decision diagrams.
///
/// Terminals are ZERO, ONE and BOT. BOT marks assignments that are invalid
/// (for example action bit patterns that encode no action) and absorbs every
/// Boolean operation. There are no complement edges; canonicity comes from
/// plain hash-consing in a monotone arena.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

namespace specinfer::bdd {

using Level = std::uint32_t;

/// Level carried by terminals so that ordering checks are uniform.
inline constexpr Level kTerminalLevel = std::numeric_limits<Level>::max();

/// Opaque handle into a Manager's node store.
class NodeRef {
public:
  constexpr NodeRef() noexcept = default;
  constexpr explicit NodeRef(std::uint32_t id) noexcept : id_(id) {}

  constexpr std::uint32_t id() const noexcept { return id_; }
  constexpr bool is_terminal() const noexcept { return id_ < 3; }

  friend constexpr auto operator<=>(NodeRef, NodeRef) noexcept = default;

private:
  std::uint32_t id_ = 0;
};

inline constexpr NodeRef ZERO{0};
inline constexpr NodeRef ONE{1};
inline constexpr NodeRef BOT{2};

/// Result of evaluating a diagram on one assignment.
enum class Value : std::uint8_t { zero, one, bot };

enum class BinOp : std::uint8_t { and_, or_, xor_, nand, nor, xnor, implies, diff };

struct Node {
  Level level = kTerminalLevel;
  NodeRef lo;
  NodeRef hi;
};

/// Node counts of a diagram. `internal` excludes terminals; `total` adds the
/// distinct terminals reachable from the root (so the constant ONE has
/// internal = 0 and total = 1).
struct SizeInfo {
  std::size_t internal = 0;
  std::size_t total = 0;
};

/// Simultaneous substitution, level -> replacement diagram.
using Substitution = std::map<Level, NodeRef>;

/// Owns every node of a family of diagrams over a fixed number of variables.
///
/// Single writer. A manager may be moved between threads but must not be
/// shared mutably.
class Manager {
public:
  explicit Manager(Level width);

  Manager(Manager&&) noexcept = default;
  Manager& operator=(Manager&&) noexcept = default;
  Manager(const Manager&) = delete;
  Manager& operator=(const Manager&) = delete;

  /// Number of declared variables; valid levels are [0, width).
  Level width() const noexcept { return width_; }

  /// The unique node testing `level` with the given branches. Returns `lo`
  /// when both branches coincide. Throws StructuralError unless `level` is
  /// strictly above the levels of both children.
  NodeRef mk(Level level, NodeRef lo, NodeRef hi);

  /// The projection function of one variable.
  NodeRef var(Level level);

  NodeRef apply(BinOp op, NodeRef f, NodeRef g);
  NodeRef negate(NodeRef f);

  /// If-then-else. Where the condition is BOT the result is BOT; elsewhere
  /// it selects `then_` or `else_` pointwise.
  NodeRef ite(NodeRef cond, NodeRef then_, NodeRef else_);

  /// `f` with every substituted variable simultaneously replaced.
  NodeRef vector_compose(NodeRef f, const Substitution& subst);

  /// Follows lo/hi per bit; `bits` must cover every declared level.
  Value eval(NodeRef f, std::span<const std::uint8_t> bits) const;

  SizeInfo size(NodeRef f) const;

  /// Number of assignments over all `width()` variables mapping to ONE.
  double count_ones(NodeRef f) const;

  /// Calls `visit` for every assignment mapping to ONE, in increasing order
  /// when bits are read with level 0 as the most significant position.
  /// Stops early once `visit` returns false.
  void for_each_one(NodeRef f,
                    const std::function<bool(std::span<const std::uint8_t>)>& visit) const;

  const Node& node(NodeRef f) const;
  Level level(NodeRef f) const { return node(f).level; }
  bool has_bot(NodeRef f) const;

  /// Nodes reachable from `f`, children before parents, terminals excluded.
  std::vector<NodeRef> post_order(NodeRef f) const;

  /// Nodes ever created, terminals included.
  std::size_t stored_nodes() const noexcept { return nodes_.size(); }

  /// Drops the apply/ite memo tables. Nodes stay valid.
  void clear_caches();

  /// Graphviz rendering of `f` for debugging.
  void write_dot(std::ostream& out, NodeRef f) const;

private:
  struct CacheKey {
    std::uint32_t a, b, c;
    bool operator==(const CacheKey&) const = default;
  };
  struct CacheKeyHash {
    std::size_t operator()(const CacheKey& k) const noexcept;
  };

  void check_handle(NodeRef f) const;
  NodeRef find_or_insert(Level level, NodeRef lo, NodeRef hi);
  void grow_table();
  NodeRef apply_rec(BinOp op, NodeRef f, NodeRef g);
  NodeRef ite_rec(NodeRef cond, NodeRef then_, NodeRef else_);

  Level width_;
  std::vector<Node> nodes_;
  std::vector<std::uint8_t> has_bot_;
  // Open-addressing unique table of node ids; 0 marks an empty slot since
  // id 0 is a terminal and is never stored.
  std::vector<std::uint32_t> table_;
  std::unordered_map<CacheKey, NodeRef, CacheKeyHash> apply_cache_;
  std::unordered_map<CacheKey, NodeRef, CacheKeyHash> ite_cache_;
};

} // namespace specinfer::bdd
