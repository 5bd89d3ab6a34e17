#include "specinfer/bdd.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <unordered_set>

#include "specinfer/error.hpp"

namespace specinfer::bdd {

namespace {

std::uint64_t mix(std::uint64_t x) noexcept {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

std::size_t triple_hash(std::uint32_t a, std::uint32_t b, std::uint32_t c) noexcept {
  const std::uint64_t lo = (static_cast<std::uint64_t>(b) << 32) | c;
  return static_cast<std::size_t>(mix(lo ^ mix(a + 0x9e3779b97f4a7c15ULL)));
}

bool eval_op(BinOp op, bool x, bool y) {
  switch (op) {
  case BinOp::and_: return x && y;
  case BinOp::or_: return x || y;
  case BinOp::xor_: return x != y;
  case BinOp::nand: return !(x && y);
  case BinOp::nor: return !(x || y);
  case BinOp::xnor: return x == y;
  case BinOp::implies: return !x || y;
  case BinOp::diff: return x && !y;
  }
  return false;
}

bool commutative(BinOp op) {
  return op != BinOp::implies && op != BinOp::diff;
}

constexpr std::size_t kInitialTable = 1 << 12;

} // namespace

std::size_t Manager::CacheKeyHash::operator()(const CacheKey& k) const noexcept {
  return triple_hash(k.a, k.b, k.c);
}

Manager::Manager(Level width) : width_(width) {
  if (width >= kTerminalLevel) {
    throw ResourceError("bdd: variable width " + std::to_string(width) + " too large");
  }
  nodes_.resize(3);
  has_bot_ = {0, 0, 1};
  table_.assign(kInitialTable, 0);
}

void Manager::check_handle(NodeRef f) const {
  if (f.id() >= nodes_.size()) {
    throw StructuralError("bdd: handle " + std::to_string(f.id()) + " does not belong to this manager");
  }
}

const Node& Manager::node(NodeRef f) const {
  check_handle(f);
  return nodes_[f.id()];
}

bool Manager::has_bot(NodeRef f) const {
  check_handle(f);
  return has_bot_[f.id()] != 0;
}

void Manager::grow_table() {
  std::vector<std::uint32_t> next(table_.size() * 2, 0);
  const std::size_t mask = next.size() - 1;
  for (std::uint32_t id = 3; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    std::size_t slot = triple_hash(n.level, n.lo.id(), n.hi.id()) & mask;
    while (next[slot] != 0) slot = (slot + 1) & mask;
    next[slot] = id;
  }
  table_ = std::move(next);
}

NodeRef Manager::find_or_insert(Level level, NodeRef lo, NodeRef hi) {
  const std::size_t mask = table_.size() - 1;
  std::size_t slot = triple_hash(level, lo.id(), hi.id()) & mask;
  while (table_[slot] != 0) {
    const Node& n = nodes_[table_[slot]];
    if (n.level == level && n.lo == lo && n.hi == hi) return NodeRef(table_[slot]);
    slot = (slot + 1) & mask;
  }
  if (nodes_.size() >= std::numeric_limits<std::uint32_t>::max() - 1) {
    throw ResourceError("bdd: node capacity exhausted");
  }
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{level, lo, hi});
  has_bot_.push_back(has_bot_[lo.id()] | has_bot_[hi.id()]);
  table_[slot] = id;
  if (2 * (nodes_.size() - 3) > table_.size()) grow_table();
  return NodeRef(id);
}

NodeRef Manager::mk(Level level, NodeRef lo, NodeRef hi) {
  check_handle(lo);
  check_handle(hi);
  if (level >= width_) {
    throw StructuralError("bdd: level " + std::to_string(level) + " outside declared width " +
                          std::to_string(width_));
  }
  if (level >= nodes_[lo.id()].level || level >= nodes_[hi.id()].level) {
    throw StructuralError("bdd: ordering violation at level " + std::to_string(level));
  }
  if (lo == hi) return lo;
  return find_or_insert(level, lo, hi);
}

NodeRef Manager::var(Level level) { return mk(level, ZERO, ONE); }

NodeRef Manager::apply(BinOp op, NodeRef f, NodeRef g) {
  check_handle(f);
  check_handle(g);
  return apply_rec(op, f, g);
}

NodeRef Manager::negate(NodeRef f) { return apply(BinOp::xor_, f, ONE); }

NodeRef Manager::apply_rec(BinOp op, NodeRef f, NodeRef g) {
  if (f == BOT || g == BOT) return BOT;
  if (f.is_terminal() && g.is_terminal()) {
    return eval_op(op, f == ONE, g == ONE) ? ONE : ZERO;
  }
  const bool f_bot = has_bot_[f.id()] != 0;
  const bool g_bot = has_bot_[g.id()] != 0;
  switch (op) {
  case BinOp::and_:
    if (f == ONE) return g;
    if (g == ONE) return f;
    if (f == ZERO && !g_bot) return ZERO;
    if (g == ZERO && !f_bot) return ZERO;
    if (f == g) return f;
    break;
  case BinOp::or_:
    if (f == ZERO) return g;
    if (g == ZERO) return f;
    if (f == ONE && !g_bot) return ONE;
    if (g == ONE && !f_bot) return ONE;
    if (f == g) return f;
    break;
  case BinOp::xor_:
    if (f == ZERO) return g;
    if (g == ZERO) return f;
    if (f == g && !f_bot) return ZERO;
    break;
  default:
    break;
  }
  if (commutative(op) && g < f) std::swap(f, g);

  const CacheKey key{static_cast<std::uint32_t>(op), f.id(), g.id()};
  if (auto it = apply_cache_.find(key); it != apply_cache_.end()) return it->second;

  const Node fn = nodes_[f.id()];
  const Node gn = nodes_[g.id()];
  const Level top = std::min(fn.level, gn.level);
  const NodeRef f0 = fn.level == top ? fn.lo : f;
  const NodeRef f1 = fn.level == top ? fn.hi : f;
  const NodeRef g0 = gn.level == top ? gn.lo : g;
  const NodeRef g1 = gn.level == top ? gn.hi : g;
  const NodeRef lo = apply_rec(op, f0, g0);
  const NodeRef hi = apply_rec(op, f1, g1);
  const NodeRef r = lo == hi ? lo : find_or_insert(top, lo, hi);
  apply_cache_.emplace(key, r);
  return r;
}

NodeRef Manager::ite(NodeRef cond, NodeRef then_, NodeRef else_) {
  check_handle(cond);
  check_handle(then_);
  check_handle(else_);
  return ite_rec(cond, then_, else_);
}

NodeRef Manager::ite_rec(NodeRef c, NodeRef t, NodeRef e) {
  if (c == BOT) return BOT;
  if (c == ONE) return t;
  if (c == ZERO) return e;
  if (t == ONE && e == ZERO) return c;
  if (t == e && has_bot_[c.id()] == 0) return t;
  if (t == BOT && e == BOT) return BOT;

  const CacheKey key{c.id(), t.id(), e.id()};
  if (auto it = ite_cache_.find(key); it != ite_cache_.end()) return it->second;

  const Node cn = nodes_[c.id()];
  const Node tn = nodes_[t.id()];
  const Node en = nodes_[e.id()];
  const Level top = std::min({cn.level, tn.level, en.level});
  const auto lo_of = [top](NodeRef r, const Node& n) { return n.level == top ? n.lo : r; };
  const auto hi_of = [top](NodeRef r, const Node& n) { return n.level == top ? n.hi : r; };
  const NodeRef lo = ite_rec(lo_of(c, cn), lo_of(t, tn), lo_of(e, en));
  const NodeRef hi = ite_rec(hi_of(c, cn), hi_of(t, tn), hi_of(e, en));
  const NodeRef r = lo == hi ? lo : find_or_insert(top, lo, hi);
  ite_cache_.emplace(key, r);
  return r;
}

NodeRef Manager::vector_compose(NodeRef f, const Substitution& subst) {
  check_handle(f);
  if (subst.empty()) return f;
  std::vector<NodeRef> replacement(width_);
  std::vector<std::uint8_t> substituted(width_, 0);
  Level deepest = 0;
  for (const auto& [level, g] : subst) {
    if (level >= width_) {
      throw StructuralError("bdd: substitution for level " + std::to_string(level) +
                            " outside declared width " + std::to_string(width_));
    }
    check_handle(g);
    replacement[level] = g;
    substituted[level] = 1;
    deepest = std::max(deepest, level);
  }

  std::unordered_map<std::uint32_t, NodeRef> memo;
  const std::function<NodeRef(NodeRef)> rec = [&](NodeRef n) -> NodeRef {
    if (n.is_terminal()) return n;
    const Node node = nodes_[n.id()];
    if (node.level > deepest) return n;
    if (auto it = memo.find(n.id()); it != memo.end()) return it->second;
    const NodeRef lo = rec(node.lo);
    const NodeRef hi = rec(node.hi);
    const NodeRef cond = substituted[node.level] ? replacement[node.level] : var(node.level);
    const NodeRef r = ite_rec(cond, hi, lo);
    memo.emplace(n.id(), r);
    return r;
  };
  return rec(f);
}

Value Manager::eval(NodeRef f, std::span<const std::uint8_t> bits) const {
  check_handle(f);
  if (bits.size() != width_) {
    throw StructuralError("bdd: assignment has " + std::to_string(bits.size()) +
                          " bits, expected " + std::to_string(width_));
  }
  NodeRef n = f;
  while (!n.is_terminal()) {
    const Node& node = nodes_[n.id()];
    n = bits[node.level] ? node.hi : node.lo;
  }
  if (n == ONE) return Value::one;
  if (n == ZERO) return Value::zero;
  return Value::bot;
}

std::vector<NodeRef> Manager::post_order(NodeRef f) const {
  check_handle(f);
  std::vector<NodeRef> order;
  if (f.is_terminal()) return order;
  std::vector<std::uint8_t> seen(nodes_.size(), 0);
  // Explicit stack: (node, children expanded?)
  std::vector<std::pair<NodeRef, bool>> stack{{f, false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      order.push_back(n);
      continue;
    }
    if (seen[n.id()]) continue;
    seen[n.id()] = 1;
    stack.emplace_back(n, true);
    const Node& node = nodes_[n.id()];
    for (NodeRef c : {node.hi, node.lo}) {
      if (!c.is_terminal() && !seen[c.id()]) stack.emplace_back(c, false);
    }
  }
  return order;
}

SizeInfo Manager::size(NodeRef f) const {
  check_handle(f);
  if (f.is_terminal()) return {0, 1};
  const auto order = post_order(f);
  bool terminal_seen[3] = {false, false, false};
  for (NodeRef n : order) {
    const Node& node = nodes_[n.id()];
    if (node.lo.is_terminal()) terminal_seen[node.lo.id()] = true;
    if (node.hi.is_terminal()) terminal_seen[node.hi.id()] = true;
  }
  const std::size_t terminals = static_cast<std::size_t>(terminal_seen[0]) +
                                static_cast<std::size_t>(terminal_seen[1]) +
                                static_cast<std::size_t>(terminal_seen[2]);
  return {order.size(), order.size() + terminals};
}

double Manager::count_ones(NodeRef f) const {
  check_handle(f);
  // Fraction of assignments reaching ONE, scaled at the end.
  std::unordered_map<std::uint32_t, double> frac;
  const auto value = [&](NodeRef n) {
    if (n == ONE) return 1.0;
    if (n.is_terminal()) return 0.0;
    return frac.at(n.id());
  };
  for (NodeRef n : post_order(f)) {
    const Node& node = nodes_[n.id()];
    frac[n.id()] = 0.5 * (value(node.lo) + value(node.hi));
  }
  return std::ldexp(value(f), static_cast<int>(width_));
}

void Manager::for_each_one(NodeRef f,
                           const std::function<bool(std::span<const std::uint8_t>)>& visit) const {
  check_handle(f);
  std::vector<std::uint8_t> bits(width_, 0);
  const std::function<bool(Level, NodeRef)> rec = [&](Level pos, NodeRef n) -> bool {
    if (n == ZERO || n == BOT) return true;
    if (pos == width_) return visit(bits);
    const Node& node = nodes_[n.id()];
    const bool tested = node.level == pos;
    for (std::uint8_t b : {std::uint8_t{0}, std::uint8_t{1}}) {
      bits[pos] = b;
      const NodeRef next = tested ? (b ? node.hi : node.lo) : n;
      if (!rec(pos + 1, next)) return false;
    }
    bits[pos] = 0;
    return true;
  };
  rec(0, f);
}

void Manager::clear_caches() {
  apply_cache_.clear();
  ite_cache_.clear();
}

void Manager::write_dot(std::ostream& out, NodeRef f) const {
  check_handle(f);
  out << "digraph bdd {\n";
  out << "  t0 [shape=box,label=\"0\"];\n";
  out << "  t1 [shape=box,label=\"1\"];\n";
  out << "  t2 [shape=box,label=\"⊥\"];\n";
  const auto name = [](NodeRef n) {
    return (n.is_terminal() ? "t" : "n") + std::to_string(n.id());
  };
  for (NodeRef n : post_order(f)) {
    const Node& node = nodes_[n.id()];
    out << "  " << name(n) << " [label=\"" << n.id() << " @" << node.level << "\"];\n";
    out << "  " << name(n) << " -> " << name(node.lo) << " [style=dashed];\n";
    out << "  " << name(n) << " -> " << name(node.hi) << ";\n";
  }
  if (f.is_terminal()) out << "  root -> " << name(f) << ";\n";
  out << "}\n";
}

} // namespace specinfer::bdd
