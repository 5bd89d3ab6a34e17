#include "specinfer/circuit.hpp"

#include <algorithm>
#include <string>

#include "specinfer/error.hpp"

namespace specinfer {

namespace {
constexpr Wire kFalse{0};
constexpr Wire kTrue{1};
} // namespace

std::size_t Circuit::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = static_cast<std::size_t>(k.kind);
  for (std::uint32_t x : {k.a, k.b, k.c}) h = h * 0x100000001b3ULL ^ x;
  return h;
}

Circuit::Circuit() {
  gates_.push_back(Gate{GateKind::constant, 0});
  gates_.push_back(Gate{GateKind::constant, 1});
}

Wire Circuit::add(Gate g) {
  const Key key{g.kind, g.a, g.b, g.c};
  if (auto it = interned_.find(key); it != interned_.end()) return it->second;
  const Wire w(static_cast<std::uint32_t>(gates_.size()));
  gates_.push_back(g);
  interned_.emplace(key, w);
  return w;
}

bool Circuit::is_const(Wire w, bool value) const { return w == (value ? kTrue : kFalse); }

Wire Circuit::constant(bool value) { return value ? kTrue : kFalse; }

Wire Circuit::input(Port port, std::uint32_t index) {
  return add(Gate{GateKind::input, static_cast<std::uint32_t>(port), index});
}

Wire Circuit::not_(Wire x) {
  if (is_const(x, false)) return kTrue;
  if (is_const(x, true)) return kFalse;
  const Gate& g = gates_.at(x.id());
  if (g.kind == GateKind::not_) return Wire(g.a);
  return add(Gate{GateKind::not_, x.id()});
}

Wire Circuit::and_(Wire x, Wire y) {
  if (is_const(x, false) || is_const(y, false)) return kFalse;
  if (is_const(x, true)) return y;
  if (is_const(y, true)) return x;
  if (x == y) return x;
  const Gate& gx = gates_.at(x.id());
  const Gate& gy = gates_.at(y.id());
  if ((gx.kind == GateKind::not_ && gx.a == y.id()) || (gy.kind == GateKind::not_ && gy.a == x.id())) {
    return kFalse;
  }
  if (y.id() < x.id()) std::swap(x, y);
  return add(Gate{GateKind::and_, x.id(), y.id()});
}

Wire Circuit::or_(Wire x, Wire y) {
  if (is_const(x, true) || is_const(y, true)) return kTrue;
  if (is_const(x, false)) return y;
  if (is_const(y, false)) return x;
  if (x == y) return x;
  const Gate& gx = gates_.at(x.id());
  const Gate& gy = gates_.at(y.id());
  if ((gx.kind == GateKind::not_ && gx.a == y.id()) || (gy.kind == GateKind::not_ && gy.a == x.id())) {
    return kTrue;
  }
  if (y.id() < x.id()) std::swap(x, y);
  return add(Gate{GateKind::or_, x.id(), y.id()});
}

Wire Circuit::xor_(Wire x, Wire y) {
  if (is_const(x, false)) return y;
  if (is_const(y, false)) return x;
  if (is_const(x, true)) return not_(y);
  if (is_const(y, true)) return not_(x);
  if (x == y) return kFalse;
  if (y.id() < x.id()) std::swap(x, y);
  return add(Gate{GateKind::xor_, x.id(), y.id()});
}

Wire Circuit::ite(Wire cond, Wire then_, Wire else_) {
  if (is_const(cond, true)) return then_;
  if (is_const(cond, false)) return else_;
  if (then_ == else_) return then_;
  if (is_const(then_, true) && is_const(else_, false)) return cond;
  if (is_const(then_, false) && is_const(else_, true)) return not_(cond);
  if (is_const(else_, false)) return and_(cond, then_);
  if (is_const(then_, true)) return or_(cond, else_);
  return add(Gate{GateKind::ite, cond.id(), then_.id(), else_.id()});
}

Wire Circuit::and_all(std::span<const Wire> xs) {
  Wire acc = kTrue;
  for (Wire x : xs) acc = and_(acc, x);
  return acc;
}

Wire Circuit::or_all(std::span<const Wire> xs) {
  Wire acc = kFalse;
  for (Wire x : xs) acc = or_(acc, x);
  return acc;
}

std::vector<std::uint8_t> Circuit::evaluate(const Valuation& v) const {
  std::vector<std::uint8_t> val(gates_.size(), 0);
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    const Gate& g = gates_[i];
    switch (g.kind) {
    case GateKind::constant: val[i] = static_cast<std::uint8_t>(g.a); break;
    case GateKind::input: {
      std::uint64_t word = 0;
      switch (static_cast<Port>(g.a)) {
      case Port::state: word = v.state; break;
      case Port::action: word = v.action; break;
      case Port::coin: word = v.coin; break;
      case Port::history: word = v.history; break;
      }
      val[i] = g.b < 64 && bit_of(word, g.b);
      break;
    }
    case GateKind::not_: val[i] = !val[g.a]; break;
    case GateKind::and_: val[i] = val[g.a] && val[g.b]; break;
    case GateKind::or_: val[i] = val[g.a] || val[g.b]; break;
    case GateKind::xor_: val[i] = val[g.a] != val[g.b]; break;
    case GateKind::ite: val[i] = val[g.a] ? val[g.b] : val[g.c]; break;
    }
  }
  return val;
}

bool Circuit::eval(Wire w, const Valuation& v) const { return evaluate(v).at(w.id()) != 0; }

std::uint32_t Circuit::input_width(Port port) const {
  std::uint32_t width = 0;
  for (const Gate& g : gates_) {
    if (g.kind == GateKind::input && static_cast<Port>(g.a) == port) width = std::max(width, g.b + 1);
  }
  return width;
}

bool Circuit::depends_on(Wire root, Port port) const {
  std::vector<std::uint8_t> seen(gates_.size(), 0);
  std::vector<std::uint32_t> stack{root.id()};
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    if (seen.at(id)) continue;
    seen[id] = 1;
    const Gate& g = gates_[id];
    switch (g.kind) {
    case GateKind::input:
      if (static_cast<Port>(g.a) == port) return true;
      break;
    case GateKind::ite: stack.push_back(g.c); [[fallthrough]];
    case GateKind::and_:
    case GateKind::or_:
    case GateKind::xor_: stack.push_back(g.b); [[fallthrough]];
    case GateKind::not_: stack.push_back(g.a); break;
    default: break;
    }
  }
  return false;
}

std::vector<Wire> Circuit::import(const Circuit& other, std::span<const Wire> roots,
                                  const std::function<Wire(Input)>& map_input) {
  std::vector<std::uint8_t> live(other.gates_.size(), 0);
  std::vector<std::uint32_t> stack;
  for (Wire r : roots) stack.push_back(r.id());
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    if (live.at(id)) continue;
    live[id] = 1;
    const Gate& g = other.gates_[id];
    switch (g.kind) {
    case GateKind::ite: stack.push_back(g.c); [[fallthrough]];
    case GateKind::and_:
    case GateKind::or_:
    case GateKind::xor_: stack.push_back(g.b); [[fallthrough]];
    case GateKind::not_: stack.push_back(g.a); break;
    default: break;
    }
  }

  std::vector<Wire> mapped(other.gates_.size());
  for (std::uint32_t id = 0; id < other.gates_.size(); ++id) {
    if (!live[id]) continue;
    const Gate& g = other.gates_[id];
    switch (g.kind) {
    case GateKind::constant: mapped[id] = constant(g.a != 0); break;
    case GateKind::input: mapped[id] = map_input(Input{static_cast<Port>(g.a), g.b}); break;
    case GateKind::not_: mapped[id] = not_(mapped[g.a]); break;
    case GateKind::and_: mapped[id] = and_(mapped[g.a], mapped[g.b]); break;
    case GateKind::or_: mapped[id] = or_(mapped[g.a], mapped[g.b]); break;
    case GateKind::xor_: mapped[id] = xor_(mapped[g.a], mapped[g.b]); break;
    case GateKind::ite: mapped[id] = ite(mapped[g.a], mapped[g.b], mapped[g.c]); break;
    }
  }
  std::vector<Wire> out;
  out.reserve(roots.size());
  for (Wire r : roots) out.push_back(mapped[r.id()]);
  return out;
}

unsigned bits_for(std::uint64_t count) noexcept {
  unsigned bits = 0;
  while (bits < 64 && (std::uint64_t{1} << bits) < count) ++bits;
  return bits;
}

namespace wires {

std::vector<Wire> inputs(Circuit& c, Port port, unsigned width) {
  std::vector<Wire> out;
  out.reserve(width);
  for (unsigned i = 0; i < width; ++i) out.push_back(c.input(port, i));
  return out;
}

Wire equals_const(Circuit& c, std::span<const Wire> word, std::uint64_t value) {
  if (word.size() < 64 && (value >> word.size()) != 0) return c.constant(false);
  Wire acc = c.constant(true);
  for (std::size_t i = 0; i < word.size(); ++i) {
    acc = c.and_(acc, bit_of(value, static_cast<unsigned>(i)) ? word[i] : c.not_(word[i]));
  }
  return acc;
}

Wire less_than_const(Circuit& c, std::span<const Wire> word, std::uint64_t bound) {
  if (word.size() < 64 && (bound >> word.size()) != 0) return c.constant(true);
  // Scan from the least significant bit so each step folds in one more
  // significant position.
  Wire lt = c.constant(false);
  for (std::size_t i = 0; i < word.size(); ++i) {
    const Wire w = word[i];
    lt = bit_of(bound, static_cast<unsigned>(i)) ? c.or_(c.not_(w), lt) : c.and_(c.not_(w), lt);
  }
  return lt;
}

std::vector<Wire> constant_word(Circuit& c, unsigned width, std::uint64_t value) {
  std::vector<Wire> out;
  for (unsigned i = 0; i < width; ++i) out.push_back(c.constant(bit_of(value, i)));
  return out;
}

std::vector<Wire> increment(Circuit& c, std::span<const Wire> word) {
  std::vector<Wire> out;
  Wire carry = c.constant(true);
  for (Wire w : word) {
    out.push_back(c.xor_(w, carry));
    carry = c.and_(w, carry);
  }
  return out;
}

std::vector<Wire> decrement(Circuit& c, std::span<const Wire> word) {
  std::vector<Wire> out;
  Wire borrow = c.constant(true);
  for (Wire w : word) {
    out.push_back(c.xor_(w, borrow));
    borrow = c.and_(c.not_(w), borrow);
  }
  return out;
}

std::vector<Wire> mux(Circuit& c, Wire cond, std::span<const Wire> then_, std::span<const Wire> else_) {
  if (then_.size() != else_.size()) throw DomainError("circuit: mux operands differ in width");
  std::vector<Wire> out;
  for (std::size_t i = 0; i < then_.size(); ++i) out.push_back(c.ite(cond, then_[i], else_[i]));
  return out;
}

} // namespace wires

} // namespace specinfer
