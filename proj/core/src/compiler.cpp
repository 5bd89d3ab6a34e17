#include "specinfer/compiler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>

#include "specinfer/error.hpp"

namespace specinfer {

using bdd::Level;
using bdd::NodeRef;

LevelMeta::LevelMeta(unsigned horizon, unsigned action_bits, unsigned coin_bits)
    : horizon_(horizon), action_bits_(action_bits), coin_bits_(coin_bits) {}

LevelInfo LevelMeta::info(Level level) const {
  if (level >= levels()) throw DomainError("level " + std::to_string(level) + " outside the trace layout");
  const unsigned w = step_width();
  const unsigned step = level / w;
  const unsigned offset = level % w;
  if (offset < action_bits_) return {step, LevelRole::action, action_bits_ - 1 - offset};
  return {step, LevelRole::coin, coin_bits_ - 1 - (offset - action_bits_)};
}

Level LevelMeta::action_level(unsigned step, unsigned bit) const {
  if (step >= horizon_ || bit >= action_bits_) throw DomainError("action level out of range");
  return step * step_width() + (action_bits_ - 1 - bit);
}

Level LevelMeta::coin_level(unsigned step, unsigned bit) const {
  if (step >= horizon_ || bit >= coin_bits_) throw DomainError("coin level out of range");
  return step * step_width() + action_bits_ + (coin_bits_ - 1 - bit);
}

std::size_t LevelMeta::decisions_before(std::size_t level) const {
  const unsigned w = step_width();
  if (w == 0) return 0;
  const std::size_t full = level / w;
  const std::size_t rest = level % w;
  return full * action_bits_ + std::min<std::size_t>(rest, action_bits_);
}

std::vector<std::uint8_t> LevelMeta::encode(std::span<const std::uint64_t> actions,
                                            std::span<const std::uint64_t> coins) const {
  if (actions.size() != horizon_ || coins.size() != horizon_) {
    throw DomainError("trace encoding needs one action and one coin word per step");
  }
  std::vector<std::uint8_t> bits(levels(), 0);
  for (unsigned t = 0; t < horizon_; ++t) {
    for (unsigned i = 0; i < action_bits_; ++i) bits[action_level(t, i)] = bit_of(actions[t], i);
    for (unsigned j = 0; j < coin_bits_; ++j) bits[coin_level(t, j)] = bit_of(coins[t], j);
  }
  return bits;
}

TraceBdd::TraceBdd(std::shared_ptr<bdd::Manager> engine, NodeRef root, LevelMeta meta, CompileStats stats)
    : engine_(std::move(engine)), root_(root), meta_(meta), stats_(stats), order_(engine_->post_order(root)) {
  if (engine_->width() != meta_.levels()) throw StructuralError("trace diagram width does not match its layout");
}

std::vector<NodeRef> lower_circuit(bdd::Manager& mgr, const Circuit& c, std::span<const Wire> roots,
                                   const std::function<NodeRef(Input)>& input) {
  std::vector<std::uint8_t> live(c.size(), 0);
  std::vector<std::uint32_t> stack;
  for (Wire r : roots) stack.push_back(r.id());
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    if (live[id]) continue;
    live[id] = 1;
    const Gate& g = c.gate(Wire(id));
    switch (g.kind) {
    case GateKind::ite: stack.push_back(g.c); [[fallthrough]];
    case GateKind::and_:
    case GateKind::or_:
    case GateKind::xor_: stack.push_back(g.b); [[fallthrough]];
    case GateKind::not_: stack.push_back(g.a); break;
    default: break;
    }
  }
  std::vector<NodeRef> value(c.size());
  for (std::uint32_t id = 0; id < c.size(); ++id) {
    if (!live[id]) continue;
    const Gate& g = c.gate(Wire(id));
    switch (g.kind) {
    case GateKind::constant: value[id] = g.a ? bdd::ONE : bdd::ZERO; break;
    case GateKind::input: value[id] = input(Input{static_cast<Port>(g.a), g.b}); break;
    case GateKind::not_: value[id] = mgr.negate(value[g.a]); break;
    case GateKind::and_: value[id] = mgr.apply(bdd::BinOp::and_, value[g.a], value[g.b]); break;
    case GateKind::or_: value[id] = mgr.apply(bdd::BinOp::or_, value[g.a], value[g.b]); break;
    case GateKind::xor_: value[id] = mgr.apply(bdd::BinOp::xor_, value[g.a], value[g.b]); break;
    case GateKind::ite: value[id] = mgr.ite(value[g.a], value[g.b], value[g.c]); break;
    }
  }
  std::vector<NodeRef> out;
  for (Wire r : roots) out.push_back(value[r.id()]);
  return out;
}

namespace {

/// Copies `root` into a fresh manager of `width` levels, shifting levels
/// down by `shift`.
std::pair<std::shared_ptr<bdd::Manager>, NodeRef> compact(const bdd::Manager& src, NodeRef root, Level shift,
                                                          Level width) {
  auto dst = std::make_shared<bdd::Manager>(width);
  std::unordered_map<std::uint32_t, NodeRef> map;
  const auto lookup = [&map](NodeRef n) { return n.is_terminal() ? n : map.at(n.id()); };
  for (NodeRef n : src.post_order(root)) {
    const bdd::Node& node = src.node(n);
    if (node.level < shift) throw StructuralError("compiled diagram still reads placeholder variables");
    map.emplace(n.id(), dst->mk(node.level - shift, lookup(node.lo), lookup(node.hi)));
  }
  return {std::move(dst), lookup(root)};
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

std::uint64_t pow2(unsigned bits) { return bits >= 64 ? UINT64_MAX : std::uint64_t{1} << bits; }

void check_alphabet(const RandomBitPA& pa, const Monitor& m) {
  pa.validate();
  m.validate();
  if (m.alphabet.state_bits != pa.state_bits || m.alphabet.action_bits != pa.action_bits) {
    throw DomainError("monitor alphabet does not match the dynamics");
  }
}

} // namespace

TraceBdd unroll(const RandomBitPA& pa, const Monitor& m, unsigned horizon) {
  const auto started = std::chrono::steady_clock::now();
  if (horizon == 0) throw DomainError("unroll: horizon must be at least 1");
  check_alphabet(pa, m);

  const LevelMeta meta(horizon, pa.action_bits, pa.coin_bits);
  // Symbolic state and history variables sit above every trace level.
  const std::uint64_t placeholders = std::uint64_t{pa.state_bits} + m.history_bits;
  const std::uint64_t width = placeholders + meta.levels();
  if (width >= (std::uint64_t{1} << 24)) {
    throw ResourceError("unroll: " + std::to_string(width) + " variables exceed the engine limit");
  }
  const auto offset = static_cast<Level>(placeholders);
  bdd::Manager mgr(static_cast<Level>(width));
  const auto state_var = [&](unsigned i) { return mgr.var(i); };
  const auto history_var = [&](unsigned j) { return mgr.var(pa.state_bits + j); };

  CompileStats stats;
  const Wire accept_root[] = {m.accept};
  NodeRef f = lower_circuit(mgr, m.circuit, accept_root, [&](Input in) {
    return in.port == Port::history ? history_var(in.index) : state_var(in.index);
  })[0];

  for (unsigned t = horizon; t-- > 0;) {
    mgr.clear_caches();
    const auto step_input = [&](Input in) -> NodeRef {
      switch (in.port) {
      case Port::state: return state_var(in.index);
      case Port::action: return mgr.var(offset + meta.action_level(t, in.index));
      case Port::coin: return mgr.var(offset + meta.coin_level(t, in.index));
      case Port::history: return history_var(in.index);
      }
      throw StructuralError("unroll: unknown port");
    };
    const std::vector<NodeRef> next = lower_circuit(mgr, pa.circuit, pa.next, step_input);
    const std::vector<NodeRef> update = lower_circuit(mgr, m.circuit, m.update, [&](Input in) {
      return in.port == Port::state ? next.at(in.index) : step_input(in);
    });
    const Wire valid_root[] = {pa.valid_action};
    const NodeRef valid = lower_circuit(mgr, pa.circuit, valid_root, step_input)[0];

    bdd::Substitution subst;
    for (unsigned i = 0; i < pa.state_bits; ++i) subst.emplace(i, next[i]);
    for (unsigned j = 0; j < m.history_bits; ++j) subst.emplace(pa.state_bits + j, update[j]);
    f = mgr.ite(valid, mgr.vector_compose(f, subst), bdd::BOT);
    stats.peak_intermediate = std::max(stats.peak_intermediate, mgr.size(f).internal);
  }

  mgr.clear_caches();
  const std::uint64_t h0 = m.start(pa.initial_state);
  bdd::Substitution initial;
  for (unsigned i = 0; i < pa.state_bits; ++i) {
    initial.emplace(i, bit_of(pa.initial_state, i) ? bdd::ONE : bdd::ZERO);
  }
  for (unsigned j = 0; j < m.history_bits; ++j) {
    initial.emplace(pa.state_bits + j, bit_of(h0, j) ? bdd::ONE : bdd::ZERO);
  }
  const NodeRef root = mgr.vector_compose(f, initial);

  auto [engine, compact_root] = compact(mgr, root, offset, static_cast<Level>(meta.levels()));
  const bdd::SizeInfo size = engine->size(compact_root);
  stats.internal_nodes = size.internal;
  stats.total_nodes = size.total;
  stats.levels = meta.levels();
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return TraceBdd(std::move(engine), compact_root, meta, stats);
}

std::uint64_t size_bound(const RandomBitPA& pa, const Monitor& m, unsigned horizon) {
  std::uint64_t bound = saturating_mul(horizon, std::uint64_t{pa.action_bits} + pa.coin_bits);
  bound = saturating_mul(bound, pow2(pa.coin_bits));
  bound = saturating_mul(bound, pa.action_count());
  bound = saturating_mul(bound, pow2(pa.state_bits));
  return saturating_mul(bound, pow2(m.history_bits));
}

std::uint64_t explicit_product_size(const RandomBitPA& pa, const Monitor& m, unsigned horizon) {
  std::uint64_t n = saturating_mul(horizon, pow2(pa.state_bits));
  n = saturating_mul(n, pa.action_count());
  return saturating_mul(n, pow2(m.history_bits));
}

unsigned discount_horizon(double gamma, double epsilon) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("discount: gamma must lie in (0, 1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("discount: epsilon must lie in (0, 1)");
  if (gamma == 1.0) return 1;
  const double survive = 1.0 - gamma;
  double estimate = std::ceil(std::log(epsilon) / std::log(survive));
  auto tau = static_cast<unsigned>(std::max(1.0, estimate));
  // Floating-point logs can land one off either way on exact powers.
  while (tau > 1 && std::pow(survive, tau - 1) <= epsilon) --tau;
  while (std::pow(survive, tau) > epsilon) ++tau;
  return tau;
}

Discounted with_discount(const RandomBitPA& pa, std::uint64_t gamma_num, unsigned gamma_bits, double epsilon) {
  pa.validate();
  if (gamma_bits > 32) throw DomainError("discount: at most 32 coin bits for gamma");
  const std::uint64_t den = std::uint64_t{1} << gamma_bits;
  if (gamma_num == 0 || gamma_num > den) throw DomainError("discount: gamma must lie in (0, 1]");

  Discounted d;
  d.sink_bit = pa.state_bits;
  d.horizon = discount_horizon(static_cast<double>(gamma_num) / static_cast<double>(den), epsilon);
  RandomBitPA& out = d.pa;
  out.state_bits = pa.state_bits + 1;
  out.action_bits = pa.action_bits;
  out.coin_bits = pa.coin_bits + gamma_bits;
  out.initial_state = pa.initial_state;

  Circuit& c = out.circuit;
  std::vector<Wire> roots = pa.next;
  roots.push_back(pa.valid_action);
  std::vector<Wire> moved = c.import(pa.circuit, roots, [&c](Input in) { return c.input(in.port, in.index); });
  out.valid_action = moved.back();
  moved.pop_back();

  std::vector<Wire> gamma_coins;
  for (unsigned j = 0; j < gamma_bits; ++j) gamma_coins.push_back(c.input(Port::coin, pa.coin_bits + j));
  const Wire in_sink = c.input(Port::state, d.sink_bit);
  const Wire ends = wires::less_than_const(c, gamma_coins, gamma_num);
  const Wire frozen = c.or_(in_sink, ends);
  for (unsigned i = 0; i < pa.state_bits; ++i) out.next.push_back(c.ite(frozen, c.input(Port::state, i), moved[i]));
  out.next.push_back(frozen);
  out.validate();
  return d;
}

Monitor freeze_at_sink(const Monitor& m, const Discounted& d) {
  m.validate();
  if (m.alphabet.state_bits != d.sink_bit || m.alphabet.action_bits != d.pa.action_bits) {
    throw DomainError("freeze_at_sink: monitor alphabet does not match the undiscounted dynamics");
  }
  Monitor out;
  out.alphabet = Alphabet{d.pa.state_bits, d.pa.action_bits};
  out.history_bits = m.history_bits;
  out.initial_history = m.initial_history;
  std::vector<Wire> roots = m.update;
  roots.push_back(m.accept);
  std::vector<Wire> copied =
      out.circuit.import(m.circuit, roots, [&out](Input in) { return out.circuit.input(in.port, in.index); });
  out.accept = copied.back();
  copied.pop_back();
  const Wire ended = out.circuit.input(Port::state, d.sink_bit);
  for (unsigned j = 0; j < m.history_bits; ++j) {
    out.update.push_back(out.circuit.ite(ended, out.circuit.input(Port::history, j), copied[j]));
  }
  out.validate();
  return out;
}

} // namespace specinfer
