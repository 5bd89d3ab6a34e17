#include "specinfer/monitor.hpp"

#include <string>

#include "specinfer/error.hpp"

namespace specinfer {

void Monitor::validate() const {
  if (history_bits > 63) throw DomainError("monitor: more than 63 history bits");
  if (update.size() != history_bits) throw DomainError("monitor: update circuits do not match history bits");
  if ((initial_history >> history_bits) != 0) throw DomainError("monitor: initial history out of range");
  if (circuit.input_width(Port::state) > alphabet.state_bits ||
      circuit.input_width(Port::action) > alphabet.action_bits ||
      circuit.input_width(Port::history) > history_bits || circuit.input_width(Port::coin) > 0) {
    throw DomainError("monitor: circuit reads undeclared inputs");
  }
  if (circuit.depends_on(accept, Port::action)) throw DomainError("monitor: acceptance must not read actions");
}

std::uint64_t Monitor::step(std::uint64_t history, std::uint64_t action, std::uint64_t state) const {
  const auto values = circuit.evaluate(Valuation{state, action, 0, history});
  std::uint64_t out = 0;
  for (unsigned i = 0; i < update.size(); ++i) {
    if (values[update[i].id()]) out |= std::uint64_t{1} << i;
  }
  return out;
}

bool Monitor::accepting(std::uint64_t history, std::uint64_t state) const {
  return circuit.eval(accept, Valuation{state, 0, 0, history});
}

bool accepts(const Monitor& m, std::span<const TraceStep> trace, std::uint64_t initial_state) {
  const auto fits = [](std::uint64_t word, unsigned bits) { return bits >= 64 || (word >> bits) == 0; };
  if (!fits(initial_state, m.alphabet.state_bits)) throw DomainError("monitor: initial state out of range");
  std::uint64_t h = m.start(initial_state);
  std::uint64_t s = initial_state;
  for (const TraceStep& step : trace) {
    if (!fits(step.action, m.alphabet.action_bits) || !fits(step.state, m.alphabet.state_bits)) {
      throw DomainError("monitor: trace step encoding out of range");
    }
    h = m.step(h, step.action, step.state);
    s = step.state;
  }
  return m.accepting(h, s);
}

Monitor true_monitor(Alphabet alphabet) {
  Monitor m;
  m.alphabet = alphabet;
  m.accept = m.circuit.constant(true);
  return m;
}

namespace {

enum class Combine { and_, or_ };

Monitor product(const Monitor& lhs, const Monitor& rhs, Combine how) {
  if (!(lhs.alphabet == rhs.alphabet)) throw DomainError("monitor: alphabet mismatch in product");
  if (lhs.history_bits + rhs.history_bits > 63) throw DomainError("monitor: product exceeds 63 history bits");
  Monitor m;
  m.alphabet = lhs.alphabet;
  m.history_bits = lhs.history_bits + rhs.history_bits;
  m.initial_history = lhs.initial_history | (rhs.initial_history << lhs.history_bits);

  const auto copy = [&m](const Monitor& src, unsigned offset) {
    std::vector<Wire> roots = src.update;
    roots.push_back(src.accept);
    return m.circuit.import(src.circuit, roots, [&m, offset](Input in) {
      return m.circuit.input(in.port, in.port == Port::history ? in.index + offset : in.index);
    });
  };
  auto left = copy(lhs, 0);
  auto right = copy(rhs, lhs.history_bits);
  const Wire accept_l = left.back();
  const Wire accept_r = right.back();
  left.pop_back();
  right.pop_back();
  m.update = left;
  m.update.insert(m.update.end(), right.begin(), right.end());
  m.accept = how == Combine::and_ ? m.circuit.and_(accept_l, accept_r) : m.circuit.or_(accept_l, accept_r);
  return m;
}

} // namespace

Monitor m_and(const Monitor& lhs, const Monitor& rhs) { return product(lhs, rhs, Combine::and_); }
Monitor m_or(const Monitor& lhs, const Monitor& rhs) { return product(lhs, rhs, Combine::or_); }

Monitor m_not(const Monitor& m) {
  Monitor out = m;
  out.accept = out.circuit.not_(m.accept);
  return out;
}

namespace past {

Formula Formula::constant(bool value) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::constant;
  node->value = value;
  return Formula(std::move(node));
}

Formula Formula::atom(BitCircuit predicate, std::string name) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::atom;
  node->predicate = std::move(predicate);
  node->name = std::move(name);
  return Formula(std::move(node));
}

Formula Formula::make(Kind kind, std::vector<Formula> args) {
  std::size_t arity = 0;
  switch (kind) {
  case Kind::constant:
  case Kind::atom: throw DomainError("formula: use constant() or atom() for leaves");
  case Kind::not_:
  case Kind::once:
  case Kind::historically: arity = 1; break;
  case Kind::and_:
  case Kind::or_:
  case Kind::implies:
  case Kind::since: arity = 2; break;
  }
  if (args.size() != arity) throw DomainError("formula: wrong number of operands");
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->args = std::move(args);
  return Formula(std::move(node));
}

unsigned Formula::temporal_count() const noexcept {
  unsigned n = 0;
  for (const Formula& a : args()) n += a.temporal_count();
  const Kind k = kind();
  if (k == Kind::once || k == Kind::historically || k == Kind::since) ++n;
  return n;
}

Formula operator!(const Formula& f) { return Formula::make(Formula::Kind::not_, {f}); }
Formula operator&&(const Formula& f, const Formula& g) { return Formula::make(Formula::Kind::and_, {f, g}); }
Formula operator||(const Formula& f, const Formula& g) { return Formula::make(Formula::Kind::or_, {f, g}); }
Formula implies(const Formula& f, const Formula& g) { return Formula::make(Formula::Kind::implies, {f, g}); }
Formula once(const Formula& f) { return Formula::make(Formula::Kind::once, {f}); }
Formula historically(const Formula& f) { return Formula::make(Formula::Kind::historically, {f}); }
Formula since(const Formula& f, const Formula& g) { return Formula::make(Formula::Kind::since, {f, g}); }

namespace {

/// Emits the circuit of a formula twice: once for the per-step update and
/// once for acceptance. Both passes number temporal operators in the same
/// post-order, so operator i owns history bit i in both.
class FormulaCompiler {
public:
  FormulaCompiler(Monitor& m) : m_(m) {}

  /// Action predicates must be false while the initial state is processed,
  /// so formulas reading actions get a leading history bit that is clear
  /// only during that first step.
  void reserve_started_bit(const Formula& f) {
    if (!reads_actions(f)) return;
    started_ = history(claim(false));
    record(m_.circuit.constant(true));
    next_accept_ = 1;
  }

  Wire step_value(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
    case K::constant: return m_.circuit.constant(f.value());
    case K::atom: return atom(f, /*allow_action=*/true);
    case K::not_: return m_.circuit.not_(step_value(f.args()[0]));
    case K::and_: {
      const Wire x = step_value(f.args()[0]);
      return m_.circuit.and_(x, step_value(f.args()[1]));
    }
    case K::or_: {
      const Wire x = step_value(f.args()[0]);
      return m_.circuit.or_(x, step_value(f.args()[1]));
    }
    case K::implies: {
      const Wire x = step_value(f.args()[0]);
      return m_.circuit.implies(x, step_value(f.args()[1]));
    }
    case K::once: {
      const Wire x = step_value(f.args()[0]);
      const unsigned idx = claim(false);
      return record(m_.circuit.or_(x, history(idx)));
    }
    case K::historically: {
      const Wire x = step_value(f.args()[0]);
      const unsigned idx = claim(true);
      return record(m_.circuit.and_(x, history(idx)));
    }
    case K::since: {
      const Wire hold = step_value(f.args()[0]);
      const Wire trigger = step_value(f.args()[1]);
      const unsigned idx = claim(false);
      return record(m_.circuit.or_(trigger, m_.circuit.and_(hold, history(idx))));
    }
    }
    throw DomainError("formula: unknown operator");
  }

  Wire accept_value(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
    case K::constant: return m_.circuit.constant(f.value());
    case K::atom: return atom(f, /*allow_action=*/false);
    case K::not_: return m_.circuit.not_(accept_value(f.args()[0]));
    case K::and_: {
      const Wire x = accept_value(f.args()[0]);
      return m_.circuit.and_(x, accept_value(f.args()[1]));
    }
    case K::or_: {
      const Wire x = accept_value(f.args()[0]);
      return m_.circuit.or_(x, accept_value(f.args()[1]));
    }
    case K::implies: {
      const Wire x = accept_value(f.args()[0]);
      return m_.circuit.implies(x, accept_value(f.args()[1]));
    }
    case K::once:
    case K::historically:
    case K::since: {
      // The stored bit already holds the operator's value at the final step.
      // Operands were numbered before the operator itself.
      next_accept_ += f.temporal_count() - 1;
      return history(next_accept_++);
    }
    }
    throw DomainError("formula: unknown operator");
  }

private:
  unsigned claim(bool initial) {
    const unsigned idx = m_.history_bits++;
    if (idx >= 63) throw DomainError("formula: more than 63 temporal operators");
    if (initial) m_.initial_history |= std::uint64_t{1} << idx;
    m_.update.emplace_back();
    pending_ = idx;
    return idx;
  }

  Wire record(Wire value) {
    m_.update[pending_] = value;
    return value;
  }

  Wire history(unsigned idx) { return m_.circuit.input(Port::history, idx); }

  static bool reads_actions(const Formula& f) {
    if (f.kind() == Formula::Kind::atom) {
      const BitCircuit& p = f.predicate();
      return p.circuit.depends_on(p.out, Port::action);
    }
    for (const Formula& a : f.args()) {
      if (reads_actions(a)) return true;
    }
    return false;
  }

  Wire atom(const Formula& f, bool allow_action) {
    const BitCircuit& p = f.predicate();
    const Wire roots[] = {p.out};
    const Wire value = m_.circuit.import(p.circuit, roots, [&](Input in) {
      switch (in.port) {
      case Port::state:
        if (in.index >= m_.alphabet.state_bits) break;
        return m_.circuit.input(Port::state, in.index);
      case Port::action:
        if (!allow_action) {
          throw DomainError("formula: predicate '" + f.name() +
                            "' reads actions outside a temporal operator");
        }
        if (in.index >= m_.alphabet.action_bits) break;
        return m_.circuit.input(Port::action, in.index);
      default: break;
      }
      throw DomainError("formula: predicate '" + f.name() + "' reads an input outside the alphabet");
    })[0];
    if (allow_action && p.circuit.depends_on(p.out, Port::action)) return m_.circuit.and_(started_, value);
    return value;
  }

  Monitor& m_;
  unsigned pending_ = 0;
  unsigned next_accept_ = 0;
  Wire started_;
};

} // namespace

Monitor compile(const Formula& f, Alphabet alphabet) {
  Monitor m;
  m.alphabet = alphabet;
  FormulaCompiler fc(m);
  fc.reserve_started_bit(f);
  fc.step_value(f);
  m.accept = fc.accept_value(f);
  m.validate();
  return m;
}

} // namespace past

Monitor once(Alphabet alphabet, const BitCircuit& p) {
  return past::compile(past::once(past::Formula::atom(p, "p")), alphabet);
}

Monitor historically(Alphabet alphabet, const BitCircuit& p) {
  return past::compile(past::historically(past::Formula::atom(p, "p")), alphabet);
}

Monitor since(Alphabet alphabet, const BitCircuit& p, const BitCircuit& q_pred) {
  return past::compile(past::since(past::Formula::atom(p, "p"), past::Formula::atom(q_pred, "q")), alphabet);
}

Monitor avoid(Alphabet alphabet, const BitCircuit& tiles) {
  return past::compile(past::historically(!past::Formula::atom(tiles, "tiles")), alphabet);
}

Monitor reach_by_deadline(Alphabet alphabet, const BitCircuit& tiles) {
  return once(alphabet, tiles);
}

} // namespace specinfer
