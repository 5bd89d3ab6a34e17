#pragma once

/// @file monitor.hpp
/// @brief Task specifications as deterministic sequential monitor circuits.
///
/// A monitor keeps history bits h. Before the first action it processes the
/// initial state (with all action bits zero); afterwards each step reads the
/// action taken and the resulting state:
///
///     h <- update(h, a_t, s_{t+1})
///
/// The verdict is accept(h, s_tau) on the final history and state.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "specinfer/circuit.hpp"

namespace specinfer {

/// Bit widths of the dynamics a monitor observes.
struct Alphabet {
  unsigned state_bits = 0;
  unsigned action_bits = 0;
  friend bool operator==(const Alphabet&, const Alphabet&) = default;
};

struct TraceStep {
  std::uint64_t action = 0;
  std::uint64_t state = 0;
};

struct Monitor {
  Alphabet alphabet;
  unsigned history_bits = 0;
  std::uint64_t initial_history = 0;
  /// Update circuits read (history, action, state); accept reads (history,
  /// state).
  Circuit circuit;
  std::vector<Wire> update;
  Wire accept;

  /// Throws DomainError when the circuits read undeclared inputs.
  void validate() const;

  std::uint64_t step(std::uint64_t history, std::uint64_t action, std::uint64_t state) const;
  bool accepting(std::uint64_t history, std::uint64_t state) const;
  /// History after processing the initial state.
  std::uint64_t start(std::uint64_t initial_state) const { return step(initial_history, 0, initial_state); }
};

/// Runs `m` over `trace` starting from `initial_state`. Throws DomainError
/// for encodings wider than the alphabet.
bool accepts(const Monitor& m, std::span<const TraceStep> trace, std::uint64_t initial_state);

/// Monitor of `true`: no history, always accepting.
Monitor true_monitor(Alphabet alphabet);

/// Product constructions. History bits of `rhs` follow those of `lhs`.
/// Throw DomainError on alphabet mismatch.
Monitor m_and(const Monitor& lhs, const Monitor& rhs);
Monitor m_or(const Monitor& lhs, const Monitor& rhs);
Monitor m_not(const Monitor& m);

/// Past-time temporal formulas over state/action predicates.
namespace past {

class Formula {
public:
  enum class Kind : std::uint8_t { constant, atom, not_, and_, or_, implies, once, historically, since };

  Kind kind() const noexcept { return node_->kind; }

  static Formula constant(bool value);
  static Formula atom(BitCircuit predicate, std::string name = {});
  static Formula make(Kind kind, std::vector<Formula> args);

  bool value() const noexcept { return node_->value; }
  const BitCircuit& predicate() const noexcept { return node_->predicate; }
  const std::string& name() const noexcept { return node_->name; }
  std::span<const Formula> args() const noexcept { return node_->args; }

  /// Number of temporal operators, i.e. history bits once compiled.
  unsigned temporal_count() const noexcept;

private:
  struct Node {
    Kind kind = Kind::constant;
    bool value = false;
    BitCircuit predicate;
    std::string name;
    std::vector<Formula> args;
  };
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Formula operator!(const Formula& f);
Formula operator&&(const Formula& f, const Formula& g);
Formula operator||(const Formula& f, const Formula& g);
Formula implies(const Formula& f, const Formula& g);
/// f held at some step so far.
Formula once(const Formula& f);
/// f held at every step so far.
Formula historically(const Formula& f);
/// g held at some step so far and f has held at every step after it.
Formula since(const Formula& f, const Formula& g);

/// One history bit per temporal operator. Predicates outside every temporal
/// operator are evaluated on the final state only and must not read actions.
/// A formula with action predicates gets one more history bit, bit 0, so
/// those predicates are false while the initial state is processed.
Monitor compile(const Formula& f, Alphabet alphabet);

} // namespace past

/// Builders over state predicates, each with at most one history bit.
Monitor once(Alphabet alphabet, const BitCircuit& p);
Monitor historically(Alphabet alphabet, const BitCircuit& p);
Monitor since(Alphabet alphabet, const BitCircuit& p, const BitCircuit& q_pred);
/// Never stand on a tile matched by `tiles`.
Monitor avoid(Alphabet alphabet, const BitCircuit& tiles);
/// Stand on a tile matched by `tiles` at some step within the horizon.
Monitor reach_by_deadline(Alphabet alphabet, const BitCircuit& tiles);

} // namespace specinfer
