#pragma once

/// @file dynamics.hpp
/// @brief Probabilistic automata in the random-bit model.
///
/// A transition is a deterministic function of the current state, the action
/// and q fair coin flips. All encodings are little-endian bit-vectors.

#include <compare>
#include <cstdint>
#include <vector>

#include "specinfer/circuit.hpp"

namespace specinfer {

/// Exact probability count / 2^log2_den.
struct Dyadic {
  std::uint64_t count = 0;
  unsigned log2_den = 0;

  double value() const noexcept;
  /// Equality as rationals, independent of the representation.
  friend bool operator==(const Dyadic& x, const Dyadic& y) noexcept;
};

/// Probabilistic automaton whose transition is a vector of next-state bit
/// circuits over (state, action, coin) inputs.
struct RandomBitPA {
  unsigned state_bits = 0;
  unsigned action_bits = 0;
  unsigned coin_bits = 0;
  std::uint64_t initial_state = 0;
  Circuit circuit;
  /// One wire per next-state bit.
  std::vector<Wire> next;
  /// True exactly on encodings of real actions (action inputs only).
  Wire valid_action;

  /// Throws DomainError when the circuit reads undeclared inputs or `next`
  /// does not cover every state bit.
  void validate() const;

  std::uint64_t state_count() const noexcept { return std::uint64_t{1} << state_bits; }
  std::uint64_t action_encodings() const noexcept { return std::uint64_t{1} << action_bits; }
  std::uint64_t coin_outcomes() const noexcept { return std::uint64_t{1} << coin_bits; }

  bool is_valid_action(std::uint64_t action) const;
  /// Number of valid action encodings.
  std::uint64_t action_count() const;
  /// Successor under one coin outcome.
  std::uint64_t step(std::uint64_t state, std::uint64_t action, std::uint64_t coins) const;
};

/// Explicit transition table, used as a reference when checking encodings.
struct ExplicitPA {
  std::size_t states = 0;
  std::size_t actions = 0;
  /// Row-major [state][action][next].
  std::vector<double> probs;

  ExplicitPA() = default;
  ExplicitPA(std::size_t n_states, std::size_t n_actions);

  double& at(std::size_t s, std::size_t a, std::size_t next);
  double at(std::size_t s, std::size_t a, std::size_t next) const;

  /// Throws DomainError unless every (s, a) row sums to 1 within 1e-12.
  /// All-zero rows mark unused encodings and are accepted.
  void validate() const;

  bool row_unused(std::size_t s, std::size_t a) const;
};

/// Pr over the coins that `pa` moves from `state` to `next` under `action`,
/// by enumeration of all 2^q coin strings.
Dyadic transition_prob(const RandomBitPA& pa, std::uint64_t state, std::uint64_t action,
                       std::uint64_t next);

/// All successor probabilities of (state, action), indexed by next state.
std::vector<Dyadic> successor_distribution(const RandomBitPA& pa, std::uint64_t state,
                                           std::uint64_t action);

/// Largest |δ(s,a,s') − Pr_c(δ̂(s,a,c) = s')| over valid actions and used
/// rows of `ref`; `pa` is an (ε, q)-approximation of `ref` iff the result is
/// at most ε.
double approximation_gap(const RandomBitPA& pa, const ExplicitPA& ref);

} // namespace specinfer
