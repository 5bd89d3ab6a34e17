#include "specinfer/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specinfer/error.hpp"

namespace specinfer {

double Dyadic::value() const noexcept {
  return std::ldexp(static_cast<double>(count), -static_cast<int>(log2_den));
}

bool operator==(const Dyadic& x, const Dyadic& y) noexcept {
  // Compare count_x * 2^den_y with count_y * 2^den_x without overflow by
  // first stripping trailing zero bits.
  auto normal = [](Dyadic d) {
    while (d.log2_den > 0 && d.count % 2 == 0) {
      d.count /= 2;
      --d.log2_den;
    }
    if (d.count == 0) d.log2_den = 0;
    return d;
  };
  const Dyadic a = normal(x);
  const Dyadic b = normal(y);
  return a.count == b.count && a.log2_den == b.log2_den;
}

void RandomBitPA::validate() const {
  if (state_bits > 63 || action_bits > 63 || coin_bits > 63) {
    throw DomainError("dynamics: bit widths above 63 are not supported");
  }
  if (next.size() != state_bits) {
    throw DomainError("dynamics: " + std::to_string(next.size()) + " next-state circuits for " +
                      std::to_string(state_bits) + " state bits");
  }
  if (circuit.input_width(Port::state) > state_bits || circuit.input_width(Port::action) > action_bits ||
      circuit.input_width(Port::coin) > coin_bits || circuit.input_width(Port::history) > 0) {
    throw DomainError("dynamics: transition circuit reads undeclared inputs");
  }
  if ((initial_state >> state_bits) != 0) throw DomainError("dynamics: initial state out of range");
  if (action_count() == 0) throw DomainError("dynamics: no valid action encoding");
}

bool RandomBitPA::is_valid_action(std::uint64_t action) const {
  if ((action >> action_bits) != 0) return false;
  Valuation v;
  v.action = action;
  return circuit.eval(valid_action, v);
}

std::uint64_t RandomBitPA::action_count() const {
  std::uint64_t n = 0;
  for (std::uint64_t a = 0; a < action_encodings(); ++a) n += is_valid_action(a);
  return n;
}

std::uint64_t RandomBitPA::step(std::uint64_t state, std::uint64_t action, std::uint64_t coins) const {
  const auto values = circuit.evaluate(Valuation{state, action, coins, 0});
  std::uint64_t out = 0;
  for (unsigned i = 0; i < next.size(); ++i) {
    if (values[next[i].id()]) out |= std::uint64_t{1} << i;
  }
  return out;
}

ExplicitPA::ExplicitPA(std::size_t n_states, std::size_t n_actions)
    : states(n_states), actions(n_actions), probs(n_states * n_actions * n_states, 0.0) {}

double& ExplicitPA::at(std::size_t s, std::size_t a, std::size_t next) {
  return probs.at((s * actions + a) * states + next);
}

double ExplicitPA::at(std::size_t s, std::size_t a, std::size_t next) const {
  return probs.at((s * actions + a) * states + next);
}

bool ExplicitPA::row_unused(std::size_t s, std::size_t a) const {
  for (std::size_t n = 0; n < states; ++n) {
    if (at(s, a, n) != 0.0) return false;
  }
  return true;
}

void ExplicitPA::validate() const {
  if (probs.size() != states * actions * states) throw DomainError("explicit PA: table shape mismatch");
  for (std::size_t s = 0; s < states; ++s) {
    for (std::size_t a = 0; a < actions; ++a) {
      if (row_unused(s, a)) continue;
      double total = 0.0;
      for (std::size_t n = 0; n < states; ++n) total += at(s, a, n);
      if (std::abs(total - 1.0) > 1e-12) {
        throw DomainError("explicit PA: row (" + std::to_string(s) + ", " + std::to_string(a) +
                          ") sums to " + std::to_string(total));
      }
    }
  }
}

namespace {

void check_query(const RandomBitPA& pa, std::uint64_t state, std::uint64_t action) {
  if ((state >> pa.state_bits) != 0) throw DomainError("dynamics: state encoding out of range");
  if (!pa.is_valid_action(action)) {
    throw DomainError("dynamics: invalid action encoding " + std::to_string(action));
  }
}

} // namespace

std::vector<Dyadic> successor_distribution(const RandomBitPA& pa, std::uint64_t state,
                                           std::uint64_t action) {
  check_query(pa, state, action);
  std::vector<Dyadic> dist(pa.state_count(), Dyadic{0, pa.coin_bits});
  for (std::uint64_t c = 0; c < pa.coin_outcomes(); ++c) ++dist[pa.step(state, action, c)].count;
  return dist;
}

Dyadic transition_prob(const RandomBitPA& pa, std::uint64_t state, std::uint64_t action,
                       std::uint64_t next) {
  check_query(pa, state, action);
  if ((next >> pa.state_bits) != 0) throw DomainError("dynamics: next-state encoding out of range");
  Dyadic p{0, pa.coin_bits};
  for (std::uint64_t c = 0; c < pa.coin_outcomes(); ++c) p.count += pa.step(state, action, c) == next;
  return p;
}

double approximation_gap(const RandomBitPA& pa, const ExplicitPA& ref) {
  if (ref.states != pa.state_count() || ref.actions != pa.action_encodings()) {
    throw DomainError("dynamics: explicit table shape " + std::to_string(ref.states) + "x" +
                      std::to_string(ref.actions) + " does not match the encoding");
  }
  double gap = 0.0;
  for (std::uint64_t s = 0; s < pa.state_count(); ++s) {
    for (std::uint64_t a = 0; a < pa.action_encodings(); ++a) {
      if (!pa.is_valid_action(a) || ref.row_unused(s, a)) continue;
      const auto dist = successor_distribution(pa, s, a);
      for (std::uint64_t n = 0; n < pa.state_count(); ++n) {
        gap = std::max(gap, std::abs(ref.at(s, a, n) - dist[n].value()));
      }
    }
  }
  return gap;
}

} // namespace specinfer
