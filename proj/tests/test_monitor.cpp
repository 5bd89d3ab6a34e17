#include <doctest.h>

#include <filesystem>

#include "specinfer/cli/config.hpp"
#include "specinfer/error.hpp"
#include "specinfer/gridworld.hpp"
#include "specinfer/monitor.hpp"
#include "support/oracles.hpp"

using namespace specinfer;
namespace past = specinfer::past;

namespace {

/// 2x2 world: (0,0) white, (1,0) red, (0,1) yellow, (1,1) blue.
Gridworld small_world() {
  GridSpec g;
  g.width = 2;
  g.height = 2;
  g.tiles = {"wr", "yb"};
  g.slip_numerator = 1;
  g.slip_denominator = 2;
  return make_gridworld(g);
}

Alphabet alphabet_of(const RandomBitPA& pa) { return Alphabet{pa.state_bits, pa.action_bits}; }

/// Calls `check(trace)` for every trace of length ≤ `horizon` over the full
/// (state, action) alphabet, reachable or not.
template <class F>
void every_trace(Alphabet a, unsigned horizon, F&& check) {
  std::vector<TraceStep> trace;
  const std::uint64_t states = std::uint64_t{1} << a.state_bits;
  const std::uint64_t actions = std::uint64_t{1} << a.action_bits;
  const std::function<void()> rec = [&] {
    for (std::uint64_t s0 = 0; s0 < states; ++s0) check(std::span<const TraceStep>(trace), s0);
    if (trace.size() == horizon) return;
    for (std::uint64_t act = 0; act < actions; ++act) {
      for (std::uint64_t s = 0; s < states; ++s) {
        trace.push_back({act, s});
        rec();
        trace.pop_back();
      }
    }
  };
  rec();
}

/// Path of cells: visits `cells` in order from (0,0) using action 0.
std::vector<TraceStep> visit(const Gridworld& g, std::initializer_list<Cell> cells) {
  std::vector<TraceStep> t;
  for (Cell c : cells) t.push_back({0, g.encode(c)});
  return t;
}

} // namespace

TEST_CASE("avoid, reach and true on hand-written traces") {
  const Gridworld g = small_world();
  const Alphabet a = alphabet_of(g.pa());
  const Monitor avoid_red = avoid(a, g.tile_predicate('r'));
  const Monitor reach_yellow = reach_by_deadline(a, g.tile_predicate('y'));
  const std::uint64_t s0 = g.encode({0, 0});

  const auto into_red = visit(g, {{1, 0}, {1, 1}});
  CHECK_FALSE(accepts(avoid_red, into_red, s0));
  CHECK(accepts(avoid_red, visit(g, {{0, 1}, {1, 1}}), s0));
  CHECK(accepts(true_monitor(a), into_red, s0));
  CHECK(true_monitor(a).history_bits == 0);

  // The initial state counts: starting on red violates avoid(red).
  CHECK_FALSE(accepts(avoid_red, visit(g, {{0, 0}}), g.encode({1, 0})));
  // once(p) with p at step 2 of 5 latches.
  CHECK(accepts(reach_yellow, visit(g, {{0, 0}, {0, 1}, {0, 0}, {1, 1}, {1, 1}}), s0));
  CHECK_FALSE(accepts(reach_yellow, visit(g, {{1, 0}, {1, 1}, {0, 0}}), s0));
}

TEST_CASE("accepts rejects encodings wider than the alphabet") {
  const Gridworld g = small_world();
  const Monitor m = avoid(alphabet_of(g.pa()), g.tile_predicate('r'));
  const std::vector<TraceStep> bad_state{{0, 1u << g.pa().state_bits}};
  const std::vector<TraceStep> bad_action{{1u << g.pa().action_bits, 0}};
  CHECK_THROWS_AS(accepts(m, bad_state, 0), DomainError);
  CHECK_THROWS_AS(accepts(m, bad_action, 0), DomainError);
}

TEST_CASE("water clause: touching blue and then yellow without brown is rejected") {
  GridSpec spec;
  spec.width = 2;
  spec.height = 2;
  spec.tiles = {"wb", "ny"};
  const Gridworld g = make_gridworld(spec);
  const Alphabet a = alphabet_of(g.pa());
  const auto at = [&](char c) { return past::Formula::atom(g.tile_predicate(c)); };
  // yellow may be visited only when every blue visit was followed by brown.
  const past::Formula clause = past::historically(past::implies(at('y'), !past::since(!at('n'), at('b'))));
  const Monitor m = past::compile(clause, a);
  CHECK(m.history_bits == 2);
  const std::uint64_t s0 = g.encode({0, 0});
  CHECK_FALSE(accepts(m, visit(g, {{1, 0}, {1, 1}}), s0));
  CHECK(accepts(m, visit(g, {{1, 0}, {0, 0}, {0, 1}, {1, 1}}), s0));
  CHECK(accepts(m, visit(g, {{0, 1}, {1, 1}}), s0));
  CHECK_FALSE(accepts(m, visit(g, {{0, 1}, {1, 0}, {0, 0}, {1, 1}}), s0));

  // Independent latch automaton: wet = blue since last brown.
  every_trace(a, 3, [&](std::span<const TraceStep> trace, std::uint64_t start) {
    bool wet = false;
    bool ok = true;
    const auto visit_state = [&](std::uint64_t s) {
      const char c = g.color(g.decode(s));
      if (c == 'b') wet = true;
      if (c == 'n') wet = false;
      if (c == 'y' && wet) ok = false;
    };
    visit_state(start);
    for (const TraceStep& st : trace) visit_state(st.state);
    REQUIRE(accepts(m, trace, start) == ok);
  });
}

TEST_CASE("Boolean combinations match verdict algebra exhaustively") {
  testing::Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    const Alphabet a{static_cast<unsigned>(1 + rng() % 2), static_cast<unsigned>(rng() % 2)};
    const Monitor m1 = testing::random_monitor(rng, a);
    const Monitor m2 = testing::random_monitor(rng, a);
    const Monitor both = m_and(m1, m2);
    const Monitor either = m_or(m1, m2);
    const Monitor neither = m_not(m1);
    const Monitor twice = m_not(neither);
    const Monitor with_true = m_and(m1, true_monitor(a));
    CHECK(both.history_bits == m1.history_bits + m2.history_bits);
    CHECK(either.history_bits == m1.history_bits + m2.history_bits);
    every_trace(a, 3, [&](std::span<const TraceStep> t, std::uint64_t s0) {
      const bool v1 = accepts(m1, t, s0);
      const bool v2 = accepts(m2, t, s0);
      REQUIRE(accepts(both, t, s0) == (v1 && v2));
      REQUIRE(accepts(either, t, s0) == (v1 || v2));
      REQUIRE(accepts(neither, t, s0) == !v1);
      REQUIRE(accepts(twice, t, s0) == v1);
      REQUIRE(accepts(with_true, t, s0) == v1);
    });
  }
}

TEST_CASE("alphabet mismatch") {
  const Monitor m1 = true_monitor(Alphabet{2, 1});
  const Monitor m2 = true_monitor(Alphabet{2, 2});
  CHECK_THROWS_AS(m_and(m1, m2), DomainError);
  CHECK_THROWS_AS(m_or(m1, m2), DomainError);
}

TEST_CASE("avoid equals the negation of once on a 2x2 grid") {
  const Gridworld g = small_world();
  const Alphabet a = alphabet_of(g.pa());
  const Monitor lhs = avoid(a, g.tile_predicate('r'));
  const Monitor rhs = m_not(once(a, g.tile_predicate('r')));
  every_trace(a, 3, [&](std::span<const TraceStep> t, std::uint64_t s0) {
    REQUIRE(accepts(lhs, t, s0) == accepts(rhs, t, s0));
  });
}

TEST_CASE("once is idempotent and builders use one history bit") {
  const Gridworld g = small_world();
  const Alphabet a = alphabet_of(g.pa());
  const auto y = past::Formula::atom(g.tile_predicate('y'));
  const Monitor single = past::compile(past::once(y), a);
  const Monitor nested = past::compile(past::once(past::once(y)), a);
  CHECK(single.history_bits == 1);
  CHECK(once(a, g.tile_predicate('y')).history_bits == 1);
  CHECK(historically(a, g.tile_predicate('y')).history_bits == 1);
  CHECK(since(a, g.tile_predicate('w'), g.tile_predicate('y')).history_bits == 1);
  CHECK(reach_by_deadline(a, g.tile_predicate('y')).history_bits == 1);
  every_trace(a, 3, [&](std::span<const TraceStep> t, std::uint64_t s0) {
    REQUIRE(accepts(single, t, s0) == accepts(nested, t, s0));
  });
}

TEST_CASE("since matches its definition") {
  const Gridworld g = small_world();
  const Alphabet a = alphabet_of(g.pa());
  const Monitor m = since(a, g.tile_predicate('w'), g.tile_predicate('y'));
  every_trace(a, 3, [&](std::span<const TraceStep> t, std::uint64_t s0) {
    std::vector<char> colors{g.color(g.decode(s0))};
    for (const auto& st : t) colors.push_back(g.color(g.decode(st.state)));
    bool expected = false;
    for (std::size_t k = 0; k < colors.size(); ++k) {
      if (colors[k] != 'y') continue;
      bool held = true;
      for (std::size_t j = k + 1; j < colors.size(); ++j) held = held && colors[j] == 'w';
      expected = expected || held;
    }
    REQUIRE(accepts(m, t, s0) == expected);
  });
}

TEST_CASE("action predicates ignore the initial pre-step") {
  GridSpec spec;
  spec.width = 2;
  spec.height = 1;
  spec.actions = {Direction::left, Direction::right};
  const Gridworld g = make_gridworld(spec);
  const Alphabet a = alphabet_of(g.pa());
  Circuit c;
  const Wire left = c.not_(c.input(Port::action, 0));
  const auto did_left = past::Formula::atom(BitCircuit{std::move(c), left});
  const Monitor m = past::compile(past::once(did_left), a);
  CHECK(m.history_bits == 2);
  // Action 0 is used for the pre-step but is not counted as taken.
  CHECK_FALSE(accepts(m, std::vector<TraceStep>{}, 0));
  CHECK_FALSE(accepts(m, std::vector<TraceStep>{{1, 1}}, 0));
  CHECK(accepts(m, std::vector<TraceStep>{{1, 1}, {0, 0}}, 0));
  CHECK_THROWS_AS(past::compile(did_left, a), DomainError);
}

TEST_CASE("history bits of a conjunction add up") {
  const Gridworld g = small_world();
  const Alphabet a = alphabet_of(g.pa());
  const Monitor r = reach_by_deadline(a, g.tile_predicate('y'));
  const Monitor v = avoid(a, g.tile_predicate('r'));
  CHECK(m_and(r, v).history_bits == 2);
  CHECK(m_and(m_and(r, v), m_or(r, v)).history_bits == 4);
  CHECK(m_not(r).history_bits == 1);
}

TEST_CASE("phi_star accepts the five solid experiment demos and rejects the failed one") {
  const cli::RunConfig config = cli::load_config(std::filesystem::path(SPECINFER_CONFIG_DIR) / "experiment/config.json");
  const cli::Problem p = cli::prepare(config);
  REQUIRE(p.demos.size() == 6);
  const Monitor* phi = nullptr;
  for (const Candidate& c : p.candidates) {
    if (c.name == "phi_star") phi = &c.monitor;
  }
  REQUIRE(phi != nullptr);
  for (std::size_t i = 0; i < 5; ++i) CHECK(accepts(*phi, p.demos[i].steps, p.pa.initial_state));
  CHECK_FALSE(accepts(*phi, p.demos[5].steps, p.pa.initial_state));
}
