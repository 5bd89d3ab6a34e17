#include <doctest.h>

#include <cmath>

#include "specinfer/compiler.hpp"
#include "specinfer/error.hpp"
#include "specinfer/gridworld.hpp"
#include "support/oracles.hpp"

using namespace specinfer;
using bdd::Value;

namespace {

Alphabet alphabet_of(const RandomBitPA& pa) { return Alphabet{pa.state_bits, pa.action_bits}; }

struct Decoded {
  std::vector<std::uint64_t> actions;
  std::vector<std::uint64_t> coins;
};

/// Splits a bit string into per-step action and coin words by reading the
/// level roles (independent of the encoder).
Decoded decode(const LevelMeta& meta, std::span<const std::uint8_t> bits) {
  Decoded d{std::vector<std::uint64_t>(meta.horizon()), std::vector<std::uint64_t>(meta.horizon())};
  for (bdd::Level l = 0; l < bits.size(); ++l) {
    const LevelInfo info = meta.info(l);
    auto& word = info.role == LevelRole::action ? d.actions[info.step] : d.coins[info.step];
    word |= std::uint64_t{bits[l]} << info.bit;
  }
  return d;
}

/// Verdict of the trace a bit string encodes, by direct simulation.
Value simulate(const RandomBitPA& pa, const Monitor& m, const Decoded& d) {
  std::uint64_t s = pa.initial_state;
  std::vector<TraceStep> trace;
  for (std::size_t t = 0; t < d.actions.size(); ++t) {
    if (!pa.is_valid_action(d.actions[t])) return Value::bot;
    s = pa.step(s, d.actions[t], d.coins[t]);
    trace.push_back({d.actions[t], s});
  }
  return accepts(m, trace, pa.initial_state) ? Value::one : Value::zero;
}

void check_equivalence(const RandomBitPA& pa, const Monitor& m, unsigned horizon) {
  const TraceBdd b = unroll(pa, m, horizon);
  const std::size_t n = b.meta().levels();
  REQUIRE(n <= 16);
  for (std::uint64_t w = 0; w < (std::uint64_t{1} << n); ++w) {
    const auto bits = testing::assignment(w, static_cast<unsigned>(n));
    REQUIRE(b.eval(bits) == simulate(pa, m, decode(b.meta(), bits)));
  }
}

Gridworld grid(unsigned w, unsigned h, std::vector<std::string> tiles, std::uint64_t num, std::uint64_t den) {
  GridSpec g;
  g.width = w;
  g.height = h;
  g.tiles = std::move(tiles);
  g.slip_numerator = num;
  g.slip_denominator = den;
  return make_gridworld(g);
}

/// One state, one action bit, no coins.
RandomBitPA one_state_pa() {
  RandomBitPA pa;
  pa.action_bits = 1;
  pa.valid_action = pa.circuit.constant(true);
  pa.validate();
  return pa;
}

} // namespace

TEST_CASE("level layout") {
  const LevelMeta meta(3, 2, 5);
  CHECK(meta.levels() == 21);
  CHECK(meta.action_level(0, 1) == 0);
  CHECK(meta.action_level(0, 0) == 1);
  CHECK(meta.coin_level(0, 4) == 2);
  CHECK(meta.coin_level(2, 0) == 20);
  for (bdd::Level l = 0; l < 21; ++l) {
    const LevelInfo info = meta.info(l);
    CHECK(info.step == l / 7);
    CHECK((info.role == LevelRole::action) == (l % 7 < 2));
  }
  CHECK(meta.decisions_before(0) == 0);
  CHECK(meta.decisions_before(2) == 2);
  CHECK(meta.decisions_before(7) == 2);
  CHECK(meta.decisions_before(8) == 3);
  CHECK(meta.decisions_before(21) == 6);
}

TEST_CASE("phi = true compiles to ONE") {
  for (const Gridworld& g : {grid(2, 2, {}, 1, 2), grid(8, 8, {}, 1, 32), grid(3, 1, {}, 0, 1)}) {
    const TraceBdd b = unroll(g.pa(), true_monitor(alphabet_of(g.pa())), 10);
    CHECK(b.root() == bdd::ONE);
    CHECK(b.size().internal == 0);
    CHECK(b.size().total == 1);
    CHECK(b.stats().internal_nodes == 0);
  }
}

TEST_CASE("a monitor reading one action bit compiles to a single node") {
  const RandomBitPA pa = one_state_pa();
  Monitor m;
  m.alphabet = alphabet_of(pa);
  m.history_bits = 1;
  m.update.push_back(m.circuit.input(Port::action, 0));
  m.accept = m.circuit.input(Port::history, 0);
  m.validate();
  const TraceBdd b = unroll(pa, m, 1);
  REQUIRE_FALSE(b.root().is_terminal());
  const bdd::Node& root = b.engine().node(b.root());
  CHECK(root.level == b.meta().action_level(0, 0));
  CHECK(root.lo == bdd::ZERO);
  CHECK(root.hi == bdd::ONE);
  CHECK(b.size().internal == 1);
}

TEST_CASE("2x2 reach agrees with simulation on every bit string") {
  const Gridworld g = grid(2, 2, {"ww", "wy"}, 1, 4);
  check_equivalence(g.pa(), reach_by_deadline(alphabet_of(g.pa()), g.tile_predicate('y')), 2);
}

TEST_CASE("semantic equivalence on random instances, BOT exactly on invalid actions") {
  testing::Rng rng(31);
  for (int i = 0; i < 120; ++i) {
    const testing::Instance inst = testing::random_instance(rng, 4);
    if (static_cast<std::size_t>(inst.horizon) * (inst.pa.action_bits + inst.pa.coin_bits) > 14) continue;
    check_equivalence(inst.pa, inst.monitor, inst.horizon);
  }
}

TEST_CASE("semantic equivalence with three actions and reach/avoid") {
  GridSpec spec;
  spec.width = 2;
  spec.height = 2;
  spec.tiles = {"wr", "yw"};
  spec.slip_numerator = 1;
  spec.slip_denominator = 2;
  spec.actions = {Direction::down, Direction::right, Direction::left};
  const Gridworld g = make_gridworld(spec);
  const Alphabet a = alphabet_of(g.pa());
  check_equivalence(g.pa(), m_and(reach_by_deadline(a, g.tile_predicate('y')), avoid(a, g.tile_predicate('r'))), 3);
}

TEST_CASE("size bound") {
  SUBCASE("8x8 gridworld, two history bits, ten steps") {
    const Gridworld g = grid(8, 8, {}, 1, 32);
    const Alphabet a = alphabet_of(g.pa());
    const Monitor m = m_and(once(a, g.tile_predicate('w')), avoid(a, g.tile_predicate('w')));
    CHECK(size_bound(g.pa(), m, 10) == 2'293'760u);
    CHECK(explicit_product_size(g.pa(), m, 10) == 10u * 64 * 4 * 4);
  }
  SUBCASE("one state, two actions, no coins") {
    const RandomBitPA pa = one_state_pa();
    CHECK(size_bound(pa, true_monitor(alphabet_of(pa)), 1) == 2u);
  }
  SUBCASE("holds on random instances") {
    testing::Rng rng(12);
    for (int i = 0; i < 150; ++i) {
      const testing::Instance inst = testing::random_instance(rng, 6);
      const TraceBdd b = unroll(inst.pa, inst.monitor, inst.horizon);
      CHECK(b.size().internal <= size_bound(inst.pa, inst.monitor, inst.horizon));
    }
  }
}

TEST_CASE("diagram size grows at most linearly in the horizon") {
  const Gridworld g = grid(4, 4, {"wwww", "wrrw", "wwwy", "wwww"}, 1, 8);
  const Alphabet a = alphabet_of(g.pa());
  const Monitor m = m_and(reach_by_deadline(a, g.tile_predicate('y')), avoid(a, g.tile_predicate('r')));
  const double slope = static_cast<double>(size_bound(g.pa(), m, 1));
  std::size_t previous = unroll(g.pa(), m, 1).size().internal;
  for (unsigned tau = 2; tau <= 12; ++tau) {
    const std::size_t size = unroll(g.pa(), m, tau).size().internal;
    CHECK(size <= size_bound(g.pa(), m, tau));
    CHECK(static_cast<double>(size) / tau <= slope);
    // Each extra step adds at most one step's worth of the bound.
    CHECK(static_cast<double>(size - previous) <= slope);
    previous = size;
  }
}

TEST_CASE("compiled engines keep only reachable nodes") {
  const Gridworld g = grid(3, 3, {"wyw", "rww", "www"}, 1, 4);
  const Alphabet a = alphabet_of(g.pa());
  const TraceBdd b = unroll(g.pa(), m_and(reach_by_deadline(a, g.tile_predicate('y')), avoid(a, g.tile_predicate('r'))), 5);
  CHECK(b.engine().stored_nodes() == b.size().internal + 3);
  CHECK(b.order().size() == b.size().internal);
  CHECK(b.stats().levels == 5u * (2 + 2));
  CHECK(b.stats().peak_intermediate >= 1);
  CHECK(b.stats().seconds >= 0.0);
}

TEST_CASE("unroll errors") {
  const Gridworld g = grid(2, 2, {}, 1, 2);
  const Monitor m = true_monitor(alphabet_of(g.pa()));
  CHECK_THROWS_AS(unroll(g.pa(), m, 0), DomainError);
  CHECK_THROWS_AS(unroll(g.pa(), true_monitor(Alphabet{5, 2}), 3), DomainError);
  CHECK_THROWS_AS(unroll(g.pa(), m, 1u << 24), ResourceError);
}

TEST_CASE("discount horizon") {
  CHECK(discount_horizon(0.5, 1.0 / 16.0) == 4);
  CHECK(discount_horizon(1.0, 0.01) == 1);
  CHECK(discount_horizon(0.125, 0.01) == 35);
  CHECK(std::pow(0.875, 35) <= 0.01);
  CHECK(std::pow(0.875, 34) > 0.01);
  CHECK(discount_horizon(0.25, 0.5) == 3);

  const Gridworld g = grid(2, 2, {}, 0, 1);
  const Discounted d = with_discount(g.pa(), 1, 3, 0.01);
  CHECK(d.horizon == 35);
  CHECK(d.sink_bit == g.pa().state_bits);
  CHECK(d.pa.state_bits == g.pa().state_bits + 1);
  CHECK(d.pa.coin_bits == g.pa().coin_bits + 3);
  CHECK(with_discount(g.pa(), 1, 1, 1.0 / 16.0).horizon == 4);
  CHECK(with_discount(g.pa(), 1, 0, 0.01).horizon == 1);
  CHECK_THROWS_AS(with_discount(g.pa(), 0, 3, 0.01), DomainError);
  CHECK_THROWS_AS(with_discount(g.pa(), 9, 3, 0.01), DomainError);
  CHECK_THROWS_AS(with_discount(g.pa(), 1, 3, 1.5), DomainError);
}

TEST_CASE("discounted dynamics latch the sink with probability gamma") {
  const Gridworld g = grid(2, 2, {}, 1, 2);
  const Discounted d = with_discount(g.pa(), 3, 3, 0.01);
  const std::uint64_t flag = std::uint64_t{1} << d.sink_bit;
  for (std::uint64_t s = 0; s < g.pa().state_count(); ++s) {
    for (std::uint64_t a = 0; a < 4; ++a) {
      std::uint64_t into_sink = 0;
      for (std::uint64_t c = 0; c < d.pa.coin_outcomes(); ++c) {
        const std::uint64_t n = d.pa.step(s, a, c);
        if (n & flag) {
          ++into_sink;
          CHECK((n & ~flag) == s);
        }
        // Once in the sink the state never changes.
        CHECK(d.pa.step(s | flag, a, c) == (s | flag));
      }
      CHECK(into_sink * 8 == 3 * d.pa.coin_outcomes());
    }
  }
}

TEST_CASE("after the sink is entered every later level is irrelevant") {
  const Gridworld g = grid(2, 2, {"wr", "yw"}, 1, 2);
  const Alphabet a = alphabet_of(g.pa());
  const Discounted d = with_discount(g.pa(), 1, 1, 0.2);
  const Monitor m =
      freeze_at_sink(m_and(reach_by_deadline(a, g.tile_predicate('y')), avoid(a, g.tile_predicate('r'))), d);
  const unsigned tau = 3;
  const TraceBdd b = unroll(d.pa, m, tau);
  const std::size_t n = b.meta().levels();
  const unsigned w = b.meta().step_width();
  REQUIRE(n == 12);
  testing::Rng rng(6);
  std::size_t frozen_paths = 0;
  for (std::uint64_t word = 0; word < (std::uint64_t{1} << n); ++word) {
    const auto bits = testing::assignment(word, static_cast<unsigned>(n));
    const Decoded dec = decode(b.meta(), bits);
    std::uint64_t s = d.pa.initial_state;
    unsigned entered = tau;
    for (unsigned t = 0; t < tau && entered == tau; ++t) {
      s = d.pa.step(s, dec.actions[t], dec.coins[t]);
      if ((s >> d.sink_bit) & 1u) entered = t;
    }
    if (entered + 1 >= tau) continue;
    ++frozen_paths;
    const Value v = b.eval(bits);
    for (std::size_t l = (entered + 1) * w; l < n; ++l) {
      auto flipped = bits;
      flipped[l] ^= 1u;
      REQUIRE(b.eval(flipped) == v);
    }
  }
  CHECK(frozen_paths > 0);
  // Structurally: no node below an entry edge, so the diagram is smaller
  // than the undiscounted one over the same number of levels.
  CHECK(b.size().internal <= size_bound(d.pa, m, tau));
}

TEST_CASE("freeze_at_sink keeps the verdict of the entry step") {
  const Gridworld g = grid(2, 1, {"wr"}, 0, 1);
  const Alphabet a = alphabet_of(g.pa());
  const Discounted d = with_discount(g.pa(), 1, 1, 0.4);
  const Monitor m = freeze_at_sink(avoid(a, g.tile_predicate('r')), d);
  const std::uint64_t flag = std::uint64_t{1} << d.sink_bit;
  const std::uint64_t red = g.encode({1, 0});
  // Ended in the white cell; a later red state reading is not observed.
  CHECK(accepts(m, std::vector<TraceStep>{{0, flag}, {0, flag | red}}, 0));
  CHECK_FALSE(accepts(m, std::vector<TraceStep>{{0, red}, {0, flag | red}}, 0));
}
