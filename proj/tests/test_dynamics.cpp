#include <doctest.h>

#include "specinfer/dynamics.hpp"
#include "specinfer/error.hpp"
#include "specinfer/gridworld.hpp"
#include "support/oracles.hpp"

using namespace specinfer;

namespace {

/// Right/down world with downward slip, as in the two-action figure.
Gridworld right_down(std::uint64_t slip_num, std::uint64_t slip_den) {
  GridSpec g;
  g.width = 4;
  g.height = 4;
  g.slip_numerator = slip_num;
  g.slip_denominator = slip_den;
  g.slip_direction = Direction::down;
  g.actions = {Direction::right, Direction::down};
  return make_gridworld(g);
}

Gridworld four_action(unsigned w, unsigned h, std::uint64_t num, std::uint64_t den) {
  GridSpec g;
  g.width = w;
  g.height = h;
  g.slip_numerator = num;
  g.slip_denominator = den;
  return make_gridworld(g);
}

} // namespace

TEST_CASE("Dyadic equality is rational") {
  CHECK(Dyadic{1, 1} == Dyadic{4, 3});
  CHECK_FALSE(Dyadic{1, 1} == Dyadic{3, 3});
  CHECK(Dyadic{0, 0} == Dyadic{0, 5});
  CHECK(Dyadic{3, 2}.value() == 0.75);
}

TEST_CASE("two-action world with three coins: intended move 7/8, slip 1/8") {
  const Gridworld g = right_down(1, 8);
  CHECK(g.pa().coin_bits == 3);
  const std::uint64_t s = g.encode({1, 1});
  const std::uint64_t right = g.action_id("right");
  CHECK(transition_prob(g.pa(), s, right, g.encode({2, 1})) == Dyadic{7, 3});
  CHECK(transition_prob(g.pa(), s, right, g.encode({1, 2})) == Dyadic{1, 3});
  CHECK(transition_prob(g.pa(), s, right, g.encode({0, 1})) == Dyadic{0, 3});
  // Two actions is a power of two, so every encoding is valid.
  CHECK(g.pa().action_count() == 2);
}

TEST_CASE("transition probabilities sum to one exactly") {
  testing::Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    const RandomBitPA pa = testing::random_pa(rng);
    for (std::uint64_t s = 0; s < pa.state_count(); ++s) {
      for (std::uint64_t a = 0; a < pa.action_encodings(); ++a) {
        if (!pa.is_valid_action(a)) continue;
        std::uint64_t total = 0;
        for (const Dyadic& d : successor_distribution(pa, s, a)) {
          CHECK(d.log2_den == pa.coin_bits);
          total += d.count;
        }
        CHECK(total == pa.coin_outcomes());
      }
    }
  }
}

TEST_CASE("transition probabilities match enumeration of the coin strings") {
  testing::Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    const RandomBitPA pa = testing::random_pa(rng);
    for (std::uint64_t s = 0; s < pa.state_count(); ++s) {
      for (std::uint64_t a = 0; a < pa.action_encodings(); ++a) {
        if (!pa.is_valid_action(a)) {
          CHECK_THROWS_AS(transition_prob(pa, s, a, 0), DomainError);
          continue;
        }
        std::vector<std::uint64_t> counts(pa.state_count());
        for (std::uint64_t c = 0; c < pa.coin_outcomes(); ++c) ++counts[pa.step(s, a, c)];
        for (std::uint64_t n = 0; n < pa.state_count(); ++n) {
          CHECK(transition_prob(pa, s, a, n) == Dyadic{counts[n], pa.coin_bits});
        }
      }
    }
  }
}

TEST_CASE("approximation gap") {
  SUBCASE("exact explicit table") {
    const Gridworld g = four_action(3, 2, 1, 4);
    CHECK(approximation_gap(g.pa(), g.explicit_table()) == 0.0);
  }
  SUBCASE("slip 1/32 with five coins") {
    const Gridworld g = four_action(8, 8, 1, 32);
    CHECK(approximation_gap(g.pa(), g.explicit_table(1.0 / 32.0)) == 0.0);
  }
  SUBCASE("slip 1/3 approximated by 11/32") {
    const Gridworld g = four_action(4, 4, 11, 32);
    CHECK(approximation_gap(g.pa(), g.explicit_table(1.0 / 3.0)) == doctest::Approx(1.0 / 96.0).epsilon(1e-12));
  }
  SUBCASE("shape mismatch") {
    const Gridworld g = four_action(4, 4, 1, 32);
    const Gridworld h = four_action(4, 2, 1, 32);
    CHECK_THROWS_AS(approximation_gap(g.pa(), h.explicit_table()), DomainError);
  }
}

TEST_CASE("explicit tables are stochastic") {
  const Gridworld g = four_action(3, 3, 3, 8);
  const ExplicitPA t = g.explicit_table();
  CHECK_NOTHROW(t.validate());
  ExplicitPA bad(2, 1);
  bad.at(0, 0, 0) = 0.5;
  bad.at(0, 0, 1) = 0.4;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("gridworld construction") {
  SUBCASE("8x8 with slip 1/32") {
    const Gridworld g = four_action(8, 8, 1, 32);
    CHECK(g.pa().coin_bits == 5);
    CHECK(g.pa().state_bits == 6);
    CHECK(g.pa().action_bits == 2);
  }
  SUBCASE("no slip is deterministic") {
    const Gridworld g = four_action(3, 3, 0, 1);
    for (std::uint64_t s = 0; s < g.pa().state_count(); ++s) {
      if (!g.contains({static_cast<int>(s % 4), static_cast<int>(s / 4)})) continue;
      for (std::uint64_t a = 0; a < 4; ++a) {
        for (const Dyadic& d : successor_distribution(g.pa(), s, a)) CHECK((d.count == 0 || d.value() == 1.0));
      }
    }
  }
  SUBCASE("2x1 grid, slip 1/2") {
    const Gridworld g = four_action(2, 1, 1, 2);
    const auto p = transition_prob(g.pa(), g.encode({0, 0}), g.action_id("right"), g.encode({1, 0}));
    CHECK(p.value() == 0.5);
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(four_action(2, 2, 1, 3), DomainError);
    CHECK_THROWS_AS(four_action(2, 2, 5, 4), DomainError);
    GridSpec bad;
    bad.width = 2;
    bad.height = 1;
    bad.tiles = {"wx"};
    CHECK_THROWS_AS(make_gridworld(bad), DomainError);
    bad.tiles = {"w"};
    CHECK_THROWS_AS(make_gridworld(bad), DomainError);
    bad.tiles = {};
    bad.start = {3, 0};
    CHECK_THROWS_AS(make_gridworld(bad), DomainError);
    CHECK_THROWS_AS(parse_direction("north"), ParseError);
  }
}

TEST_CASE("boundary moves leave the state unchanged") {
  const Gridworld g = four_action(3, 2, 0, 1);
  for (int x = 0; x < 3; ++x) {
    for (int y = 0; y < 2; ++y) {
      const Cell c{x, y};
      for (std::uint64_t a = 0; a < 4; ++a) {
        const Direction d = g.action_direction(a);
        const bool outward = (d == Direction::left && x == 0) || (d == Direction::right && x == 2) ||
                             (d == Direction::up && y == 0) || (d == Direction::down && y == 1);
        const std::uint64_t next = g.pa().step(g.encode(c), a, 0);
        if (outward) CHECK(next == g.encode(c));
        CHECK(g.decode(next) == g.move(c, d));
      }
    }
  }
}

TEST_CASE("encodings and tile predicates") {
  GridSpec spec;
  spec.width = 3;
  spec.height = 2;
  spec.tiles = {"ywr", "bnw"};
  const Gridworld g = make_gridworld(spec);
  CHECK(g.encode({2, 1}) == (1u << g.x_bits()) + 2);
  CHECK(g.decode(g.encode({1, 1})) == Cell{1, 1});
  CHECK_THROWS_AS(g.encode({3, 0}), DomainError);
  CHECK_THROWS_AS(g.decode(3), DomainError);
  CHECK(g.color({0, 1}) == 'b');
  const BitCircuit red = g.tile_predicate('r');
  for (int x = 0; x < 3; ++x) {
    for (int y = 0; y < 2; ++y) {
      CHECK(red.eval(Valuation{g.encode({x, y}), 0, 0, 0}) == (g.color({x, y}) == 'r'));
    }
  }
}

TEST_CASE("invalid action encodings with three actions") {
  GridSpec spec;
  spec.width = 2;
  spec.height = 2;
  spec.actions = {Direction::up, Direction::left, Direction::right};
  const Gridworld g = make_gridworld(spec);
  CHECK(g.pa().action_bits == 2);
  CHECK(g.pa().action_count() == 3);
  CHECK_FALSE(g.pa().is_valid_action(3));
  CHECK_THROWS_AS(g.action_id("down"), DomainError);
}
