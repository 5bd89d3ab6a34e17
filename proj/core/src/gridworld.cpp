#include "specinfer/gridworld.hpp"

#include <algorithm>
#include <string>

#include "specinfer/error.hpp"

namespace specinfer {

std::string_view direction_name(Direction d) noexcept {
  switch (d) {
  case Direction::up: return "up";
  case Direction::down: return "down";
  case Direction::left: return "left";
  case Direction::right: return "right";
  }
  return "?";
}

Direction parse_direction(std::string_view name) {
  for (Direction d : {Direction::up, Direction::down, Direction::left, Direction::right}) {
    if (direction_name(d) == name) return d;
  }
  throw ParseError("unknown direction '" + std::string(name) + "'");
}

unsigned dyadic_exponent(std::uint64_t denominator) {
  if (denominator == 0 || (denominator & (denominator - 1)) != 0) {
    throw DomainError("slip denominator " + std::to_string(denominator) +
                      " is not a power of two; pick q and round the probability explicitly");
  }
  return bits_for(denominator);
}

bool Gridworld::contains(Cell c) const noexcept {
  return c.x >= 0 && c.y >= 0 && static_cast<unsigned>(c.x) < spec_.width &&
         static_cast<unsigned>(c.y) < spec_.height;
}

std::uint64_t Gridworld::encode(Cell c) const {
  if (!contains(c)) {
    throw DomainError("cell (" + std::to_string(c.x) + ", " + std::to_string(c.y) + ") is off the grid");
  }
  return static_cast<std::uint64_t>(c.x) | (static_cast<std::uint64_t>(c.y) << x_bits_);
}

Cell Gridworld::decode(std::uint64_t state) const {
  const std::uint64_t mask = (std::uint64_t{1} << x_bits_) - 1;
  const Cell c{static_cast<int>(state & mask), static_cast<int>(state >> x_bits_)};
  if (!contains(c)) throw DomainError("state " + std::to_string(state) + " encodes no cell");
  return c;
}

char Gridworld::color(Cell c) const {
  if (!contains(c)) throw DomainError("color query off the grid");
  if (spec_.tiles.empty()) return 'w';
  return spec_.tiles[static_cast<std::size_t>(c.y)][static_cast<std::size_t>(c.x)];
}

BitCircuit Gridworld::tile_predicate(char color) const {
  if (kTileColors.find(color) == std::string_view::npos) {
    throw DomainError(std::string("unknown tile color '") + color + "'");
  }
  BitCircuit p;
  const auto state = wires::inputs(p.circuit, Port::state, pa_.state_bits);
  std::vector<Wire> hits;
  for (unsigned y = 0; y < spec_.height; ++y) {
    for (unsigned x = 0; x < spec_.width; ++x) {
      const Cell c{static_cast<int>(x), static_cast<int>(y)};
      if (this->color(c) == color) hits.push_back(wires::equals_const(p.circuit, state, encode(c)));
    }
  }
  p.out = p.circuit.or_all(hits);
  return p;
}

std::uint64_t Gridworld::action_id(std::string_view name) const {
  const Direction d = parse_direction(name);
  const auto it = std::find(spec_.actions.begin(), spec_.actions.end(), d);
  if (it == spec_.actions.end()) {
    throw DomainError("action '" + std::string(name) + "' is not available in this world");
  }
  return static_cast<std::uint64_t>(it - spec_.actions.begin());
}

Direction Gridworld::action_direction(std::uint64_t action) const {
  if (action >= spec_.actions.size()) throw DomainError("action id out of range");
  return spec_.actions[action];
}

Cell Gridworld::move(Cell c, Direction d) const noexcept {
  Cell n = c;
  switch (d) {
  case Direction::up: n.y -= 1; break;
  case Direction::down: n.y += 1; break;
  case Direction::left: n.x -= 1; break;
  case Direction::right: n.x += 1; break;
  }
  return contains(n) ? n : c;
}

ExplicitPA Gridworld::explicit_table() const {
  return explicit_table(static_cast<double>(spec_.slip_numerator) /
                        static_cast<double>(spec_.slip_denominator));
}

ExplicitPA Gridworld::explicit_table(double slip_probability) const {
  ExplicitPA table(pa_.state_count(), pa_.action_encodings());
  for (unsigned y = 0; y < spec_.height; ++y) {
    for (unsigned x = 0; x < spec_.width; ++x) {
      const Cell c{static_cast<int>(x), static_cast<int>(y)};
      const std::uint64_t s = encode(c);
      for (std::size_t a = 0; a < spec_.actions.size(); ++a) {
        table.at(s, a, encode(move(c, spec_.slip_direction))) += slip_probability;
        table.at(s, a, encode(move(c, spec_.actions[a]))) += 1.0 - slip_probability;
      }
    }
  }
  return table;
}

namespace {

/// Clamped one-cell move of the (x, y) wire words.
std::pair<std::vector<Wire>, std::vector<Wire>> move_word(Circuit& c, const GridSpec& spec,
                                                          std::span<const Wire> x, std::span<const Wire> y,
                                                          Direction d) {
  std::vector<Wire> nx(x.begin(), x.end());
  std::vector<Wire> ny(y.begin(), y.end());
  switch (d) {
  case Direction::right:
    nx = wires::mux(c, wires::equals_const(c, x, spec.width - 1), x, wires::increment(c, x));
    break;
  case Direction::left:
    nx = wires::mux(c, wires::equals_const(c, x, 0), x, wires::decrement(c, x));
    break;
  case Direction::down:
    ny = wires::mux(c, wires::equals_const(c, y, spec.height - 1), y, wires::increment(c, y));
    break;
  case Direction::up:
    ny = wires::mux(c, wires::equals_const(c, y, 0), y, wires::decrement(c, y));
    break;
  }
  return {nx, ny};
}

} // namespace

Gridworld make_gridworld(GridSpec spec) {
  if (spec.width == 0 || spec.height == 0) throw DomainError("gridworld: empty grid");
  if (spec.actions.empty()) throw DomainError("gridworld: no actions");
  const unsigned q = dyadic_exponent(spec.slip_denominator);
  if (spec.slip_numerator > spec.slip_denominator) throw DomainError("gridworld: slip probability above one");
  if (!spec.tiles.empty()) {
    if (spec.tiles.size() != spec.height) throw DomainError("gridworld: tile rows do not match the height");
    for (const auto& row : spec.tiles) {
      if (row.size() != spec.width) throw DomainError("gridworld: tile row '" + row + "' has the wrong width");
      for (char ch : row) {
        if (kTileColors.find(ch) == std::string_view::npos) {
          throw DomainError(std::string("gridworld: unknown tile color '") + ch + "'");
        }
      }
    }
  }

  Gridworld world;
  world.spec_ = std::move(spec);
  const GridSpec& g = world.spec_;
  world.x_bits_ = bits_for(g.width);
  world.y_bits_ = bits_for(g.height);
  if (!world.contains(g.start)) throw DomainError("gridworld: start cell is off the grid");

  RandomBitPA& pa = world.pa_;
  pa.state_bits = world.x_bits_ + world.y_bits_;
  pa.action_bits = bits_for(g.actions.size());
  pa.coin_bits = q;
  pa.initial_state = world.encode(g.start);

  Circuit& c = pa.circuit;
  const auto state = wires::inputs(c, Port::state, pa.state_bits);
  const auto action = wires::inputs(c, Port::action, pa.action_bits);
  const auto coins = wires::inputs(c, Port::coin, pa.coin_bits);
  const std::span<const Wire> x(state.data(), world.x_bits_);
  const std::span<const Wire> y(state.data() + world.x_bits_, world.y_bits_);

  const auto concat = [](const std::pair<std::vector<Wire>, std::vector<Wire>>& xy) {
    std::vector<Wire> out = xy.first;
    out.insert(out.end(), xy.second.begin(), xy.second.end());
    return out;
  };

  // Intended move: a mux chain over the action ids; invalid encodings fall
  // through to the last action and are masked by valid_action.
  std::vector<Wire> intended = concat(move_word(c, g, x, y, g.actions.back()));
  for (std::size_t i = g.actions.size() - 1; i-- > 0;) {
    const Wire selected = wires::equals_const(c, action, i);
    intended = wires::mux(c, selected, concat(move_word(c, g, x, y, g.actions[i])), intended);
  }
  const Wire slip = wires::less_than_const(c, coins, g.slip_numerator);
  pa.next = wires::mux(c, slip, concat(move_word(c, g, x, y, g.slip_direction)), intended);
  pa.valid_action = wires::less_than_const(c, action, g.actions.size());
  pa.validate();
  return world;
}

} // namespace specinfer
