#pragma once

/// @file gridworld.hpp
/// @brief Slippery gridworlds encoded in the random-bit model.
///
/// Cells are (x, y) with y growing downwards. A state encodes x in the low
/// bits and y in the bits above them. With probability slip_numerator /
/// slip_denominator (coin values below the numerator) the agent moves in the
/// slip direction instead of the intended one. Moves off the grid leave the
/// agent in place.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "specinfer/circuit.hpp"
#include "specinfer/dynamics.hpp"

namespace specinfer {

enum class Direction : std::uint8_t { up, down, left, right };

std::string_view direction_name(Direction d) noexcept;
/// Throws ParseError for unknown names.
Direction parse_direction(std::string_view name);

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Tile colors: y(ellow), r(ed), b(lue), n (brown), w(hite).
inline constexpr std::string_view kTileColors = "yrbnw";

struct GridSpec {
  unsigned width = 1;
  unsigned height = 1;
  /// `height` rows of `width` tile-color characters; row 0 is y = 0. Empty
  /// means all white.
  std::vector<std::string> tiles;
  std::uint64_t slip_numerator = 0;
  /// Must be a power of two; its exponent is the coin count q.
  std::uint64_t slip_denominator = 1;
  Direction slip_direction = Direction::left;
  std::vector<Direction> actions = {Direction::up, Direction::down, Direction::left, Direction::right};
  Cell start;
};

class Gridworld {
public:
  const RandomBitPA& pa() const noexcept { return pa_; }
  const GridSpec& spec() const noexcept { return spec_; }

  unsigned x_bits() const noexcept { return x_bits_; }
  unsigned y_bits() const noexcept { return y_bits_; }

  bool contains(Cell c) const noexcept;
  /// Throws DomainError for cells outside the grid.
  std::uint64_t encode(Cell c) const;
  /// Throws DomainError for encodings of no cell.
  Cell decode(std::uint64_t state) const;

  char color(Cell c) const;
  /// Predicate over state bits: the agent stands on a tile of `color`.
  BitCircuit tile_predicate(char color) const;

  std::uint64_t action_id(std::string_view name) const;
  Direction action_direction(std::uint64_t action) const;

  /// Deterministic clamped move.
  Cell move(Cell c, Direction d) const noexcept;

  /// Reference table with probabilities computed directly from the slip
  /// rate. Encodings of no cell get all-zero rows.
  ExplicitPA explicit_table() const;
  /// Same, but with an arbitrary (possibly non-dyadic) slip probability.
  ExplicitPA explicit_table(double slip_probability) const;

private:
  friend Gridworld make_gridworld(GridSpec spec);
  Gridworld() = default;

  GridSpec spec_;
  unsigned x_bits_ = 0;
  unsigned y_bits_ = 0;
  RandomBitPA pa_;
};

/// Throws DomainError for a non-dyadic slip rate, a slip rate above one,
/// tile rows of the wrong shape, unknown colors or an off-grid start.
Gridworld make_gridworld(GridSpec spec);

/// Exponent of a power of two; DomainError otherwise.
unsigned dyadic_exponent(std::uint64_t denominator);

} // namespace specinfer
