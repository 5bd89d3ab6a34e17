#pragma once

/// @file circuit.hpp
/// @brief Acyclic Boolean gate networks over state, action, coin and history
/// input bits.

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

namespace specinfer {

/// Which bit-vector an input gate reads from.
enum class Port : std::uint8_t { state, action, coin, history };

struct Input {
  Port port;
  std::uint32_t index;
};

/// Handle to a gate inside one Circuit.
class Wire {
public:
  constexpr Wire() noexcept = default;
  constexpr explicit Wire(std::uint32_t id) noexcept : id_(id) {}
  constexpr std::uint32_t id() const noexcept { return id_; }
  friend constexpr bool operator==(Wire, Wire) noexcept = default;

private:
  std::uint32_t id_ = 0;
};

enum class GateKind : std::uint8_t { constant, input, not_, and_, or_, xor_, ite };

struct Gate {
  GateKind kind;
  // constant: a = value. input: a = port, b = index. not: a. and/or/xor: a, b.
  // ite: a ? b : c.
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t c = 0;
};

/// Little-endian bit-vectors fed to a circuit's inputs.
struct Valuation {
  std::uint64_t state = 0;
  std::uint64_t action = 0;
  std::uint64_t coin = 0;
  std::uint64_t history = 0;
};

/// Gate pool with structural hashing and constant folding. Gates only
/// reference earlier gates, so every circuit is acyclic by construction.
class Circuit {
public:
  Circuit();

  Wire constant(bool value);
  Wire input(Port port, std::uint32_t index);
  Wire not_(Wire x);
  Wire and_(Wire x, Wire y);
  Wire or_(Wire x, Wire y);
  Wire xor_(Wire x, Wire y);
  Wire ite(Wire cond, Wire then_, Wire else_);
  Wire implies(Wire x, Wire y) { return or_(not_(x), y); }
  Wire iff(Wire x, Wire y) { return not_(xor_(x, y)); }
  Wire and_all(std::span<const Wire> xs);
  Wire or_all(std::span<const Wire> xs);

  const Gate& gate(Wire w) const { return gates_.at(w.id()); }
  std::size_t size() const noexcept { return gates_.size(); }

  /// Values of every gate under `v`, indexed by wire id.
  std::vector<std::uint8_t> evaluate(const Valuation& v) const;
  bool eval(Wire w, const Valuation& v) const;

  /// Highest referenced input index + 1 on `port` (0 when unused).
  std::uint32_t input_width(Port port) const;
  /// Whether the cone of `root` reads any input on `port`.
  bool depends_on(Wire root, Port port) const;

  /// Copies the cones of `roots` from `other` into this circuit, replacing
  /// each input of `other` by the wire `map_input` returns for it.
  std::vector<Wire> import(const Circuit& other, std::span<const Wire> roots,
                           const std::function<Wire(Input)>& map_input);

private:
  struct Key {
    GateKind kind;
    std::uint32_t a, b, c;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  Wire add(Gate g);
  bool is_const(Wire w, bool value) const;

  std::vector<Gate> gates_;
  std::unordered_map<Key, Wire, KeyHash> interned_;
};

/// A single-output circuit, used for tile and action predicates.
struct BitCircuit {
  Circuit circuit;
  Wire out;

  bool eval(const Valuation& v) const { return circuit.eval(out, v); }
};

/// Reads bit `i` of a little-endian word.
constexpr bool bit_of(std::uint64_t word, unsigned i) noexcept { return ((word >> i) & 1u) != 0; }

/// Bits needed to give `count` values distinct encodings (0 for count <= 1).
unsigned bits_for(std::uint64_t count) noexcept;

/// Wire-vector helpers over little-endian words.
namespace wires {

std::vector<Wire> inputs(Circuit& c, Port port, unsigned width);
Wire equals_const(Circuit& c, std::span<const Wire> word, std::uint64_t value);
Wire less_than_const(Circuit& c, std::span<const Wire> word, std::uint64_t bound);
std::vector<Wire> constant_word(Circuit& c, unsigned width, std::uint64_t value);
std::vector<Wire> increment(Circuit& c, std::span<const Wire> word);
std::vector<Wire> decrement(Circuit& c, std::span<const Wire> word);
std::vector<Wire> mux(Circuit& c, Wire cond, std::span<const Wire> then_, std::span<const Wire> else_);

} // namespace wires

} // namespace specinfer
