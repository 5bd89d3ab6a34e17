#pragma once

/// @file compiler.hpp
/// @brief Unrolls dynamics composed with a monitor into one time-ordered
/// decision diagram over action and coin bits.
///
/// Levels are time-major. Step t occupies n_a + q consecutive levels: its
/// action bits, most significant first, then its coin bits, most significant
/// first. The diagram maps a bit string to ONE when the decoded trace
/// satisfies the monitor, ZERO when it does not and BOT when some step's
/// action bits encode no action.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "specinfer/bdd.hpp"
#include "specinfer/dynamics.hpp"
#include "specinfer/monitor.hpp"

namespace specinfer {

enum class LevelRole : std::uint8_t { action, coin };

struct LevelInfo {
  unsigned step = 0;
  LevelRole role = LevelRole::action;
  /// Bit index within the step's little-endian action or coin word.
  unsigned bit = 0;
};

class LevelMeta {
public:
  LevelMeta() = default;
  LevelMeta(unsigned horizon, unsigned action_bits, unsigned coin_bits);

  unsigned horizon() const noexcept { return horizon_; }
  unsigned action_bits() const noexcept { return action_bits_; }
  unsigned coin_bits() const noexcept { return coin_bits_; }
  std::size_t levels() const noexcept { return static_cast<std::size_t>(horizon_) * step_width(); }
  unsigned step_width() const noexcept { return action_bits_ + coin_bits_; }

  LevelInfo info(bdd::Level level) const;
  bool is_action(bdd::Level level) const { return info(level).role == LevelRole::action; }
  bdd::Level action_level(unsigned step, unsigned bit) const;
  bdd::Level coin_level(unsigned step, unsigned bit) const;

  /// Action levels strictly below `level` (level may equal levels()).
  std::size_t decisions_before(std::size_t level) const;

  /// Bit string of a trace given per-step action and coin words.
  std::vector<std::uint8_t> encode(std::span<const std::uint64_t> actions,
                                   std::span<const std::uint64_t> coins) const;

private:
  unsigned horizon_ = 0;
  unsigned action_bits_ = 0;
  unsigned coin_bits_ = 0;
};

struct CompileStats {
  std::size_t internal_nodes = 0;
  std::size_t total_nodes = 0;
  std::size_t levels = 0;
  double seconds = 0.0;
  /// Largest intermediate diagram seen while composing.
  std::size_t peak_intermediate = 0;
};

/// A compiled diagram together with its level layout. The engine holds only
/// the reachable nodes of the root.
class TraceBdd {
public:
  TraceBdd(std::shared_ptr<bdd::Manager> engine, bdd::NodeRef root, LevelMeta meta, CompileStats stats);

  const bdd::Manager& engine() const noexcept { return *engine_; }
  bdd::NodeRef root() const noexcept { return root_; }
  const LevelMeta& meta() const noexcept { return meta_; }
  const CompileStats& stats() const noexcept { return stats_; }

  /// Reachable internal nodes, children before parents.
  std::span<const bdd::NodeRef> order() const noexcept { return order_; }

  bdd::Value eval(std::span<const std::uint8_t> bits) const { return engine_->eval(root_, bits); }
  bdd::SizeInfo size() const { return engine_->size(root_); }

private:
  std::shared_ptr<bdd::Manager> engine_;
  bdd::NodeRef root_;
  LevelMeta meta_;
  CompileStats stats_;
  std::vector<bdd::NodeRef> order_;
};

/// Diagrams of the cones of `roots`, with each circuit input replaced by the
/// diagram `input` returns for it.
std::vector<bdd::NodeRef> lower_circuit(bdd::Manager& mgr, const Circuit& c, std::span<const Wire> roots,
                                        const std::function<bdd::NodeRef(Input)>& input);

/// Builds the diagram backwards from the acceptance predicate by `horizon`
/// rounds of vector composition, never materializing the decision tree.
/// Throws DomainError for horizon 0 or mismatched alphabets and
/// ResourceError when the variable count overflows the engine.
TraceBdd unroll(const RandomBitPA& pa, const Monitor& m, unsigned horizon);

/// τ·(n_a + q)·(2^q·|A|·|S|·|S_φ|) with |S| = 2^n_s, |S_φ| = 2^n_h and |A|
/// the number of valid action encodings. Saturates at UINT64_MAX.
std::uint64_t size_bound(const RandomBitPA& pa, const Monitor& m, unsigned horizon);

/// τ·|S|·|A|·|S_φ|: nodes of an explicit product of monitor, dynamics and
/// time step.
std::uint64_t explicit_product_size(const RandomBitPA& pa, const Monitor& m, unsigned horizon);

/// Dynamics extended with an absorbing end-of-episode flag.
struct Discounted {
  RandomBitPA pa;
  /// Smallest τ with (1 − γ)^τ ≤ ε.
  unsigned horizon = 1;
  /// State bit holding the end-of-episode flag.
  unsigned sink_bit = 0;
};

/// Adds one sink flag state bit and `gamma_bits` coins per step; the flag
/// latches with probability gamma_num / 2^gamma_bits and freezes the state.
/// Throws DomainError unless 0 < γ ≤ 1 and 0 < ε < 1.
Discounted with_discount(const RandomBitPA& pa, std::uint64_t gamma_num, unsigned gamma_bits, double epsilon);

/// Smallest τ ≥ 1 with (1 − γ)^τ ≤ ε.
unsigned discount_horizon(double gamma, double epsilon);

/// Lifts a monitor to discounted dynamics: it observes the extended state
/// and stops updating from the step that enters the sink.
Monitor freeze_at_sink(const Monitor& m, const Discounted& d);

} // namespace specinfer
