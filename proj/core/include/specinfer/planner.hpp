#pragma once

/// @file planner.hpp
/// @brief Maximum-causal-entropy soft value backup over a compiled trace
/// diagram, satisfaction probabilities and fitting of the rationality θ.
///
/// Values are in nats. An edge that skips k action levels adds k·ln 2 to the
/// child's value; skipped coin levels add nothing. Branches into BOT are
/// ignored: the decision or chance node takes the valid branch unchanged.

#include <cstddef>
#include <span>
#include <vector>

#include "specinfer/compiler.hpp"

namespace specinfer {

/// Terminal rewards before scaling by θ.
struct Rewards {
  double sat = 1.0;
  double unsat = 0.0;
};

class ValueTable {
public:
  ValueTable() = default;
  ValueTable(double theta, Rewards rewards, std::vector<double> values, double root_value);

  double theta() const noexcept { return theta_; }
  const Rewards& rewards() const noexcept { return rewards_; }

  /// Soft value of a reachable node or of ZERO/ONE. Throws DomainError for
  /// BOT or a node outside the table.
  double value(bdd::NodeRef n) const;
  /// Value of the root including the action levels skipped above it.
  double root_value() const noexcept { return root_value_; }

private:
  double theta_ = 0.0;
  Rewards rewards_;
  std::vector<double> values_;
  double root_value_ = 0.0;
};

/// One pass over the reachable nodes, children first. Throws DomainError
/// for θ < 0 and StructuralError when a node has BOT on both branches.
ValueTable value_backup(const TraceBdd& b, double theta, Rewards rewards = {});

/// Value of `branch` seen from `node`, including the skip correction.
/// Returns -inf for a branch into BOT.
double branch_value(const TraceBdd& b, const ValueTable& vt, bdd::NodeRef node, bool branch);

/// Probability of taking `branch` at an action-level node. Throws
/// DomainError at coin levels or terminals.
double policy_at(const TraceBdd& b, const ValueTable& vt, bdd::NodeRef node, bool branch);

/// Pr(trace satisfies the monitor) under the soft policy of `vt`.
double sat_prob(const TraceBdd& b, const ValueTable& vt);

/// Walks one bit string level by level, accumulating the log-probability the
/// policy assigns to its action bits. A skipped action level contributes
/// ln(1/2). Cheap to copy, so callers can branch.
class PathCursor {
public:
  PathCursor(const TraceBdd& b, const ValueTable& vt);

  /// Consumes the bit of the next level.
  void advance(bool bit);
  /// Probability the policy gives `bit` at the next level: 1 at coin
  /// levels, 1/2 at a skipped action level, 0 once the path is in BOT.
  double policy(bool bit) const;

  std::size_t level() const noexcept { return level_; }
  bdd::NodeRef node() const noexcept { return node_; }
  double log_policy() const noexcept { return log_policy_; }
  bool at_end() const noexcept { return level_ == b_->meta().levels(); }

private:
  bool tested() const;

  const TraceBdd* b_;
  const ValueTable* vt_;
  bdd::NodeRef node_;
  std::size_t level_ = 0;
  double log_policy_ = 0.0;
};

/// Log-probability the soft policy assigns to the action bits of `bits`,
/// a full assignment over the trace levels. Skipped action levels contribute
/// ln(1/2) each. Throws DomainError when the path ends in BOT.
double path_log_policy(const TraceBdd& b, const ValueTable& vt, std::span<const std::uint8_t> bits);

struct FitOptions {
  double tolerance = 1e-4;
  double theta_cap = 1048576.0;
  unsigned max_iterations = 200;
  Rewards rewards;
};

struct PolicySolution {
  double theta = 0.0;
  ValueTable values;
  double p = 0.0;
  double p_target = 0.0;
  bool converged = false;
  /// The target did not exceed the uniform-policy probability p(0).
  bool at_uniform = false;
  unsigned iterations = 0;
};

/// Doubles θ from 1 until p(θ) reaches the target or θ hits the cap, then
/// bisects. Throws DomainError for a target outside [0, 1], a non-positive
/// tolerance or rewards with sat ≤ unsat.
PolicySolution fit_theta(const TraceBdd& b, double p_target, const FitOptions& options = {});

/// Clamps an empirical frequency over `demos` samples to
/// [1/(2·demos+2), 1 − 1/(2·demos+2)].
double clamp_target(double p, std::size_t demos);

} // namespace specinfer
