#include "specinfer/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "specinfer/error.hpp"

namespace specinfer {

using bdd::NodeRef;

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t level_of(const TraceBdd& b, NodeRef n) {
  return n.is_terminal() ? b.meta().levels() : b.engine().level(n);
}

/// Action levels skipped on the edge from `parent` to `child`.
std::size_t skipped_decisions(const TraceBdd& b, NodeRef parent, NodeRef child) {
  const LevelMeta& meta = b.meta();
  return meta.decisions_before(level_of(b, child)) - meta.decisions_before(level_of(b, parent) + 1);
}

double log_add_exp(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(-std::abs(x - y)));
}

} // namespace

ValueTable::ValueTable(double theta, Rewards rewards, std::vector<double> values, double root_value)
    : theta_(theta), rewards_(rewards), values_(std::move(values)), root_value_(root_value) {}

double ValueTable::value(NodeRef n) const {
  if (n == bdd::ONE) return theta_ * rewards_.sat;
  if (n == bdd::ZERO) return theta_ * rewards_.unsat;
  if (n == bdd::BOT) throw DomainError("planner: BOT has no value");
  if (n.id() >= values_.size() || std::isnan(values_[n.id()])) {
    throw DomainError("planner: node is not part of the value table");
  }
  return values_[n.id()];
}

double branch_value(const TraceBdd& b, const ValueTable& vt, NodeRef node, bool branch) {
  const bdd::Node& n = b.engine().node(node);
  const NodeRef child = branch ? n.hi : n.lo;
  if (child == bdd::BOT) return kNegInf;
  return vt.value(child) + static_cast<double>(skipped_decisions(b, node, child)) * kLn2;
}

ValueTable value_backup(const TraceBdd& b, double theta, Rewards rewards) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("planner: θ must be finite and non-negative");
  std::vector<double> values(b.engine().stored_nodes(), std::numeric_limits<double>::quiet_NaN());
  ValueTable vt(theta, rewards, {}, 0.0);
  const auto child_value = [&](NodeRef parent, NodeRef child) {
    if (child == bdd::BOT) return kNegInf;
    const double v = child.is_terminal() ? vt.value(child) : values[child.id()];
    return v + static_cast<double>(skipped_decisions(b, parent, child)) * kLn2;
  };
  for (NodeRef n : b.order()) {
    const bdd::Node& node = b.engine().node(n);
    if (node.lo == bdd::BOT && node.hi == bdd::BOT) throw StructuralError("planner: node with BOT on both branches");
    const double lo = child_value(n, node.lo);
    const double hi = child_value(n, node.hi);
    if (b.meta().is_action(node.level)) {
      values[n.id()] = log_add_exp(lo, hi);
    } else if (lo == kNegInf) {
      values[n.id()] = hi;
    } else if (hi == kNegInf) {
      values[n.id()] = lo;
    } else {
      values[n.id()] = 0.5 * (lo + hi);
    }
  }
  const NodeRef root = b.root();
  if (root == bdd::BOT) throw StructuralError("planner: every trace is invalid");
  const double base = root.is_terminal() ? vt.value(root) : values[root.id()];
  const double root_value = base + static_cast<double>(b.meta().decisions_before(level_of(b, root))) * kLn2;
  return ValueTable(theta, rewards, std::move(values), root_value);
}

double policy_at(const TraceBdd& b, const ValueTable& vt, NodeRef node, bool branch) {
  if (node.is_terminal()) throw DomainError("planner: policy queried at a terminal");
  if (!b.meta().is_action(b.engine().level(node))) throw DomainError("planner: policy queried at a coin level");
  const double q = branch_value(b, vt, node, branch);
  if (q == kNegInf) return 0.0;
  return std::exp(q - vt.value(node));
}

double sat_prob(const TraceBdd& b, const ValueTable& vt) {
  std::vector<double> prob(b.engine().stored_nodes(), 0.0);
  const auto p_of = [&prob](NodeRef n) {
    if (n == bdd::ONE) return 1.0;
    if (n == bdd::ZERO || n == bdd::BOT) return 0.0;
    return prob[n.id()];
  };
  for (NodeRef n : b.order()) {
    const bdd::Node& node = b.engine().node(n);
    if (b.meta().is_action(node.level)) {
      prob[n.id()] = policy_at(b, vt, n, false) * p_of(node.lo) + policy_at(b, vt, n, true) * p_of(node.hi);
    } else if (node.lo == bdd::BOT) {
      prob[n.id()] = p_of(node.hi);
    } else if (node.hi == bdd::BOT) {
      prob[n.id()] = p_of(node.lo);
    } else {
      prob[n.id()] = 0.5 * (p_of(node.lo) + p_of(node.hi));
    }
  }
  return p_of(b.root());
}

PathCursor::PathCursor(const TraceBdd& b, const ValueTable& vt) : b_(&b), vt_(&vt), node_(b.root()) {}

bool PathCursor::tested() const { return !node_.is_terminal() && b_->engine().level(node_) == level_; }

double PathCursor::policy(bool bit) const {
  if (at_end()) throw DomainError("planner: path cursor is past the last level");
  if (!b_->meta().is_action(static_cast<bdd::Level>(level_))) return 1.0;
  if (node_ == bdd::BOT) return 0.0;
  if (!tested()) return 0.5;
  return policy_at(*b_, *vt_, node_, bit);
}

void PathCursor::advance(bool bit) {
  const double p = policy(bit);
  log_policy_ += std::log(p);
  if (tested()) {
    const bdd::Node& n = b_->engine().node(node_);
    node_ = bit ? n.hi : n.lo;
  }
  ++level_;
}

double path_log_policy(const TraceBdd& b, const ValueTable& vt, std::span<const std::uint8_t> bits) {
  if (bits.size() != b.meta().levels()) throw DomainError("planner: path length does not match the diagram");
  PathCursor cursor(b, vt);
  for (std::uint8_t bit : bits) {
    cursor.advance(bit != 0);
    if (cursor.node() == bdd::BOT) throw DomainError("planner: path encodes an invalid action");
  }
  return cursor.log_policy();
}

double clamp_target(double p, std::size_t demos) {
  const double margin = 1.0 / (2.0 * static_cast<double>(demos) + 2.0);
  return std::clamp(p, margin, 1.0 - margin);
}

PolicySolution fit_theta(const TraceBdd& b, double p_target, const FitOptions& options) {
  if (!(p_target >= 0.0 && p_target <= 1.0)) throw DomainError("fit: target probability outside [0, 1]");
  if (!(options.tolerance > 0.0)) throw DomainError("fit: tolerance must be positive");
  if (!(options.rewards.sat > options.rewards.unsat)) {
    throw DomainError("fit: the satisfying reward must exceed the violating one");
  }
  if (!(options.theta_cap > 0.0)) throw DomainError("fit: θ cap must be positive");

  PolicySolution sol;
  sol.p_target = p_target;
  const auto evaluate = [&](double theta) {
    ++sol.iterations;
    sol.theta = theta;
    sol.values = value_backup(b, theta, options.rewards);
    sol.p = sat_prob(b, sol.values);
    return sol.p;
  };
  const auto close = [&](double p) { return std::abs(p - p_target) <= options.tolerance; };

  const double p0 = evaluate(0.0);
  if (p_target <= p0) {
    sol.at_uniform = true;
    sol.converged = close(p0);
    return sol;
  }
  if (close(p0)) {
    sol.converged = true;
    return sol;
  }

  double lo = 0.0;
  double hi = std::min(1.0, options.theta_cap);
  double p_hi = evaluate(hi);
  while (p_hi < p_target && !close(p_hi)) {
    if (hi >= options.theta_cap) return sol;
    lo = hi;
    hi = std::min(2.0 * hi, options.theta_cap);
    p_hi = evaluate(hi);
  }
  if (close(p_hi)) {
    sol.converged = true;
    return sol;
  }

  while (sol.iterations < options.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double p = evaluate(mid);
    if (close(p)) {
      sol.converged = true;
      return sol;
    }
    (p < p_target ? lo : hi) = mid;
  }
  // Out of budget: report the closer bracket end.
  const double p_lo = evaluate(lo);
  if (std::abs(p_hi - p_target) < std::abs(p_lo - p_target)) evaluate(hi);
  sol.converged = close(sol.p);
  return sol;
}

} // namespace specinfer
