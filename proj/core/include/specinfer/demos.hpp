#pragma once

/// @file demos.hpp
/// @brief Demonstrations as paths through a trace diagram, their likelihoods
/// under a fitted soft policy, and ranking of candidate specifications.

#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "specinfer/compiler.hpp"
#include "specinfer/dynamics.hpp"
#include "specinfer/error.hpp"
#include "specinfer/gridworld.hpp"
#include "specinfer/monitor.hpp"
#include "specinfer/planner.hpp"

namespace specinfer {

/// Actions taken and resulting states; the initial state is implicit.
struct Demonstration {
  std::vector<TraceStep> steps;
};

/// Coin strings that realize one transition.
struct CoinSet {
  Dyadic probability;
  /// Smallest realizing coin word, used for encoding.
  std::uint64_t lowest = 0;
  /// Every member in increasing order when found by enumeration; empty when
  /// the set was counted symbolically.
  std::vector<std::uint64_t> members;
};

/// Coin strings c with δ̂(state, action, c) = next. Enumerates up to 16 coin
/// bits and counts with a diagram beyond. The set may be empty. Throws
/// DomainError for invalid encodings.
CoinSet infer_coins(const RandomBitPA& pa, std::uint64_t state, std::uint64_t action, std::uint64_t next);

/// Caches coin sets of interior gridworld cells by (action, displacement).
/// Cells next to the border are always computed fresh, since clamping
/// breaks translation invariance there.
class CoinCache {
public:
  explicit CoinCache(const Gridworld& world);

  const CoinSet& lookup(std::uint64_t state, std::uint64_t action, std::uint64_t next);
  std::size_t hits() const noexcept { return hits_; }

private:
  const Gridworld& world_;
  std::map<std::tuple<std::uint64_t, int, int>, CoinSet> cache_;
  CoinSet scratch_;
  std::size_t hits_ = 0;
};

struct EncodedDemo {
  /// One bit per trace level.
  std::vector<std::uint8_t> bits;
  std::vector<std::uint64_t> coins;
  std::vector<Dyadic> transitions;
};

/// Throws DomainError when the length differs from the horizon and
/// ImpossibleTransition naming `demo_index` and the step when a transition
/// has probability zero.
EncodedDemo encode_demo(const RandomBitPA& pa, const LevelMeta& meta, const Demonstration& demo,
                        std::size_t demo_index = 0);

/// Σ_t log π(a_t | prefix) + log Pr(s_{t+1} | s_t, a_t).
double demo_log_likelihood(const TraceBdd& b, const ValueTable& vt, const EncodedDemo& demo);

/// Fraction of `demos` accepted by `m`, before clamping. Throws DomainError
/// for an empty set.
double satisfaction_frequency(std::span<const Demonstration> demos, const Monitor& m, std::uint64_t initial_state);

/// satisfaction_frequency clamped with clamp_target.
double empirical_sat_prob(std::span<const Demonstration> demos, const Monitor& m, std::uint64_t initial_state);

struct Candidate {
  std::string name;
  Monitor monitor;
  /// Unset means uniform over the candidate set.
  std::optional<double> log_prior;
};

struct RankOptions {
  FitOptions fit;
  /// Fit every candidate to this target instead of its empirical frequency.
  std::optional<double> p_target;
  unsigned jobs = 1;
};

struct ReportRow {
  std::string name;
  std::size_t internal_nodes = 0;
  std::size_t total_nodes = 0;
  double compile_seconds = 0.0;
  double theta = 0.0;
  /// Clamped satisfaction frequency of the demonstrations.
  double p_hat = 0.0;
  /// Satisfaction probability of the fitted policy.
  double p_fit = 0.0;
  bool converged = false;
  double log_likelihood = 0.0;
  double relative_log_likelihood = 0.0;
  double log_prior = 0.0;
  double log_posterior = 0.0;
};

struct LikelihoodReport {
  /// Sorted by decreasing log posterior; ties keep candidate order.
  std::vector<ReportRow> rows;
  /// Log likelihood of the demonstrations under the uniform policy.
  double baseline_log_likelihood = 0.0;
};

/// Pipeline failure tagged with its stage (compile, encode, fit) and the
/// candidate involved, if any. `cause` holds the original exception.
class StageError : public Error {
public:
  StageError(std::string stage, std::string candidate, const std::string& what, std::exception_ptr cause)
      : Error(what), stage_(std::move(stage)), candidate_(std::move(candidate)), cause_(std::move(cause)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& candidate() const noexcept { return candidate_; }
  const std::exception_ptr& cause() const noexcept { return cause_; }

private:
  std::string stage_;
  std::string candidate_;
  std::exception_ptr cause_;
};

/// Compiles every candidate, fits θ to its satisfaction frequency and scores
/// the demonstrations. Candidates run on up to `jobs` threads, each with its
/// own engine. Every failure surfaces as a StageError.
LikelihoodReport rank(const RandomBitPA& pa, std::span<const Candidate> candidates,
                      std::span<const Demonstration> demos, unsigned horizon, const RankOptions& options = {});

/// Runs `work(i)` for i in [0, count) on up to `jobs` threads and rethrows
/// the first failure in index order.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& work);

} // namespace specinfer
