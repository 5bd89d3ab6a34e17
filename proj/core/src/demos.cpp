#include "specinfer/demos.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace specinfer {

namespace {

constexpr unsigned kEnumerationLimit = 16;

CoinSet count_symbolically(const RandomBitPA& pa, std::uint64_t state, std::uint64_t action, std::uint64_t next) {
  if (pa.coin_bits > 52) throw ResourceError("coins: more than 52 coin bits cannot be counted exactly");
  bdd::Manager mgr(pa.coin_bits);
  const auto input = [&](Input in) -> bdd::NodeRef {
    switch (in.port) {
    case Port::state: return bit_of(state, in.index) ? bdd::ONE : bdd::ZERO;
    case Port::action: return bit_of(action, in.index) ? bdd::ONE : bdd::ZERO;
    case Port::coin: return mgr.var(pa.coin_bits - 1 - in.index);
    case Port::history: break;
    }
    throw StructuralError("coins: dynamics read history inputs");
  };
  const std::vector<bdd::NodeRef> bits = lower_circuit(mgr, pa.circuit, pa.next, input);
  bdd::NodeRef match = bdd::ONE;
  for (unsigned i = 0; i < pa.state_bits; ++i) {
    match = mgr.apply(bdd::BinOp::and_, match, bit_of(next, i) ? bits[i] : mgr.negate(bits[i]));
  }
  CoinSet out;
  out.probability = Dyadic{static_cast<std::uint64_t>(mgr.count_ones(match)), pa.coin_bits};
  mgr.for_each_one(match, [&](std::span<const std::uint8_t> assignment) {
    std::uint64_t word = 0;
    for (unsigned j = 0; j < pa.coin_bits; ++j) {
      if (assignment[pa.coin_bits - 1 - j]) word |= std::uint64_t{1} << j;
    }
    out.lowest = word;
    return false;
  });
  return out;
}

} // namespace

CoinSet infer_coins(const RandomBitPA& pa, std::uint64_t state, std::uint64_t action, std::uint64_t next) {
  if ((state >> pa.state_bits) != 0 || (next >> pa.state_bits) != 0) {
    throw DomainError("coins: state encoding out of range");
  }
  if (!pa.is_valid_action(action)) throw DomainError("coins: invalid action encoding " + std::to_string(action));
  if (pa.coin_bits > kEnumerationLimit) return count_symbolically(pa, state, action, next);
  CoinSet out;
  out.probability = Dyadic{0, pa.coin_bits};
  for (std::uint64_t c = 0; c < pa.coin_outcomes(); ++c) {
    if (pa.step(state, action, c) == next) out.members.push_back(c);
  }
  out.probability.count = out.members.size();
  if (!out.members.empty()) out.lowest = out.members.front();
  return out;
}

CoinCache::CoinCache(const Gridworld& world) : world_(world) {}

const CoinSet& CoinCache::lookup(std::uint64_t state, std::uint64_t action, std::uint64_t next) {
  const GridSpec& spec = world_.spec();
  const Cell from = world_.decode(state);
  const Cell to = world_.decode(next);
  const bool interior = from.x >= 1 && from.y >= 1 && from.x + 2 <= static_cast<int>(spec.width) &&
                        from.y + 2 <= static_cast<int>(spec.height);
  if (!interior) {
    scratch_ = infer_coins(world_.pa(), state, action, next);
    return scratch_;
  }
  const auto key = std::make_tuple(action, to.x - from.x, to.y - from.y);
  if (auto it = cache_.find(key); it != cache_.end()) {
    ++hits_;
    return it->second;
  }
  return cache_.emplace(key, infer_coins(world_.pa(), state, action, next)).first->second;
}

EncodedDemo encode_demo(const RandomBitPA& pa, const LevelMeta& meta, const Demonstration& demo,
                        std::size_t demo_index) {
  if (demo.steps.size() != meta.horizon()) {
    throw DomainError("demo " + std::to_string(demo_index) + ": " + std::to_string(demo.steps.size()) +
                      " steps for horizon " + std::to_string(meta.horizon()));
  }
  EncodedDemo out;
  std::vector<std::uint64_t> actions;
  std::uint64_t state = pa.initial_state;
  for (std::size_t t = 0; t < demo.steps.size(); ++t) {
    const TraceStep& step = demo.steps[t];
    CoinSet coins;
    try {
      coins = infer_coins(pa, state, step.action, step.state);
    } catch (const DomainError& e) {
      throw ImpossibleTransition("demo " + std::to_string(demo_index) + " step " + std::to_string(t) + ": " +
                                     e.what(),
                                 demo_index, t);
    }
    if (coins.probability.count == 0) {
      throw ImpossibleTransition("demo " + std::to_string(demo_index) + " step " + std::to_string(t) +
                                     ": the dynamics cannot reach the recorded state",
                                 demo_index, t);
    }
    actions.push_back(step.action);
    out.coins.push_back(coins.lowest);
    out.transitions.push_back(coins.probability);
    state = step.state;
  }
  out.bits = meta.encode(actions, out.coins);
  return out;
}

double demo_log_likelihood(const TraceBdd& b, const ValueTable& vt, const EncodedDemo& demo) {
  double total = path_log_policy(b, vt, demo.bits);
  for (const Dyadic& p : demo.transitions) {
    if (p.count == 0) throw DomainError("likelihood: zero-probability transition");
    total += std::log(static_cast<double>(p.count)) - static_cast<double>(p.log2_den) * std::numbers::ln2;
  }
  return total;
}

double satisfaction_frequency(std::span<const Demonstration> demos, const Monitor& m, std::uint64_t initial_state) {
  if (demos.empty()) throw DomainError("no demonstrations");
  std::size_t hits = 0;
  for (const Demonstration& d : demos) hits += accepts(m, d.steps, initial_state);
  return static_cast<double>(hits) / static_cast<double>(demos.size());
}

double empirical_sat_prob(std::span<const Demonstration> demos, const Monitor& m, std::uint64_t initial_state) {
  return clamp_target(satisfaction_frequency(demos, m, initial_state), demos.size());
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& work) {
  std::vector<std::exception_ptr> failures(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        work(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max(1u, jobs), count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

namespace {

template <class F>
auto staged(const std::string& stage, const std::string& candidate, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, candidate, e.what(), std::current_exception());
  }
}

double total_log_likelihood(const TraceBdd& b, const ValueTable& vt, std::span<const EncodedDemo> demos) {
  double total = 0.0;
  for (const EncodedDemo& d : demos) total += demo_log_likelihood(b, vt, d);
  return total;
}

} // namespace

LikelihoodReport rank(const RandomBitPA& pa, std::span<const Candidate> candidates,
                      std::span<const Demonstration> demos, unsigned horizon, const RankOptions& options) {
  if (candidates.empty()) throw StageError("rank", "", "no candidate specifications", nullptr);
  if (demos.empty()) throw StageError("encode", "", "no demonstrations", nullptr);

  const LevelMeta meta(horizon, pa.action_bits, pa.coin_bits);
  const std::vector<EncodedDemo> encoded = staged("encode", "", [&] {
    std::vector<EncodedDemo> out;
    for (std::size_t i = 0; i < demos.size(); ++i) out.push_back(encode_demo(pa, meta, demos[i], i));
    return out;
  });

  LikelihoodReport report;
  report.baseline_log_likelihood = staged("compile", "true", [&] {
    const TraceBdd b = unroll(pa, true_monitor(Alphabet{pa.state_bits, pa.action_bits}), horizon);
    return total_log_likelihood(b, value_backup(b, 0.0, options.fit.rewards), encoded);
  });

  const double uniform_prior = -std::log(static_cast<double>(candidates.size()));
  std::vector<ReportRow> rows(candidates.size());
  parallel_for(candidates.size(), options.jobs, [&](std::size_t i) {
    const Candidate& c = candidates[i];
    ReportRow& row = rows[i];
    row.name = c.name;
    const TraceBdd b = staged("compile", c.name, [&] { return unroll(pa, c.monitor, horizon); });
    row.internal_nodes = b.stats().internal_nodes;
    row.total_nodes = b.stats().total_nodes;
    row.compile_seconds = b.stats().seconds;
    const PolicySolution sol = staged("fit", c.name, [&] {
      row.p_hat = empirical_sat_prob(demos, c.monitor, pa.initial_state);
      const double target = options.p_target ? *options.p_target : row.p_hat;
      return fit_theta(b, target, options.fit);
    });
    row.theta = sol.theta;
    row.p_fit = sol.p;
    row.converged = sol.converged;
    row.log_likelihood = staged("encode", c.name, [&] { return total_log_likelihood(b, sol.values, encoded); });
    row.relative_log_likelihood = row.log_likelihood - report.baseline_log_likelihood;
    row.log_prior = c.log_prior.value_or(uniform_prior);
    row.log_posterior = row.log_likelihood + row.log_prior;
  });

  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& x, const ReportRow& y) { return x.log_posterior > y.log_posterior; });
  report.rows = std::move(rows);
  return report;
}

} // namespace specinfer
