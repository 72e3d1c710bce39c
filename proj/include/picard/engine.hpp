#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "picard/errors.hpp"
#include "picard/rng.hpp"

namespace picard {

// ---------------------------------------------------------------------------
// Contracts
// ---------------------------------------------------------------------------
//
// An environment supplies deterministic dynamics plus a cheap "local" state
// used for the per-process sweeps. `Local` is allowed to be a copy-on-write
// view over a base `State` so that sweeping a window never copies the full
// state up front (the fulfillment environment relies on this; for small
// dense environments Local can simply be State).
//
// Required members:
//   State, Action, Disturbance, Local
//   initial_state() -> State
//   null_action()   -> Action            always feasible in every state
//   actions_equal(a, b) -> bool          cache-equality predicate
//   feasible(state, w, a) / apply(state&, a, w)
//   make_local() -> Local                unbound scratch local
//   reset_local(local&, base_state)      rebind scratch to a base state
//   feasible_local(local, w, a) / apply_local(local&, a, w)
//   snapshot(local) -> State             materialize a plain state

template <typename E>
concept Environment =
    requires(const E& env, const typename E::State& s, typename E::State& ms,
             const typename E::Action& a, const typename E::Disturbance& w,
             typename E::Local& l, const typename E::Local& cl) {
      { env.initial_state() } -> std::same_as<typename E::State>;
      { env.null_action() } -> std::same_as<typename E::Action>;
      { env.actions_equal(a, a) } -> std::same_as<bool>;
      { env.feasible(s, w, a) } -> std::same_as<bool>;
      { env.apply(ms, a, w) } -> std::same_as<void>;
      { env.make_local() } -> std::same_as<typename E::Local>;
      { env.reset_local(l, s) } -> std::same_as<void>;
      { env.feasible_local(cl, w, a) } -> std::same_as<bool>;
      { env.apply_local(l, a, w) } -> std::same_as<void>;
      { env.snapshot(cl) } -> std::same_as<typename E::State>;
    };

// A policy is a deterministic map (local state, disturbance) -> action.
template <typename P, typename E>
concept PolicyFor = requires(const P& policy, const typename E::Local& l,
                             const typename E::Disturbance& w) {
  { policy.evaluate(l, w) } -> std::same_as<typename E::Action>;
};

enum class EvalCost { expensive, cheap };

// The shared fixed-point variable: one provisional action per time-step.
template <typename Action>
using ActionCache = std::vector<Action>;

// ---------------------------------------------------------------------------
// Partitioning
// ---------------------------------------------------------------------------

// Disjoint assignment of time-steps [0, T) to processes [0, M).
struct PartitionPlan {
  std::int32_t processes = 1;
  std::vector<std::int32_t> owner;  // owner[t] in [0, processes)

  [[nodiscard]] std::int64_t horizon() const {
    return static_cast<std::int64_t>(owner.size());
  }

  void validate(std::int64_t horizon_steps) const {
    if (processes < 1) {
      throw ContractViolation("partition plan: process count must be >= 1");
    }
    if (static_cast<std::int64_t>(owner.size()) != horizon_steps) {
      throw ContractViolation("partition plan does not cover the horizon");
    }
    for (std::size_t t = 0; t < owner.size(); ++t) {
      if (owner[t] < 0 || owner[t] >= processes) {
        throw ContractViolation("partition plan: owner out of range",
                                static_cast<std::int64_t>(t));
      }
    }
  }
};

// Assigns each time-step independently and uniformly to one of M processes.
inline PartitionPlan make_uniform_time_partition(std::int64_t horizon_steps,
                                                 std::int32_t processes,
                                                 std::uint64_t seed) {
  if (processes < 1) {
    throw ContractViolation("uniform partition: process count must be >= 1");
  }
  PartitionPlan plan;
  plan.processes = processes;
  plan.owner.resize(static_cast<std::size_t>(horizon_steps));
  auto gen = rng::make(seed);
  for (auto& o : plan.owner) {
    o = static_cast<std::int32_t>(
        rng::below(gen, static_cast<std::uint64_t>(processes)));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Configuration and results
// ---------------------------------------------------------------------------

struct PicardConfig {
  std::int32_t processes = 0;     // 0 = take M from the partition plan
  std::int64_t max_steps = 0;     // sweep-window width; 0 = whole horizon
  std::int64_t max_iterations = 0;  // safety cap; 0 = 2*T + 4 (see below)
  bool record_trace = false;
  std::int32_t threads = 1;  // worker threads for the per-iteration sweep
};

struct PicardTraceRow {
  std::int64_t chunk = 0;       // converged-window episodes completed so far
  std::int64_t iteration = 0;   // global iteration index (1-based)
  std::int64_t changed_slots = 0;
  std::int64_t max_process_evals = 0;
  std::int64_t t_reset = 0;     // window start when the iteration ran
};

// Thrown when the fixed-point loop exceeds its iteration cap. Under a
// deterministic policy the loop provably terminates, so hitting the cap
// signals a nondeterministic policy or a contract violation upstream. When
// the run recorded a trace, the rows produced so far ride along.
class IterationLimitError : public std::runtime_error {
 public:
  IterationLimitError(std::string what, std::int64_t iterations_run,
                      std::vector<PicardTraceRow> partial_trace = {})
      : std::runtime_error(std::move(what)),
        iterations_run_(iterations_run),
        partial_trace_(std::move(partial_trace)) {}

  [[nodiscard]] std::int64_t iterations_run() const { return iterations_run_; }
  [[nodiscard]] const std::vector<PicardTraceRow>& partial_trace() const {
    return partial_trace_;
  }

 private:
  std::int64_t iterations_run_;
  std::vector<PicardTraceRow> partial_trace_;
};

template <typename Action>
struct PicardResult {
  std::vector<Action> actions;
  // Iterations until the stopping rule (cache unchanged) fired, summed over
  // window episodes. The stopping rule costs one confirming sweep beyond the
  // first iteration whose output is already correct.
  std::int64_t iterations_to_converged = 0;
  // First global iteration k at which the full cache equals the reference
  // action sequence (0 when the supplied initial cache is already correct).
  // Only measured when a reference is provided.
  std::optional<std::int64_t> iterations_to_correct;
  // Cache slots rewritten with a different value after their first write.
  std::int64_t conflicts = 0;
  // Sum over iterations of the busiest process's evaluation count: the cost
  // of the run if the M processes ran in lockstep.
  std::int64_t policy_eval_count_sequential_equivalent = 0;
  std::int64_t total_policy_evals = 0;
  std::vector<PicardTraceRow> trace;
};

struct IterationOutcome {
  std::vector<std::int64_t> evals_per_process;
  std::vector<std::int64_t> changed_slots;  // ascending time indices

  [[nodiscard]] std::int64_t max_process_evals() const {
    std::int64_t best = 0;
    for (auto e : evals_per_process) best = std::max(best, e);
    return best;
  }
  [[nodiscard]] std::int64_t total_evals() const {
    std::int64_t sum = 0;
    for (auto e : evals_per_process) sum += e;
    return sum;
  }
};

// ---------------------------------------------------------------------------
// Observers
// ---------------------------------------------------------------------------
//
// Optional instrumentation hooks, detected structurally. Observers that
// record per-process local states force full (non-truncated) sweeps and
// single-threaded execution so their callbacks see every (m, t) pair in
// deterministic order.

struct NoObserver {};

template <typename Obs, typename E>
concept LocalStateObserver =
    requires(Obs& obs, std::int64_t k, std::int32_t m, std::int64_t t,
             const typename E::Local& local) {
      obs.on_local_state(k, m, t, local);
    };

template <typename Obs, typename E>
concept IterationObserver =
    requires(Obs& obs, std::int64_t k, std::int64_t chunk, std::int64_t lo,
             std::int64_t hi, std::span<const typename E::Action> cache) {
      obs.on_iteration(k, chunk, lo, hi, cache);
    };

template <typename Obs, typename E>
concept SequentialObserver = requires(Obs& obs, std::int64_t t,
                                      const typename E::Local& local) {
  obs.on_state(t, local);
};

// ---------------------------------------------------------------------------
// Sequential simulation (the ground-truth oracle)
// ---------------------------------------------------------------------------

template <typename Action>
struct SequentialOutput {
  std::vector<Action> actions;
  std::int64_t policy_evals = 0;
};

// Strictly serial rollout: actions[t] = policy(s_t, w_t). The observer, when
// given, receives the state entering every step t in [0, T] (T = final).
template <Environment E, PolicyFor<E> P, typename Obs = NoObserver>
SequentialOutput<typename E::Action> sequential_simulate(
    const E& env, const P& policy,
    std::span<const typename E::Disturbance> disturbances,
    Obs* observer = nullptr) {
  const std::int64_t horizon = static_cast<std::int64_t>(disturbances.size());
  SequentialOutput<typename E::Action> out;
  out.actions.reserve(static_cast<std::size_t>(horizon));

  auto local = env.make_local();
  const auto start = env.initial_state();
  env.reset_local(local, start);
  for (std::int64_t t = 0; t < horizon; ++t) {
    if constexpr (SequentialObserver<Obs, E>) {
      if (observer != nullptr) observer->on_state(t, local);
    }
    const auto& w = disturbances[static_cast<std::size_t>(t)];
    auto action = policy.evaluate(local, w);
    ++out.policy_evals;
    if (!env.feasible_local(local, w, action)) {
      throw ContractViolation(
          "policy returned an infeasible action at t=" + std::to_string(t), t);
    }
    env.apply_local(local, action, w);
    out.actions.push_back(std::move(action));
  }
  if constexpr (SequentialObserver<Obs, E>) {
    if (observer != nullptr) observer->on_state(horizon, local);
  }
  return out;
}

template <typename E>
struct SequentialTrajectory {
  std::vector<typename E::Action> actions;
  std::vector<typename E::State> states;  // states[t] enters step t; size T+1
};

// Convenience variant that materializes the full state trajectory. Intended
// for small instances; large runs should use an observer instead.
template <Environment E, PolicyFor<E> P>
SequentialTrajectory<E> sequential_simulate_with_states(
    const E& env, const P& policy,
    std::span<const typename E::Disturbance> disturbances) {
  struct Recorder {
    const E* env;
    std::vector<typename E::State> states;
    void on_state(std::int64_t, const typename E::Local& local) {
      states.push_back(env->snapshot(local));
    }
  } recorder{&env, {}};
  recorder.states.reserve(disturbances.size() + 1);
  auto out = sequential_simulate(env, policy, disturbances, &recorder);
  return {std::move(out.actions), std::move(recorder.states)};
}

// ---------------------------------------------------------------------------
// One fixed-point iteration
// ---------------------------------------------------------------------------

namespace detail {

template <Environment E, PolicyFor<E> P, typename Obs>
void sweep_one_process(const E& env, const P& policy,
                       std::span<const typename E::Disturbance> disturbances,
                       const PartitionPlan& plan,
                       std::span<const typename E::Action> cache,
                       std::int64_t t_lo, std::int64_t t_hi,
                       const typename E::State& checkpoint, std::int32_t m,
                       std::int64_t stop_after, typename E::Local& scratch,
                       std::span<typename E::Action> fresh,
                       std::int64_t& eval_count, Obs* observer,
                       std::int64_t iteration) {
  env.reset_local(scratch, checkpoint);
  constexpr bool wants_locals = LocalStateObserver<Obs, E>;
  const std::int64_t last = wants_locals ? t_hi - 1 : stop_after;
  for (std::int64_t t = t_lo; t <= last; ++t) {
    if constexpr (wants_locals) {
      if (observer != nullptr) observer->on_local_state(iteration, m, t, scratch);
    }
    const auto& w = disturbances[static_cast<std::size_t>(t)];
    if (plan.owner[static_cast<std::size_t>(t)] == m) {
      auto action = policy.evaluate(scratch, w);
      ++eval_count;
      if (!env.feasible_local(scratch, w, action)) {
        throw ContractViolation(
            "policy returned an infeasible action at t=" + std::to_string(t),
            t);
      }
      env.apply_local(scratch, action, w);
      fresh[static_cast<std::size_t>(t - t_lo)] = std::move(action);
    } else {
      const auto& cached = cache[static_cast<std::size_t>(t)];
      if (env.feasible_local(scratch, w, cached)) {
        env.apply_local(scratch, cached, w);
      } else {
        env.apply_local(scratch, env.null_action(), w);
      }
    }
  }
  if constexpr (wants_locals) {
    if (observer != nullptr) {
      observer->on_local_state(iteration, m, t_hi, scratch);
    }
  }
}

}  // namespace detail

struct IterateOptions {
  std::int32_t threads = 1;
};

// Runs one barrier-synchronized iteration over the window [t_lo, t_hi).
//
// Every process sweeps the window from `checkpoint_state` (the state induced
// by the cache prefix before t_lo), evaluating the policy on its own
// time-steps and replaying the frozen cache elsewhere (falling back to the
// null action when a cached entry is infeasible at the process's local
// state). New actions are published into `cache` only after all processes
// finish, so the outcome is independent of scheduling.
template <Environment E, PolicyFor<E> P, typename Obs = NoObserver>
IterationOutcome picard_iterate_once(
    const E& env, const P& policy,
    std::span<const typename E::Disturbance> disturbances,
    const PartitionPlan& plan, ActionCache<typename E::Action>& cache,
    std::int64_t t_lo, std::int64_t t_hi,
    const typename E::State& checkpoint_state, const IterateOptions& options = {},
    Obs* observer = nullptr, std::int64_t iteration = 0) {
  using Action = typename E::Action;
  const std::int32_t processes = plan.processes;
  const std::int64_t window = t_hi - t_lo;

  IterationOutcome outcome;
  outcome.evals_per_process.assign(static_cast<std::size_t>(processes), 0);
  if (window <= 0) return outcome;

  // Last owned slot per process inside the window; a process's sweep beyond
  // its last owned slot cannot affect any published value.
  std::vector<std::int64_t> stop_after(static_cast<std::size_t>(processes), -1);
  for (std::int64_t t = t_lo; t < t_hi; ++t) {
    stop_after[static_cast<std::size_t>(
        plan.owner[static_cast<std::size_t>(t)])] = t;
  }

  std::vector<Action> fresh(static_cast<std::size_t>(window),
                            env.null_action());

  constexpr bool wants_locals = LocalStateObserver<Obs, E>;
  const std::int32_t threads =
      wants_locals ? 1 : std::max<std::int32_t>(1, options.threads);

  auto run_range = [&](std::int32_t m_begin, std::int32_t m_end,
                       typename E::Local& scratch) {
    for (std::int32_t m = m_begin; m < m_end; ++m) {
      if (stop_after[static_cast<std::size_t>(m)] < 0 && !wants_locals) {
        continue;  // no owned slots in the window
      }
      detail::sweep_one_process(env, policy, disturbances, plan,
                                std::span<const Action>(cache), t_lo, t_hi,
                                checkpoint_state, m,
                                stop_after[static_cast<std::size_t>(m)],
                                scratch, std::span<Action>(fresh),
                                outcome.evals_per_process[static_cast<std::size_t>(m)],
                                observer, iteration);
    }
  };

  if (threads <= 1 || processes <= 1) {
    auto scratch = env.make_local();
    run_range(0, processes, scratch);
  } else {
    const std::int32_t workers = std::min<std::int32_t>(threads, processes);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(
        static_cast<std::size_t>(workers));
    pool.reserve(static_cast<std::size_t>(workers));
    for (std::int32_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          const std::int32_t chunk = (processes + workers - 1) / workers;
          const std::int32_t m_begin = w * chunk;
          const std::int32_t m_end =
              std::min<std::int32_t>(processes, m_begin + chunk);
          auto scratch = env.make_local();
          run_range(m_begin, m_end, scratch);
        } catch (...) {
          failures[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
  }

  // Barrier: publish fresh actions and report changed slots.
  for (std::int64_t t = t_lo; t < t_hi; ++t) {
    auto& slot = cache[static_cast<std::size_t>(t)];
    auto& value = fresh[static_cast<std::size_t>(t - t_lo)];
    if (!env.actions_equal(slot, value)) {
      outcome.changed_slots.push_back(t);
    }
    slot = std::move(value);
  }
  return outcome;
}

// ---------------------------------------------------------------------------
// The full fixed-point loop
// ---------------------------------------------------------------------------

// Iterates windows of width `max_steps` (whole horizon when 0) until the
// cache stops changing, advancing the window start past the stable prefix
// after every iteration. Returns exactly the sequential action sequence for
// any deterministic environment/policy pair.
//
// `initial_cache` (optional) seeds the fixed point; entries are
// feasibility-checked at use, so any contents are safe. `reference_actions`
// (optional) enables the iterations_to_correct counter.
template <Environment E, PolicyFor<E> P, typename Obs = NoObserver>
PicardResult<typename E::Action> picard_simulate(
    const E& env, const P& policy,
    std::span<const typename E::Disturbance> disturbances,
    const PartitionPlan& plan, const PicardConfig& config = {},
    std::span<const typename E::Action> initial_cache = {},
    std::span<const typename E::Action> reference_actions = {},
    Obs* observer = nullptr) {
  using Action = typename E::Action;
  const std::int64_t horizon = static_cast<std::int64_t>(disturbances.size());

  plan.validate(horizon);
  if (config.processes != 0 && config.processes != plan.processes) {
    throw ContractViolation("config process count disagrees with the plan");
  }
  if (!initial_cache.empty() &&
      static_cast<std::int64_t>(initial_cache.size()) != horizon) {
    throw ContractViolation("initial cache length must equal the horizon");
  }
  if (!reference_actions.empty() &&
      static_cast<std::int64_t>(reference_actions.size()) != horizon) {
    throw ContractViolation("reference action length must equal the horizon");
  }
  if (config.max_steps < 0 || config.max_iterations < 0) {
    throw ContractViolation("picard config values must be non-negative");
  }

  // Safety cap. An unchunked run needs at most T+1 sweeps (T to become
  // correct, one to confirm); windowed runs additionally pay one confirming
  // sweep per window episode, which 2T + 4 covers for every window width.
  const std::int64_t iteration_cap =
      config.max_iterations > 0 ? config.max_iterations : 2 * horizon + 4;

  PicardResult<Action> result;
  ActionCache<Action> cache;
  if (!initial_cache.empty()) {
    cache.assign(initial_cache.begin(), initial_cache.end());
  } else {
    cache.assign(static_cast<std::size_t>(horizon), env.null_action());
  }

  auto cache_matches_reference = [&]() {
    for (std::int64_t t = 0; t < horizon; ++t) {
      if (!env.actions_equal(cache[static_cast<std::size_t>(t)],
                             reference_actions[static_cast<std::size_t>(t)])) {
        return false;
      }
    }
    return true;
  };
  const bool track_correctness = !reference_actions.empty();
  if (track_correctness && cache_matches_reference()) {
    result.iterations_to_correct = 0;
  }

  std::vector<std::uint8_t> written(static_cast<std::size_t>(horizon), 0);
  auto checkpoint = env.initial_state();
  std::int64_t window_start = 0;
  std::int64_t iteration = 0;
  std::int64_t episodes_done = 0;
  const IterateOptions iterate_options{config.threads};

  auto advance_checkpoint = [&](std::int64_t from, std::int64_t to) {
    for (std::int64_t t = from; t < to; ++t) {
      const auto& w = disturbances[static_cast<std::size_t>(t)];
      const auto& action = cache[static_cast<std::size_t>(t)];
      env.apply(checkpoint, action, w);  // throws if the prefix is infeasible
    }
  };

  while (window_start < horizon) {
    const std::int64_t window_end =
        config.max_steps > 0 ? std::min(horizon, window_start + config.max_steps)
                             : horizon;
    if (iteration >= iteration_cap) {
      throw IterationLimitError(
          "picard iteration cap exceeded (" + std::to_string(iteration_cap) +
              "); the policy may be nondeterministic",
          iteration, std::move(result.trace));
    }
    ++iteration;

    auto outcome = picard_iterate_once(env, policy, disturbances, plan, cache,
                                       window_start, window_end, checkpoint,
                                       iterate_options, observer, iteration);
    ++result.iterations_to_converged;
    result.policy_eval_count_sequential_equivalent +=
        outcome.max_process_evals();
    result.total_policy_evals += outcome.total_evals();

    for (auto t : outcome.changed_slots) {
      if (written[static_cast<std::size_t>(t)]) ++result.conflicts;
    }
    for (std::int64_t t = window_start; t < window_end; ++t) {
      written[static_cast<std::size_t>(t)] = 1;
    }

    if (config.record_trace) {
      result.trace.push_back(
          {episodes_done, iteration,
           static_cast<std::int64_t>(outcome.changed_slots.size()),
           outcome.max_process_evals(), window_start});
    }
    if constexpr (IterationObserver<Obs, E>) {
      if (observer != nullptr) {
        observer->on_iteration(iteration, episodes_done, window_start,
                               window_end, std::span<const Action>(cache));
      }
    }
    if (track_correctness && !result.iterations_to_correct.has_value() &&
        cache_matches_reference()) {
      result.iterations_to_correct = iteration;
    }

    if (outcome.changed_slots.empty()) {
      // Window converged; everything before window_end is final.
      advance_checkpoint(window_start, window_end);
      window_start = window_end;
      ++episodes_done;
    } else {
      // The prefix before the first changed slot is stable across two
      // consecutive iterations, hence correct; skip it from now on.
      const std::int64_t stable_end = outcome.changed_slots.front();
      if (stable_end > window_start) {
        advance_checkpoint(window_start, stable_end);
        window_start = stable_end;
      }
    }
  }

  result.actions = std::move(cache);
  return result;
}

// ---------------------------------------------------------------------------
// Oracle comparison
// ---------------------------------------------------------------------------

struct OracleComparison {
  bool equal = true;
  std::optional<std::int64_t> first_mismatch;
};

template <Environment E>
OracleComparison compare_to_oracle(
    const E& env, std::span<const typename E::Action> candidate,
    std::span<const typename E::Action> oracle) {
  if (candidate.size() != oracle.size()) {
    throw ContractViolation("oracle comparison: length mismatch");
  }
  for (std::size_t t = 0; t < candidate.size(); ++t) {
    if (!env.actions_equal(candidate[t], oracle[t])) {
      return {false, static_cast<std::int64_t>(t)};
    }
  }
  return {true, std::nullopt};
}

}  // namespace picard
