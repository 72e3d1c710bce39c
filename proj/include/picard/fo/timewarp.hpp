#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "picard/engine.hpp"
#include "picard/fo/instance.hpp"
#include "picard/fo/local_state.hpp"
#include "picard/fo/types.hpp"

namespace picard::timewarp {

struct TimeWarpTraceRow {
  std::int64_t round = 0;
  std::int64_t t_start = 0;
  std::int64_t window_length = 0;
  std::int64_t max_process_evals = 0;
  bool rolled_back = false;
};

// Safe-window sizing.
enum class WindowRule {
  // Minimum remaining capacity over ALL nodes, clamped to >= 1 so the run
  // keeps making progress. Once any node is exhausted this degenerates to
  // single-step windows, i.e. near-sequential execution.
  min_capacity,
  // Minimum over still-stocked nodes only. Exhausted nodes can never be
  // chosen again, so they cannot invalidate a window; this keeps windows
  // wide after depletions and makes the baseline considerably stronger.
  min_stocked_capacity,
};

struct TimeWarpResult {
  std::vector<fo::FoAction> actions;
  std::int64_t sync_rounds = 0;
  std::int64_t rollbacks = 0;
  std::int64_t policy_eval_count_sequential_equivalent = 0;
  std::int64_t total_policy_evals = 0;
  std::vector<TimeWarpTraceRow> trace;
};

// Optimistic safe-window baseline. From the synchronized state at t0, all
// processes independently execute the window [t0, t0 + delta), where delta
// is a window no fulfillment decision can invalidate: within it no node's
// capacity can cross zero before the window's final order, so (for
// product-partitioned, regularity-condition-satisfying policies) every
// process's own decisions match the sequential ones. Each process evaluates
// the policy on its own time-steps and treats all other steps as declined.
// A synchronization barrier then applies the merged decisions to the global
// state.
//
// If the merge hits an infeasible decision (an assumption-violating
// policy), the window is rolled back and re-executed sequentially; the
// re-execution is charged at serial cost.
template <typename P>
TimeWarpResult time_warp_simulate(const fo::Instance& instance,
                                  const P& policy, std::int32_t processes,
                                  std::uint64_t seed,
                                  bool record_trace = false,
                                  WindowRule rule = WindowRule::min_capacity) {
  const auto plan = fo::make_product_partition(instance, processes, seed);
  const auto env = instance.make_env();
  const std::int64_t horizon = instance.horizon;
  const auto& orders = instance.orders;

  TimeWarpResult result;
  result.actions.assign(static_cast<std::size_t>(horizon), fo::kNoFulfill);

  fo::FoState global = env.initial_state();
  auto scratch = env.make_local();

  std::vector<std::int64_t> stop_after(static_cast<std::size_t>(processes));
  std::vector<std::int64_t> evals(static_cast<std::size_t>(processes));

  std::int64_t t0 = 0;
  while (t0 < horizon) {
    std::int64_t delta = 0;
    if (rule == WindowRule::min_capacity) {
      std::int32_t min_capacity = global.capacity.empty()
                                      ? 0
                                      : global.capacity.front();
      for (auto c : global.capacity) min_capacity = std::min(min_capacity, c);
      delta = std::max<std::int64_t>(1, min_capacity);
    } else {
      std::int32_t min_stocked = 0;
      bool any_stocked = false;
      for (auto c : global.capacity) {
        if (c <= 0) continue;
        min_stocked = any_stocked ? std::min(min_stocked, c) : c;
        any_stocked = true;
      }
      // With nothing stocked anywhere no decision can depend on state again.
      delta =
          any_stocked ? std::max<std::int64_t>(1, min_stocked) : horizon - t0;
    }
    const std::int64_t hi = std::min(horizon, t0 + delta);

    std::fill(stop_after.begin(), stop_after.end(), std::int64_t{-1});
    for (std::int64_t t = t0; t < hi; ++t) {
      stop_after[static_cast<std::size_t>(
          plan.owner[static_cast<std::size_t>(t)])] = t;
    }
    std::fill(evals.begin(), evals.end(), 0);

    for (std::int32_t m = 0; m < processes; ++m) {
      const std::int64_t last = stop_after[static_cast<std::size_t>(m)];
      if (last < 0) continue;
      env.reset_local(scratch, global);
      for (std::int64_t t = t0; t <= last; ++t) {
        if (plan.owner[static_cast<std::size_t>(t)] != m) continue;
        const auto& order = orders[static_cast<std::size_t>(t)];
        auto action = policy.evaluate(scratch, order);
        ++evals[static_cast<std::size_t>(m)];
        if (!env.feasible_local(scratch, order, action)) {
          throw ContractViolation(
              "policy returned an infeasible action at t=" + std::to_string(t),
              t);
        }
        env.apply_local(scratch, action, order);
        result.actions[static_cast<std::size_t>(t)] = action;
      }
    }

    std::int64_t max_evals = 0, sum_evals = 0;
    for (auto e : evals) {
      max_evals = std::max(max_evals, e);
      sum_evals += e;
    }
    result.policy_eval_count_sequential_equivalent += max_evals;
    result.total_policy_evals += sum_evals;

    // Synchronize: apply the merged decisions in time order.
    std::vector<std::int64_t> applied;
    bool merged = true;
    for (std::int64_t t = t0; t < hi; ++t) {
      const auto& order = orders[static_cast<std::size_t>(t)];
      const auto& action = result.actions[static_cast<std::size_t>(t)];
      if (!fo::action_feasible(global, order, action)) {
        merged = false;
        break;
      }
      if (!action.is_null()) {
        fo::apply_in_place(global, order, action);
        applied.push_back(t);
      }
    }

    if (!merged) {
      for (auto it = applied.rbegin(); it != applied.rend(); ++it) {
        const auto& order = orders[static_cast<std::size_t>(*it)];
        const auto node = result.actions[static_cast<std::size_t>(*it)].node;
        global.capacity[static_cast<std::size_t>(node)] += 1;
        global.inventory[order.product][static_cast<std::size_t>(node)] += 1;
      }
      ++result.rollbacks;
      // Re-execute the window strictly serially against the global state.
      for (std::int64_t t = t0; t < hi; ++t) {
        const auto& order = orders[static_cast<std::size_t>(t)];
        auto action = policy.evaluate(global, order);
        if (!fo::action_feasible(global, order, action)) {
          throw ContractViolation(
              "policy returned an infeasible action at t=" + std::to_string(t),
              t);
        }
        fo::apply_in_place(global, order, action);
        result.actions[static_cast<std::size_t>(t)] = action;
      }
      result.policy_eval_count_sequential_equivalent += hi - t0;
      result.total_policy_evals += hi - t0;
    }

    ++result.sync_rounds;
    if (record_trace) {
      result.trace.push_back(
          {result.sync_rounds, t0, hi - t0, max_evals, !merged});
    }
    t0 = hi;
  }
  return result;
}

}  // namespace picard::timewarp
