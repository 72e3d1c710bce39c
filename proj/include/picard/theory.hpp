#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "picard/engine.hpp"
#include "picard/fo/env.hpp"
#include "picard/fo/local_state.hpp"
#include "picard/fo/types.hpp"

namespace picard::theory {

// ---------------------------------------------------------------------------
// Depletion profile
// ---------------------------------------------------------------------------
//
// Time/state indexing convention: states[t] is the state entering step t,
// t in [0, T], with states[0] initial. A node's depletion time is the first
// t in [0, T) at which its capacity entering step t is zero, or T ("never")
// when it stays positive for every step — a zero that first appears in the
// final state cannot be observed by any order. A node is "depleted before
// order t" when its depletion time is <= t.

struct DepletionProfile {
  std::int64_t horizon = 0;
  std::vector<std::int64_t> first_depleted_at;    // per node; horizon = never
  std::vector<std::int32_t> depleted_nodes;       // ascending node ids
  std::vector<std::int64_t> sorted_depletion_times;

  [[nodiscard]] std::int64_t depleted_count() const {
    return static_cast<std::int64_t>(depleted_nodes.size());
  }
  [[nodiscard]] bool depleted_before_order(std::int32_t node,
                                           std::int64_t t) const {
    return first_depleted_at[static_cast<std::size_t>(node)] <= t;
  }
  // The iteration count the product-partitioned fixed point is guaranteed
  // to stay within for regularity-condition-satisfying policies.
  [[nodiscard]] std::int64_t iteration_bound() const {
    return depleted_count() + 1;
  }
};

inline DepletionProfile compute_depletion_from_capacities(
    std::span<const std::vector<std::int32_t>> capacities) {
  if (capacities.empty()) {
    throw ContractViolation("depletion profile needs at least the initial state");
  }
  const std::int64_t horizon =
      static_cast<std::int64_t>(capacities.size()) - 1;
  const std::size_t nodes = capacities.front().size();

  DepletionProfile profile;
  profile.horizon = horizon;
  profile.first_depleted_at.assign(nodes, horizon);
  for (std::size_t j = 0; j < nodes; ++j) {
    for (std::int64_t t = 0; t < horizon; ++t) {
      if (capacities[static_cast<std::size_t>(t)][j] == 0) {
        profile.first_depleted_at[j] = t;
        break;
      }
    }
    if (profile.first_depleted_at[j] < horizon) {
      profile.depleted_nodes.push_back(static_cast<std::int32_t>(j));
    }
  }
  profile.sorted_depletion_times = profile.first_depleted_at;
  std::sort(profile.sorted_depletion_times.begin(),
            profile.sorted_depletion_times.end());
  return profile;
}

inline DepletionProfile compute_depletion(
    std::span<const fo::FoState> oracle_states) {
  std::vector<std::vector<std::int32_t>> capacities;
  capacities.reserve(oracle_states.size());
  for (const auto& s : oracle_states) capacities.push_back(s.capacity);
  return compute_depletion_from_capacities(capacities);
}

// Sequential-run observer that records only the capacity trajectory;
// suitable for horizons where storing full states is wasteful.
struct CapacityRecorder {
  std::vector<std::vector<std::int32_t>> capacities;
  void on_state(std::int64_t, const fo::FoLocalState& local) {
    capacities.emplace_back(local.capacities().begin(),
                            local.capacities().end());
  }
};

// ---------------------------------------------------------------------------
// Invariant checkers
// ---------------------------------------------------------------------------

struct Violation {
  std::string check;
  std::int64_t iteration = 0;  // k
  std::int64_t t = 0;
  std::int32_t process = -1;  // m; -1 when not process-specific
  std::string detail;
};

inline std::string to_json_line(const Violation& v) {
  nlohmann::json row;
  row["check"] = v.check;
  row["k"] = v.iteration;
  row["t"] = v.t;
  row["m"] = v.process;
  row["detail"] = v.detail;
  return row.dump();
}

// Records the full action cache after every iteration barrier.
struct CacheTraceRecorder {
  std::vector<std::vector<fo::FoAction>> caches;  // caches[k-1] = after iter k
  void on_iteration(std::int64_t, std::int64_t, std::int64_t, std::int64_t,
                    std::span<const fo::FoAction> cache) {
    caches.emplace_back(cache.begin(), cache.end());
  }
};

// Checks that every cached action is either the sequential action or a node
// that depletes (on the sequential trajectory) no later than its order.
// Holds for greedy runs with unconstrained inventory.
inline std::vector<Violation> check_special_invariant(
    std::span<const std::vector<fo::FoAction>> cache_trace,
    std::span<const fo::FoAction> oracle_actions,
    const DepletionProfile& profile) {
  std::vector<Violation> violations;
  for (std::size_t k = 0; k < cache_trace.size(); ++k) {
    const auto& cache = cache_trace[k];
    for (std::size_t t = 0; t < cache.size(); ++t) {
      const auto& action = cache[t];
      if (action == oracle_actions[t]) continue;
      if (!action.is_null() &&
          profile.depleted_before_order(action.node,
                                        static_cast<std::int64_t>(t))) {
        continue;
      }
      violations.push_back({"special_invariant",
                            static_cast<std::int64_t>(k + 1),
                            static_cast<std::int64_t>(t), -1,
                            "cached action is neither the sequential action "
                            "nor a depleting node"});
    }
  }
  return violations;
}

// Streaming observer for the per-process state monotonicity invariant:
// along every process's sweep, no node that is still stocked on the
// sequential trajectory may ever hold less capacity or less inventory than
// the sequential state does at the same time.
class MonotonicityChecker {
 public:
  MonotonicityChecker(std::span<const fo::FoState> oracle_states,
                      std::int32_t products, std::int64_t stride = 16)
      : oracle_states_(oracle_states), products_(products),
        stride_(std::max<std::int64_t>(1, stride)) {}

  void on_local_state(std::int64_t k, std::int32_t m, std::int64_t t,
                      const fo::FoLocalState& local) {
    if (t % stride_ != 0 &&
        t != static_cast<std::int64_t>(oracle_states_.size()) - 1) {
      return;
    }
    const auto& ref = oracle_states_[static_cast<std::size_t>(t)];
    const auto local_caps = local.capacities();
    for (std::size_t j = 0; j < ref.capacity.size(); ++j) {
      if (ref.capacity[j] <= 0) continue;  // depleted: not covered
      if (local_caps[j] < ref.capacity[j]) {
        violations_.push_back({"monotonicity_capacity", k, t, m,
                               "node " + std::to_string(j) +
                                   " holds less capacity than the sequential "
                                   "state"});
      }
      for (std::int32_t i = 0; i < products_; ++i) {
        if (fo::inventory_at(local, i, static_cast<std::int32_t>(j)) <
            fo::inventory_at(ref, i, static_cast<std::int32_t>(j))) {
          violations_.push_back(
              {"monotonicity_inventory", k, t, m,
               "product " + std::to_string(i) + " at node " +
                   std::to_string(j) +
                   " holds less inventory than the sequential state"});
        }
      }
    }
  }

  [[nodiscard]] const std::vector<Violation>& violations() const {
    return violations_;
  }

 private:
  std::span<const fo::FoState> oracle_states_;
  std::int32_t products_;
  std::int64_t stride_;
  std::vector<Violation> violations_;
};

// Runs the fixed-point loop with per-process state snapshots and returns the
// monotonicity violations found at the sampled times. Stride 1 checks every
// step; the default samples every 16th to bound the cost on longer horizons.
template <typename P>
std::vector<Violation> check_monotonicity_invariant(
    const fo::FoEnv& env, const P& policy, std::span<const fo::Order> orders,
    const PartitionPlan& plan, const PicardConfig& config,
    std::span<const fo::FoState> oracle_states, std::int64_t stride = 16) {
  MonotonicityChecker checker(oracle_states, env.product_count(), stride);
  picard_simulate(env, policy, orders, plan, config, {}, {}, &checker);
  return checker.violations();
}

struct IterationBoundCheck {
  std::int64_t bound = 0;
  bool satisfied = false;
};

// True when the measured iterations-to-correct stays within
// (#depleted nodes + 1). Meaningful for product-partitioned runs with
// regularity-condition-satisfying policies.
inline IterationBoundCheck check_iteration_bound(
    const std::optional<std::int64_t>& iterations_to_correct,
    const DepletionProfile& profile) {
  IterationBoundCheck check;
  check.bound = profile.iteration_bound();
  check.satisfied = iterations_to_correct.has_value() &&
                    *iterations_to_correct <= check.bound;
  return check;
}

// ---------------------------------------------------------------------------
// Speedup accounting
// ---------------------------------------------------------------------------

// Overall speedup of a run that needs K iterations at batch size M, where
// eta is the cost ratio of one transition evaluation to one policy
// evaluation: (eta + 1) / ((eta + 1/M) * K).
inline double speedup_model(double eta, std::int64_t processes,
                            std::int64_t iterations) {
  if (eta < 0.0 || processes < 1 || iterations < 1) {
    throw ContractViolation("speedup model: eta >= 0, M >= 1, K >= 1 required");
  }
  return (eta + 1.0) /
         ((eta + 1.0 / static_cast<double>(processes)) *
          static_cast<double>(iterations));
}

// Hardware-independent speedup surrogate: the serial cost (T policy
// evaluations) divided by the lockstep-equivalent evaluation cost actually
// incurred.
template <typename R>
double evaluation_speedup_proxy(const R& result, std::int64_t horizon) {
  if (horizon < 1) {
    throw ContractViolation("speedup proxy: horizon must be >= 1");
  }
  if (result.policy_eval_count_sequential_equivalent <= 0) {
    throw ContractViolation("speedup proxy: run performed no evaluations");
  }
  return static_cast<double>(horizon) /
         static_cast<double>(result.policy_eval_count_sequential_equivalent);
}

}  // namespace picard::theory
