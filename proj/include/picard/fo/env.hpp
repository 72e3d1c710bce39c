#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "picard/engine.hpp"
#include "picard/fo/local_state.hpp"
#include "picard/fo/types.hpp"

namespace picard::fo {

// Engine adapter for the fulfillment environment. Dynamics: fulfilling an
// order at node j consumes one unit of node-j capacity and one unit of the
// order's product inventory at j; declining consumes nothing.
class FoEnv {
 public:
  using State = FoState;
  using Action = FoAction;
  using Disturbance = Order;
  using Local = FoLocalState;

  FoEnv(FoState initial, std::int32_t products)
      : initial_(std::move(initial)), products_(products) {}

  [[nodiscard]] std::int32_t node_count() const {
    return initial_.node_count();
  }
  [[nodiscard]] std::int32_t product_count() const { return products_; }

  [[nodiscard]] State initial_state() const { return initial_; }
  [[nodiscard]] Action null_action() const { return kNoFulfill; }
  [[nodiscard]] bool actions_equal(const Action& a, const Action& b) const {
    return a == b;
  }

  [[nodiscard]] bool feasible(const State& state, const Disturbance& order,
                              const Action& action) const {
    return action_feasible(state, order, action);
  }
  void apply(State& state, const Action& action,
             const Disturbance& order) const {
    apply_in_place(state, order, action);
  }

  [[nodiscard]] Local make_local() const {
    Local local(initial_.node_count(), products_);
    local.rebind(initial_);
    return local;
  }
  void reset_local(Local& local, const State& base) const {
    local.rebind(base);
  }
  void reset_local(Local&, const State&&) const = delete;
  [[nodiscard]] bool feasible_local(const Local& local,
                                    const Disturbance& order,
                                    const Action& action) const {
    return action_feasible(local, order, action);
  }
  void apply_local(Local& local, const Action& action,
                   const Disturbance& order) const {
    local.apply(order, action);
  }
  [[nodiscard]] State snapshot(const Local& local) const {
    return local.snapshot();
  }

 private:
  FoState initial_;
  std::int32_t products_;
};

static_assert(Environment<FoEnv>);

// Value-returning transition; errors on an infeasible action.
[[nodiscard]] inline FoState fo_transition(const FoState& state,
                                           const FoAction& action,
                                           const Order& order) {
  FoState next = state;
  apply_in_place(next, order, action);
  return next;
}

[[nodiscard]] inline bool fo_feasible(const FoState& state, const Order& order,
                                      const FoAction& action) {
  return action_feasible(state, order, action);
}

// Total reward along an action sequence; declining earns zero.
[[nodiscard]] inline double fo_total_reward(std::span<const Order> orders,
                                            std::span<const FoAction> actions) {
  if (orders.size() != actions.size()) {
    throw ContractViolation("total reward: order/action length mismatch");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < orders.size(); ++t) {
    if (!actions[t].is_null()) {
      total += orders[t].rewards[static_cast<std::size_t>(actions[t].node)];
    }
  }
  return total;
}

}  // namespace picard::fo
