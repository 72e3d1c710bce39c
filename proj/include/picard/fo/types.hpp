#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "picard/errors.hpp"

namespace picard::fo {

// Fulfillment decision for one order: a node index, or "do not fulfill".
struct FoAction {
  std::int32_t node = -1;

  [[nodiscard]] bool is_null() const { return node < 0; }
  friend bool operator==(const FoAction&, const FoAction&) = default;
};

inline constexpr FoAction kNoFulfill{-1};

// One demand event: which product arrived and the reward earned by
// fulfilling it from each node. `t` is the event's position in the horizon.
struct Order {
  std::int32_t t = 0;
  std::int32_t product = 0;
  std::int32_t origin_node = 0;
  std::vector<double> rewards;  // length J, entries in [0, 1]
};

// Anything the policies can read fulfillment state from: remaining node
// capacities plus the per-node inventory row of one product. An empty row
// means the product has no inventory anywhere.
template <typename V>
concept FoStateView = requires(const V& view, std::int32_t product) {
  { view.node_count() } -> std::convertible_to<std::int32_t>;
  { view.capacities() } -> std::convertible_to<std::span<const std::int32_t>>;
  {
    view.inventory_row(product)
  } -> std::convertible_to<std::span<const std::int32_t>>;
};

template <FoStateView V>
[[nodiscard]] inline std::int32_t inventory_at(const V& view,
                                               std::int32_t product,
                                               std::int32_t node) {
  auto row = view.inventory_row(product);
  return row.empty() ? 0 : row[static_cast<std::size_t>(node)];
}

// Plain fulfillment state: per-node capacities plus sparse per-product
// inventory rows (an absent row is all-zero). Units are integral because
// every order consumes exactly one unit of inventory and one of capacity.
struct FoState {
  std::vector<std::int32_t> capacity;  // length J
  std::unordered_map<std::int32_t, std::vector<std::int32_t>> inventory;

  [[nodiscard]] std::int32_t node_count() const {
    return static_cast<std::int32_t>(capacity.size());
  }
  [[nodiscard]] std::span<const std::int32_t> capacities() const {
    return capacity;
  }
  [[nodiscard]] std::span<const std::int32_t> inventory_row(
      std::int32_t product) const {
    auto it = inventory.find(product);
    if (it == inventory.end()) return {};
    return it->second;
  }

  friend bool operator==(const FoState&, const FoState&) = default;
};

template <FoStateView V>
[[nodiscard]] inline bool action_feasible(const V& view, const Order& order,
                                          const FoAction& action) {
  if (action.is_null()) return true;
  if (action.node >= view.node_count()) return false;
  if (view.capacities()[static_cast<std::size_t>(action.node)] <= 0) {
    return false;
  }
  return inventory_at(view, order.product, action.node) > 0;
}

// Decrements one unit of capacity and one unit of the order's product
// inventory at the chosen node; a null action leaves the state untouched.
inline void apply_in_place(FoState& state, const Order& order,
                           const FoAction& action) {
  if (action.is_null()) return;
  if (!action_feasible(state, order, action)) {
    throw ContractViolation(
        "infeasible fulfillment at t=" + std::to_string(order.t) + " node=" +
            std::to_string(action.node),
        order.t);
  }
  state.capacity[static_cast<std::size_t>(action.node)] -= 1;
  state.inventory[order.product][static_cast<std::size_t>(action.node)] -= 1;
}

}  // namespace picard::fo
