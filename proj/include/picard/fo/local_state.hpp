#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "picard/fo/types.hpp"

namespace picard::fo {

// Copy-on-write view over a base FoState, used for the per-process window
// sweeps. Capacities are copied (length J, cheap); inventory rows are copied
// into a pooled buffer the first time the sweep touches their product, so a
// sweep of W steps costs O(J + W) regardless of the number of products.
//
// rebind() is O(J): the product index is invalidated by bumping an epoch
// counter instead of clearing it.
class FoLocalState {
 public:
  FoLocalState(std::int32_t nodes, std::int32_t products)
      : nodes_(nodes),
        stamp_(static_cast<std::size_t>(products), 0),
        slot_(static_cast<std::size_t>(products), 0) {}

  // The base state must outlive the view.
  void rebind(const FoState&& base) = delete;
  void rebind(const FoState& base) {
    base_ = &base;
    capacity_.assign(base.capacity.begin(), base.capacity.end());
    rows_.clear();
    ++epoch_;
    if (epoch_ == 0) {  // wrapped; invalidate stamps the slow way
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
  }

  [[nodiscard]] std::int32_t node_count() const { return nodes_; }
  [[nodiscard]] std::span<const std::int32_t> capacities() const {
    return capacity_;
  }
  [[nodiscard]] std::span<const std::int32_t> inventory_row(
      std::int32_t product) const {
    const auto p = static_cast<std::size_t>(product);
    if (stamp_[p] == epoch_) {
      return {rows_.data() + slot_[p] * static_cast<std::size_t>(nodes_),
              static_cast<std::size_t>(nodes_)};
    }
    return base_->inventory_row(product);
  }

  void apply(const Order& order, const FoAction& action) {
    if (action.is_null()) return;
    if (!action_feasible(*this, order, action)) {
      throw ContractViolation(
          "infeasible fulfillment at t=" + std::to_string(order.t), order.t);
    }
    capacity_[static_cast<std::size_t>(action.node)] -= 1;
    touch(order.product)[static_cast<std::size_t>(action.node)] -= 1;
  }

  // Materialize a plain state (base plus local modifications).
  [[nodiscard]] FoState snapshot() const {
    FoState out;
    out.capacity = capacity_;
    out.inventory = base_->inventory;
    for (std::size_t p = 0; p < stamp_.size(); ++p) {
      if (stamp_[p] != epoch_) continue;
      auto row = inventory_row(static_cast<std::int32_t>(p));
      out.inventory[static_cast<std::int32_t>(p)].assign(row.begin(),
                                                         row.end());
    }
    return out;
  }

 private:
  std::span<std::int32_t> touch(std::int32_t product) {
    const auto p = static_cast<std::size_t>(product);
    const auto width = static_cast<std::size_t>(nodes_);
    if (stamp_[p] != epoch_) {
      stamp_[p] = epoch_;
      slot_[p] = rows_.size() / width;
      auto base_row = base_->inventory_row(product);
      if (base_row.empty()) {
        rows_.resize(rows_.size() + width, 0);
      } else {
        rows_.insert(rows_.end(), base_row.begin(), base_row.end());
      }
    }
    return {rows_.data() + slot_[p] * width, width};
  }

  const FoState* base_ = nullptr;
  std::int32_t nodes_ = 0;
  std::vector<std::int32_t> capacity_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::size_t> slot_;
  std::vector<std::int32_t> rows_;
  std::uint32_t epoch_ = 0;
};

static_assert(FoStateView<FoLocalState>);
static_assert(FoStateView<FoState>);

}  // namespace picard::fo
