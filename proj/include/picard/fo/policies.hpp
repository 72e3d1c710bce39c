#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "picard/engine.hpp"
#include "picard/fo/mlp.hpp"
#include "picard/fo/types.hpp"
#include "picard/rng.hpp"

namespace picard::fo {

// Tie-breaking everywhere: the lowest node index wins, and declining loses
// to any fulfilling option of equal score.

// Fulfills from the feasible node with the highest reward; declines only
// when no node is feasible.
struct GreedyPolicy {
  static constexpr EvalCost cost_class = EvalCost::cheap;

  template <FoStateView V>
  [[nodiscard]] FoAction evaluate(const V& view, const Order& order) const {
    const auto caps = view.capacities();
    const auto row = view.inventory_row(order.product);
    if (row.empty()) return kNoFulfill;
    FoAction best = kNoFulfill;
    double best_reward = 0.0;
    for (std::size_t j = 0; j < caps.size(); ++j) {
      if (caps[j] <= 0 || row[j] <= 0) continue;
      const double r = order.rewards[j];
      if (best.is_null() || r > best_reward) {
        best = FoAction{static_cast<std::int32_t>(j)};
        best_reward = r;
      }
    }
    return best;
  }
};

// Adds a bonus proportional to a node's share of the current maximum
// remaining capacity: score_j = r_j + gamma * c_j / max_j' c_j'. gamma = 0
// is exactly the greedy policy; a very large gamma always fulfills from the
// feasible node with the greatest remaining capacity.
struct CapacityPenalizedPolicy {
  double gamma = 0.0;
  static constexpr EvalCost cost_class = EvalCost::cheap;

  template <FoStateView V>
  [[nodiscard]] FoAction evaluate(const V& view, const Order& order) const {
    const auto caps = view.capacities();
    const auto row = view.inventory_row(order.product);
    if (row.empty()) return kNoFulfill;
    std::int32_t max_capacity = 0;
    for (auto c : caps) max_capacity = std::max(max_capacity, c);
    FoAction best = kNoFulfill;
    double best_score = 0.0;
    for (std::size_t j = 0; j < caps.size(); ++j) {
      if (caps[j] <= 0 || row[j] <= 0) continue;
      const double score =
          order.rewards[j] +
          gamma * static_cast<double>(caps[j]) / max_capacity;
      if (best.is_null() || score > best_score) {
        best = FoAction{static_cast<std::int32_t>(j)};
        best_score = score;
      }
    }
    return best;
  }
};

// Bid-price style policy: fulfills from the feasible node maximizing
// r_j - mu_inventory(i, j) - mu_capacity(j), where the two price vectors are
// produced by a small MLP from a fixed-length feature view of the state.
// Declining scores zero, so an order is declined when every feasible node
// scores negative. Zero parameters make the policy extensionally equal to
// the greedy policy.
//
// Features (length 2J + 1): remaining capacity as a fraction of initial
// capacity per node, the order product's remaining inventory as a fraction
// of its initial inventory per node (0/0 -> 0), and the fraction of the
// horizon elapsed.
class DualNetworkPolicy {
 public:
  static constexpr EvalCost cost_class = EvalCost::expensive;

  DualNetworkPolicy(MlpParams params, std::shared_ptr<const FoState> initial,
                    std::int64_t horizon)
      : params_(std::move(params)),
        initial_(std::move(initial)),
        horizon_(horizon) {
    const auto nodes = initial_->node_count();
    if (params_.widths.front() != 2 * nodes + 1 ||
        params_.widths.back() != 2 * nodes) {
      throw ContractViolation("dual network: layer sizes do not match J");
    }
  }

  static DualNetworkPolicy zero(std::shared_ptr<const FoState> initial,
                                std::int64_t horizon) {
    const auto nodes = initial->node_count();
    return DualNetworkPolicy(MlpParams::zeros(2 * nodes + 1, 2 * nodes),
                             std::move(initial), horizon);
  }

  static DualNetworkPolicy seeded(std::shared_ptr<const FoState> initial,
                                  std::int64_t horizon, std::uint64_t seed) {
    const auto nodes = initial->node_count();
    return DualNetworkPolicy(
        MlpParams::seeded_uniform(2 * nodes + 1, 2 * nodes, seed),
        std::move(initial), horizon);
  }

  [[nodiscard]] const MlpParams& params() const { return params_; }

  template <FoStateView V>
  [[nodiscard]] FoAction evaluate(const V& view, const Order& order) const {
    const auto caps = view.capacities();
    const auto row = view.inventory_row(order.product);
    const auto nodes = static_cast<std::size_t>(view.node_count());

    bool any_feasible = false;
    for (std::size_t j = 0; j < nodes; ++j) {
      if (caps[j] > 0 && !row.empty() && row[j] > 0) {
        any_feasible = true;
        break;
      }
    }
    if (!any_feasible) return kNoFulfill;

    std::vector<double> features(2 * nodes + 1, 0.0);
    const auto init_caps = initial_->capacities();
    const auto init_row = initial_->inventory_row(order.product);
    for (std::size_t j = 0; j < nodes; ++j) {
      features[j] = init_caps[j] > 0
                        ? static_cast<double>(caps[j]) / init_caps[j]
                        : 0.0;
      const std::int32_t have = row.empty() ? 0 : row[j];
      const std::int32_t had = init_row.empty() ? 0 : init_row[j];
      features[nodes + j] = had > 0 ? static_cast<double>(have) / had : 0.0;
    }
    features[2 * nodes] =
        horizon_ > 0 ? static_cast<double>(order.t) / horizon_ : 0.0;

    std::vector<double> prices(2 * nodes);
    params_.forward(features, prices);

    FoAction best = kNoFulfill;
    double best_score = 0.0;  // declining scores zero
    for (std::size_t j = 0; j < nodes; ++j) {
      if (caps[j] <= 0 || row[j] <= 0) continue;
      const double score = order.rewards[j] - prices[j] - prices[nodes + j];
      if (!std::isfinite(score)) {
        throw ContractViolation("dual network produced a non-finite score",
                                order.t);
      }
      if (score > best_score || (score == best_score && best.is_null())) {
        best = FoAction{static_cast<std::int32_t>(j)};
        best_score = score;
      }
    }
    return best;
  }

 private:
  MlpParams params_;
  std::shared_ptr<const FoState> initial_;
  std::int64_t horizon_;
};

// ---------------------------------------------------------------------------
// Regularity-condition checker
// ---------------------------------------------------------------------------
//
// Probes a policy against the three conditions the iteration-count bound
// needs:
//   1. inventory independence — the decision for an order depends only on
//      the order's own product inventory;
//   2. consistency — jointly perturbing one other node's inventory and
//      capacity can redirect the decision only to that node;
//   3. monotonicity — adding inventory at the chosen node, or capacity at
//      any node that already has some, never changes the decision.

struct AssumptionWitness {
  std::int64_t trial = 0;
  std::string detail;
};

struct AssumptionReport {
  std::int64_t trials = 0;
  std::array<std::int64_t, 3> violations{0, 0, 0};
  std::array<std::optional<AssumptionWitness>, 3> first_witness;

  [[nodiscard]] bool clean() const {
    return violations[0] == 0 && violations[1] == 0 && violations[2] == 0;
  }
};

// Seeded generator of random probe states and orders.
struct AssumptionSampler {
  std::int32_t nodes = 3;
  std::int32_t products = 4;
  std::int32_t max_units = 3;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::string describe_action(const FoAction& a) {
  return a.is_null() ? std::string("decline") : "node " + std::to_string(a.node);
}

}  // namespace detail

template <typename P>
AssumptionReport check_assumptions(const P& policy,
                                   const AssumptionSampler& sampler,
                                   std::int64_t trials) {
  auto gen = rng::make(sampler.seed);
  AssumptionReport report;
  report.trials = trials;

  auto record = [&report](int which, std::int64_t trial,
                          const std::string& detail) {
    ++report.violations[static_cast<std::size_t>(which)];
    if (!report.first_witness[static_cast<std::size_t>(which)]) {
      report.first_witness[static_cast<std::size_t>(which)] =
          AssumptionWitness{trial, detail};
    }
  };

  const auto nodes = static_cast<std::size_t>(sampler.nodes);
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    FoState state;
    state.capacity.resize(nodes);
    for (auto& c : state.capacity) {
      c = static_cast<std::int32_t>(
          rng::below(gen, static_cast<std::uint64_t>(sampler.max_units) + 1));
    }
    for (std::int32_t i = 0; i < sampler.products; ++i) {
      auto& row = state.inventory[i];
      row.resize(nodes);
      for (auto& x : row) {
        x = static_cast<std::int32_t>(rng::below(
            gen, static_cast<std::uint64_t>(sampler.max_units) + 1));
      }
    }
    Order order;
    order.t = 0;
    order.product = static_cast<std::int32_t>(
        rng::below(gen, static_cast<std::uint64_t>(sampler.products)));
    order.rewards.resize(nodes);
    for (auto& r : order.rewards) r = rng::unit(gen);

    const FoAction base = policy.evaluate(state, order);

    // 1: inventory independence.
    if (sampler.products >= 2) {
      std::int32_t other = static_cast<std::int32_t>(
          rng::below(gen, static_cast<std::uint64_t>(sampler.products - 1)));
      if (other >= order.product) ++other;
      FoState perturbed = state;
      for (auto& x : perturbed.inventory[other]) {
        x = static_cast<std::int32_t>(rng::below(
            gen, static_cast<std::uint64_t>(sampler.max_units) + 1));
      }
      const FoAction got = policy.evaluate(perturbed, order);
      if (got != base) {
        record(0, trial,
               "perturbing product " + std::to_string(other) +
                   " changed the decision from " +
                   detail::describe_action(base) + " to " +
                   detail::describe_action(got));
      }
    }

    // 2: consistency.
    if (!base.is_null() && sampler.nodes >= 2) {
      std::int32_t other = static_cast<std::int32_t>(
          rng::below(gen, static_cast<std::uint64_t>(sampler.nodes - 1)));
      if (other >= base.node) ++other;
      FoState perturbed = state;
      perturbed.inventory[order.product][static_cast<std::size_t>(other)] =
          static_cast<std::int32_t>(rng::below(
              gen, static_cast<std::uint64_t>(sampler.max_units) + 1));
      perturbed.capacity[static_cast<std::size_t>(other)] =
          static_cast<std::int32_t>(rng::below(
              gen, static_cast<std::uint64_t>(sampler.max_units) + 1));
      const FoAction got = policy.evaluate(perturbed, order);
      if (got != base && got != FoAction{other}) {
        record(1, trial,
               "perturbing node " + std::to_string(other) +
                   " redirected the decision from " +
                   detail::describe_action(base) + " to " +
                   detail::describe_action(got));
      }
    }

    // 3: monotonicity, inventory side.
    if (!base.is_null()) {
      FoState perturbed = state;
      perturbed.inventory[order.product][static_cast<std::size_t>(base.node)] +=
          1;
      const FoAction got = policy.evaluate(perturbed, order);
      if (got != base) {
        record(2, trial,
               "adding inventory at the chosen node moved the decision to " +
                   detail::describe_action(got));
      }
    }
    // 3: monotonicity, capacity side.
    {
      std::vector<std::int32_t> positive;
      for (std::size_t j = 0; j < nodes; ++j) {
        if (state.capacity[j] > 0) {
          positive.push_back(static_cast<std::int32_t>(j));
        }
      }
      if (!positive.empty()) {
        const auto pick = positive[static_cast<std::size_t>(
            rng::below(gen, positive.size()))];
        FoState perturbed = state;
        perturbed.capacity[static_cast<std::size_t>(pick)] += 1;
        const FoAction got = policy.evaluate(perturbed, order);
        if (got != base) {
          record(2, trial,
                 "adding capacity at node " + std::to_string(pick) +
                     " moved the decision from " +
                     detail::describe_action(base) + " to " +
                     detail::describe_action(got));
        }
      }
    }
  }
  return report;
}

}  // namespace picard::fo
