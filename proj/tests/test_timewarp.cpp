#include <doctest.h>

#include "picard/fo/policies.hpp"
#include "picard/fo/timewarp.hpp"
#include "picard/theory.hpp"
#include "test_helpers.hpp"

using namespace picard;
using namespace picard::fo;
using namespace picard::timewarp;

TEST_CASE("ample capacity is covered by a single window") {
  Instance instance;
  instance.nodes = 2;
  instance.products = 3;
  instance.horizon = 12;
  instance.initial.capacity = {12, 12};
  for (std::int32_t i = 0; i < 3; ++i) {
    instance.initial.inventory[i] = {12, 12};
  }
  for (std::int32_t t = 0; t < 12; ++t) {
    Order order;
    order.t = t;
    order.product = t % 3;
    order.rewards = {0.6, 0.4};
    instance.orders.push_back(order);
  }

  const auto result = time_warp_simulate(instance, GreedyPolicy{}, 3, 1);
  CHECK(result.sync_rounds == 1);
  CHECK(result.rollbacks == 0);
}

TEST_CASE("windows reproduce the oracle with zero rollbacks") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto instance = test::small_random_instance(seed);
    const auto env = instance.make_env();
    const auto oracle = sequential_simulate(
        env, GreedyPolicy{}, std::span<const Order>(instance.orders));
    const auto result =
        time_warp_simulate(instance, GreedyPolicy{}, 4, seed, true);

    CHECK(result.rollbacks == 0);
    CHECK(result.actions == oracle.actions);
    CHECK(result.total_policy_evals == instance.horizon);

    // Window lengths tile the horizon.
    std::int64_t covered = 0;
    for (const auto& row : result.trace) covered += row.window_length;
    CHECK(covered == instance.horizon);
  }
}

TEST_CASE("within a window no stocked node crosses zero before its end") {
  const auto instance = test::small_random_instance(33);
  const auto env = instance.make_env();
  const auto run = sequential_simulate_with_states(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders));
  const auto result =
      time_warp_simulate(instance, GreedyPolicy{}, 4, 33, true);

  for (const auto& row : result.trace) {
    const auto& entering =
        run.states[static_cast<std::size_t>(row.t_start)].capacity;
    for (std::size_t j = 0; j < entering.size(); ++j) {
      if (entering[j] <= 0) continue;
      // Positive at the window start implies positive at every decision
      // point inside the window (it may reach zero only at the boundary).
      for (std::int64_t t = row.t_start;
           t < row.t_start + row.window_length; ++t) {
        CHECK(run.states[static_cast<std::size_t>(t)].capacity[j] > 0);
      }
    }
  }
}

TEST_CASE("evaluation accounting matches the partition loads") {
  const auto instance = test::small_random_instance(44);
  const auto result =
      time_warp_simulate(instance, GreedyPolicy{}, 3, 44, true);
  std::int64_t total = 0;
  for (const auto& row : result.trace) total += row.max_process_evals;
  CHECK(result.policy_eval_count_sequential_equivalent == total);
  CHECK(result.policy_eval_count_sequential_equivalent <=
        result.total_policy_evals);
}

TEST_CASE("assumption-violating policies still terminate, possibly rolling back") {
  // The capacity-heavy policy can invalidate windows; the baseline recovers
  // by re-executing them serially, surfacing the cost in the counters.
  const auto instance = test::small_random_instance(55);
  const CapacityPenalizedPolicy policy{5.0};
  const auto result = time_warp_simulate(instance, policy, 4, 55);
  CHECK(result.actions.size() ==
        static_cast<std::size_t>(instance.horizon));
  CHECK(result.rollbacks >= 0);

  // Every returned action is feasible along its own trajectory.
  const auto env = instance.make_env();
  auto state = env.initial_state();
  for (std::size_t t = 0; t < result.actions.size(); ++t) {
    const auto& order = instance.orders[t];
    REQUIRE(fo_feasible(state, order, result.actions[t]));
    state = fo_transition(state, result.actions[t], order);
  }
}

TEST_CASE("fixed-point engine beats the safe-window baseline on eval proxy") {
  const auto instance = generate_instance(5, 1500, 4000, 0.0, 0.8, 9);
  const auto env = instance.make_env();
  const auto oracle = sequential_simulate(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders));
  const std::int32_t processes = 64;

  const auto plan = make_product_partition(instance, processes, 9);
  const auto picard = picard_simulate(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders), plan, {},
      {}, std::span<const FoAction>(oracle.actions));
  const auto warp = time_warp_simulate(instance, GreedyPolicy{}, processes, 9);

  CHECK(warp.actions == oracle.actions);
  const double picard_proxy =
      theory::evaluation_speedup_proxy(picard, instance.horizon);
  const double warp_proxy =
      theory::evaluation_speedup_proxy(warp, instance.horizon);
  CHECK(picard_proxy > warp_proxy);
}

TEST_CASE("a network with no capacity anywhere still completes") {
  Instance instance;
  instance.nodes = 2;
  instance.products = 2;
  instance.horizon = 6;
  instance.initial.capacity = {0, 0};
  instance.initial.inventory[0] = {4, 4};
  instance.initial.inventory[1] = {4, 4};
  for (std::int32_t t = 0; t < 6; ++t) {
    Order order;
    order.t = t;
    order.product = t % 2;
    order.rewards = {0.5, 0.5};
    instance.orders.push_back(order);
  }
  const auto env = instance.make_env();
  const auto oracle = sequential_simulate(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders));

  for (auto rule : {WindowRule::min_capacity,
                    WindowRule::min_stocked_capacity}) {
    const auto result =
        time_warp_simulate(instance, GreedyPolicy{}, 2, 1, false, rule);
    CHECK(result.actions == oracle.actions);
    for (const auto& action : result.actions) CHECK(action.is_null());
    CHECK(result.rollbacks == 0);
  }
}

TEST_CASE("a clean bid-price style policy also advances without rollbacks") {
  const auto instance = test::small_random_instance(72);
  const auto env = instance.make_env();
  const auto policy =
      DualNetworkPolicy::zero(instance.shared_initial(), instance.horizon);
  const auto oracle = sequential_simulate(
      env, policy, std::span<const Order>(instance.orders));
  const auto result = time_warp_simulate(instance, policy, 4, 72);
  CHECK(result.rollbacks == 0);
  CHECK(result.actions == oracle.actions);
}

TEST_CASE("the stocked-only window rule never trails the plain minimum") {
  // Both rules are exact; the stocked-only variant just keeps windows wide
  // once some node is exhausted.
  for (std::uint64_t seed = 60; seed < 64; ++seed) {
    const auto instance = test::small_random_instance(seed);
    const auto env = instance.make_env();
    const auto oracle = sequential_simulate(
        env, GreedyPolicy{}, std::span<const Order>(instance.orders));
    const auto plain = time_warp_simulate(instance, GreedyPolicy{}, 4, seed,
                                          false, WindowRule::min_capacity);
    const auto stocked =
        time_warp_simulate(instance, GreedyPolicy{}, 4, seed, false,
                           WindowRule::min_stocked_capacity);
    CHECK(plain.actions == oracle.actions);
    CHECK(stocked.actions == oracle.actions);
    CHECK(stocked.sync_rounds <= plain.sync_rounds);
    CHECK(stocked.policy_eval_count_sequential_equivalent <=
          plain.policy_eval_count_sequential_equivalent);
  }
}
