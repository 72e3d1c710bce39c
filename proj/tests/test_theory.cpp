#include <doctest.h>

#include <cmath>

#include "picard/fo/policies.hpp"
#include "picard/theory.hpp"
#include "test_helpers.hpp"

using namespace picard;
using namespace picard::fo;
using namespace picard::theory;

namespace {

// Copies the instance with every product fully stocked everywhere, so only
// capacity can bind.
Instance with_unconstrained_inventory(Instance instance) {
  const auto units = static_cast<std::int32_t>(instance.horizon);
  for (std::int32_t i = 0; i < instance.products; ++i) {
    instance.initial.inventory[i].assign(
        static_cast<std::size_t>(instance.nodes), units);
  }
  return instance;
}

}  // namespace

TEST_CASE("depletion profile of the two-order toy") {
  const auto instance = test::toy_two_order_instance();
  const auto env = instance.make_env();
  const auto run = sequential_simulate_with_states(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders));
  const auto profile = compute_depletion(run.states);

  // Node 0 is consumed by order 0, so order 1 already sees it at zero; node
  // 1 only hits zero in the final state, which no order observes.
  CHECK(profile.first_depleted_at == std::vector<std::int64_t>{1, 2});
  CHECK(profile.depleted_nodes == std::vector<std::int32_t>{0});
  CHECK(profile.iteration_bound() == 2);
  CHECK(profile.depleted_before_order(0, 1));
  CHECK_FALSE(profile.depleted_before_order(0, 0));
  CHECK_FALSE(profile.depleted_before_order(1, 1));
}

TEST_CASE("no node depletes when capacity dwarfs the horizon") {
  auto instance = test::small_random_instance(8);
  instance.initial.capacity.assign(
      static_cast<std::size_t>(instance.nodes),
      static_cast<std::int32_t>(instance.horizon + 100));
  const auto env = instance.make_env();
  const auto run = sequential_simulate_with_states(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders));
  const auto profile = compute_depletion(run.states);
  CHECK(profile.depleted_count() == 0);
  for (auto tau : profile.first_depleted_at) CHECK(tau == instance.horizon);
}

TEST_CASE("a node consumed exactly at the horizon end never depletes") {
  Instance instance;
  instance.nodes = 1;
  instance.products = 1;
  instance.horizon = 2;
  instance.initial.capacity = {2};
  instance.initial.inventory[0] = {2};
  instance.orders.resize(2);
  instance.orders[0] = {0, 0, 0, {1.0}};
  instance.orders[1] = {1, 0, 0, {1.0}};

  const auto env = instance.make_env();
  const auto run = sequential_simulate_with_states(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders));
  CHECK(run.states.back().capacity == std::vector<std::int32_t>{0});
  const auto profile = compute_depletion(run.states);
  CHECK(profile.first_depleted_at == std::vector<std::int64_t>{2});
  CHECK(profile.depleted_count() == 0);
}

TEST_CASE("depletion computation is a pure function of the trajectory") {
  const auto instance = test::small_random_instance(14);
  const auto env = instance.make_env();
  const auto run = sequential_simulate_with_states(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders));
  const auto a = compute_depletion(run.states);
  const auto b = compute_depletion(run.states);
  CHECK(a.first_depleted_at == b.first_depleted_at);
  CHECK(a.depleted_nodes == b.depleted_nodes);
  CHECK(a.sorted_depletion_times == b.sorted_depletion_times);
}

TEST_CASE("capacity recorder matches materialized states") {
  const auto instance = test::small_random_instance(25);
  const auto env = instance.make_env();
  CapacityRecorder recorder;
  sequential_simulate(env, GreedyPolicy{},
                      std::span<const Order>(instance.orders), &recorder);
  const auto run = sequential_simulate_with_states(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders));
  REQUIRE(recorder.capacities.size() == run.states.size());
  for (std::size_t t = 0; t < run.states.size(); ++t) {
    CHECK(recorder.capacities[t] == run.states[t].capacity);
  }
  const auto a = compute_depletion_from_capacities(recorder.capacities);
  const auto b = compute_depletion(run.states);
  CHECK(a.first_depleted_at == b.first_depleted_at);
}

TEST_CASE("cached actions stay inside the depleting-node envelope") {
  for (std::uint64_t seed = 40; seed < 52; ++seed) {
    const auto instance =
        with_unconstrained_inventory(test::small_random_instance(seed));
    const auto env = instance.make_env();
    const auto oracle = sequential_simulate_with_states(
        env, GreedyPolicy{}, std::span<const Order>(instance.orders));
    const auto profile = compute_depletion(oracle.states);

    const auto plan = make_product_partition(instance, 4, seed);
    CacheTraceRecorder recorder;
    picard_simulate(env, GreedyPolicy{},
                    std::span<const Order>(instance.orders), plan, {}, {},
                    std::span<const FoAction>(oracle.actions), &recorder);

    const auto violations = check_special_invariant(
        recorder.caches, oracle.actions, profile);
    CHECK(violations.empty());

    // Negative control: inject a wrong, never-depleting action.
    if (!recorder.caches.empty() && profile.depleted_count() <
                                        instance.nodes) {
      std::int32_t spare = 0;
      for (std::int32_t j = 0; j < instance.nodes; ++j) {
        if (!profile.depleted_before_order(j, instance.horizon)) spare = j;
      }
      auto corrupted = recorder.caches;
      std::size_t slot = 0;
      bool found = false;
      for (std::size_t t = 0; t < corrupted[0].size() && !found; ++t) {
        if (oracle.actions[t] != FoAction{spare}) {
          slot = t;
          found = true;
        }
      }
      if (found) {
        corrupted[0][slot] = FoAction{spare};
        const auto bad = check_special_invariant(corrupted, oracle.actions,
                                                 profile);
        REQUIRE(bad.size() == 1);
        CHECK(bad[0].iteration == 1);
        CHECK(bad[0].t == static_cast<std::int64_t>(slot));
      }
    }
  }
}

TEST_CASE("without depletion the envelope degenerates to exact equality") {
  auto instance =
      with_unconstrained_inventory(test::small_random_instance(60));
  instance.initial.capacity.assign(
      static_cast<std::size_t>(instance.nodes),
      static_cast<std::int32_t>(instance.horizon + 10));
  const auto env = instance.make_env();
  const auto oracle = sequential_simulate_with_states(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders));
  const auto profile = compute_depletion(oracle.states);
  REQUIRE(profile.depleted_count() == 0);

  std::vector<std::vector<FoAction>> trace{oracle.actions};
  CHECK(check_special_invariant(trace, oracle.actions, profile).empty());

  auto wrong = oracle.actions;
  wrong[0] = wrong[0].is_null() ? FoAction{0} : kNoFulfill;
  std::vector<std::vector<FoAction>> bad{wrong};
  CHECK(check_special_invariant(bad, oracle.actions, profile).size() == 1);
}

TEST_CASE("per-process states dominate the sequential ones on stocked nodes") {
  for (std::uint64_t seed = 70; seed < 76; ++seed) {
    const auto instance = test::small_random_instance(seed);
    const auto env = instance.make_env();
    const auto oracle = sequential_simulate_with_states(
        env, GreedyPolicy{}, std::span<const Order>(instance.orders));
    const auto plan = make_product_partition(instance, 3, seed);
    const auto violations = check_monotonicity_invariant(
        env, GreedyPolicy{}, std::span<const Order>(instance.orders), plan,
        {}, oracle.states, 1);
    CHECK(violations.empty());
  }
}

TEST_CASE("monotonicity checker tolerates assumption-violating policies") {
  // Demonstrates the checker records rather than fails; violations may or
  // may not occur at this scale.
  const auto instance = test::small_random_instance(81);
  const auto env = instance.make_env();
  const CapacityPenalizedPolicy policy{5.0};
  const auto oracle = sequential_simulate_with_states(
      env, policy, std::span<const Order>(instance.orders));
  const auto plan = make_product_partition(instance, 3, 81);
  const auto violations = check_monotonicity_invariant(
      env, policy, std::span<const Order>(instance.orders), plan, {},
      oracle.states, 1);
  for (const auto& v : violations) {
    CHECK((v.check == "monotonicity_capacity" ||
           v.check == "monotonicity_inventory"));
    CHECK_FALSE(to_json_line(v).empty());
  }
}

TEST_CASE("iteration bound holds on product-partitioned greedy runs") {
  for (std::uint64_t seed = 90; seed < 100; ++seed) {
    const auto instance = test::small_random_instance(seed);
    const auto env = instance.make_env();
    const auto oracle = sequential_simulate_with_states(
        env, GreedyPolicy{}, std::span<const Order>(instance.orders));
    const auto profile = compute_depletion(oracle.states);
    const auto plan = make_product_partition(instance, 4, seed);
    const auto result = picard_simulate(
        env, GreedyPolicy{}, std::span<const Order>(instance.orders), plan,
        {}, {}, std::span<const FoAction>(oracle.actions));

    const auto check =
        check_iteration_bound(result.iterations_to_correct, profile);
    CHECK(check.bound == profile.depleted_count() + 1);
    CHECK(check.satisfied);
    CHECK(*result.iterations_to_correct <= instance.nodes + 1);
  }
}

TEST_CASE("an undepleted instance is correct after one iteration") {
  auto instance = test::small_random_instance(101);
  instance.initial.capacity.assign(
      static_cast<std::size_t>(instance.nodes),
      static_cast<std::int32_t>(instance.horizon + 5));
  instance = with_unconstrained_inventory(std::move(instance));
  const auto env = instance.make_env();
  const auto oracle = sequential_simulate_with_states(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders));
  const auto profile = compute_depletion(oracle.states);
  REQUIRE(profile.iteration_bound() == 1);

  const auto plan = make_product_partition(instance, 4, 3);
  const auto result = picard_simulate(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders), plan, {},
      {}, std::span<const FoAction>(oracle.actions));
  REQUIRE(result.iterations_to_correct.has_value());
  CHECK(*result.iterations_to_correct <= 1);
}

TEST_CASE("speedup model arithmetic") {
  CHECK(speedup_model(0.0, 200, 5) == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(speedup_model(0.0, 200, 15) ==
        doctest::Approx(200.0 / 15.0).epsilon(1e-12));
  CHECK(speedup_model(0.2, 1000000000, 5) ==
        doctest::Approx(1.2).epsilon(1e-6));
  CHECK(speedup_model(0.0, 64, 1) == doctest::Approx(64.0));
  CHECK_THROWS_AS(speedup_model(-0.1, 10, 1), ContractViolation);
  CHECK_THROWS_AS(speedup_model(0.0, 0, 1), ContractViolation);
}

TEST_CASE("evaluation proxy stays above the bound-implied floor") {
  const auto instance = generate_instance(5, 2000, 6000, 0.0, 0.8, 17);
  const auto env = instance.make_env();
  const auto oracle = sequential_simulate_with_states(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders));
  const auto profile = compute_depletion(oracle.states);
  const std::int32_t processes = 64;
  const auto plan = make_product_partition(instance, processes, 5);

  std::vector<std::int64_t> loads(static_cast<std::size_t>(processes), 0);
  for (auto owner : plan.owner) ++loads[static_cast<std::size_t>(owner)];
  const auto max_load =
      *std::max_element(loads.begin(), loads.end());

  const auto result = picard_simulate(
      env, GreedyPolicy{}, std::span<const Order>(instance.orders), plan, {},
      {}, std::span<const FoAction>(oracle.actions));
  const double proxy =
      evaluation_speedup_proxy(result, instance.horizon);

  // iterations_to_converged <= bound + 1 and every sweep costs at most the
  // busiest partition, so the proxy cannot fall below this floor.
  const double floor = static_cast<double>(instance.horizon) /
                       (static_cast<double>(profile.iteration_bound() + 1) *
                        static_cast<double>(max_load));
  CHECK(proxy >= floor);
  CHECK(proxy > 1.0);  // strictly better than serial at this scale
}
