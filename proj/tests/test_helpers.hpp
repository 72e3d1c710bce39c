#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "picard/fo/env.hpp"
#include "picard/fo/instance.hpp"
#include "picard/fo/types.hpp"

namespace picard::test {

// Two-order toy: one product, two nodes, one unit of everything. The greedy
// trajectory fulfills order 0 at node 0 (reward 0.9), which depletes node 0,
// so order 1 goes to node 1 (reward 0.2).
inline fo::Instance toy_two_order_instance() {
  fo::Instance instance;
  instance.nodes = 2;
  instance.products = 1;
  instance.horizon = 2;
  instance.initial.capacity = {1, 1};
  instance.initial.inventory[0] = {1, 1};
  instance.orders.resize(2);
  instance.orders[0] = {0, 0, 0, {0.9, 0.1}};
  instance.orders[1] = {1, 0, 0, {0.8, 0.2}};
  instance.meta = {0.0, 1.0, 0};
  return instance;
}

// Random but reproducible small instances for property-style loops.
inline fo::Instance small_random_instance(std::uint64_t seed) {
  auto gen = rng::make(seed);
  const auto nodes = static_cast<std::int32_t>(2 + rng::below(gen, 4));
  const auto products = static_cast<std::int32_t>(1 + rng::below(gen, 12));
  const auto horizon = static_cast<std::int64_t>(1 + rng::below(gen, 60));
  const double beta = -static_cast<double>(rng::below(gen, 11)) / 10.0;
  const double coverage = 0.5 + 0.5 * rng::unit(gen);
  return fo::generate_instance(nodes, products, horizon, beta, coverage,
                               seed ^ 0x9e3779b97f4a7c15ull);
}

}  // namespace picard::test
