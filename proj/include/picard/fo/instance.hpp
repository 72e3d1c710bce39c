#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "picard/engine.hpp"
#include "picard/fo/env.hpp"
#include "picard/fo/geometry.hpp"
#include "picard/fo/types.hpp"

namespace picard::fo {

struct InstanceMeta {
  double beta = 0.0;      // demand exponent, <= 0 (magnitude is used)
  double coverage = 0.8;  // fraction of demand the network can serve
  std::uint64_t seed = 0;
};

// A complete synthetic fulfillment problem: initial inventory/capacity plus
// the full order sequence. Immutable once generated; values are safe to
// share across threads.
struct Instance {
  std::int32_t nodes = 0;     // J
  std::int32_t products = 0;  // I
  std::int64_t horizon = 0;   // T
  FoState initial;
  std::vector<Order> orders;
  InstanceMeta meta;

  [[nodiscard]] FoEnv make_env() const { return FoEnv(initial, products); }
  [[nodiscard]] std::shared_ptr<const FoState> shared_initial() const {
    return std::make_shared<const FoState>(initial);
  }
};

// Apportions `total` units across weights by the largest-remainder method,
// so the result sums to `total` exactly. Ties go to the lowest index.
std::vector<std::int64_t> largest_remainder_apportion(
    std::span<const double> weights, std::int64_t total);

// Per-product order counts Q_i proportional to (i+1)^-|beta|, apportioned to
// sum to `horizon`. Counts are non-increasing in the product index.
std::vector<std::int64_t> demand_counts(std::int32_t products,
                                        std::int64_t horizon, double beta);

// Generates an instance:
//  - order counts per product follow the power law above;
//  - each order originates at a node sampled proportionally to population,
//    with distance-decay rewards from reward_vector();
//  - per-product network inventory round(coverage * Q_i) and network
//    capacity round(coverage * T), both apportioned across nodes pro rata
//    by population;
//  - order arrival times are a seeded uniform random permutation.
// Deterministic given its arguments.
Instance generate_instance(std::int32_t nodes, std::int32_t products,
                           std::int64_t horizon, double beta,
                           double coverage = 0.8, std::uint64_t seed = 0);

// Groups products into M balanced sets (largest demand first onto the
// currently lightest set; equal-demand products are ordered by a seeded
// shuffle) and assigns every order to its product's set, so all orders of a
// product share a process.
PartitionPlan make_product_partition(const Instance& instance,
                                     std::int32_t processes,
                                     std::uint64_t seed);

// On-disk layout: manifest.json (dimensions, meta, file checksums),
// orders.csv (t, product, origin_node, then J reward columns with 9 decimal
// digits), inventory.csv (product, node, units; zero rows omitted),
// capacity.csv (node, units). Reloading reproduces simulation outcomes
// bit-exactly.
void save_instance(const Instance& instance,
                   const std::filesystem::path& directory);
Instance load_instance(const std::filesystem::path& directory);

std::uint64_t fnv1a_file_checksum(const std::filesystem::path& file);

}  // namespace picard::fo
