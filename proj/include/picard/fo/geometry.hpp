#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace picard::fo {

struct GeoNode {
  std::string name;
  std::string state;
  double latitude = 0.0;
  double longitude = 0.0;
  double population = 0.0;  // pro-rata weight
};

// Fulfillment network locations with pairwise great-circle distances.
class NetworkGeometry {
 public:
  explicit NetworkGeometry(std::vector<GeoNode> nodes);

  [[nodiscard]] std::int32_t node_count() const {
    return static_cast<std::int32_t>(nodes_.size());
  }
  [[nodiscard]] const std::vector<GeoNode>& nodes() const { return nodes_; }
  [[nodiscard]] double distance_km(std::int32_t a, std::int32_t b) const {
    return distances_[static_cast<std::size_t>(a) * nodes_.size() +
                      static_cast<std::size_t>(b)];
  }
  [[nodiscard]] std::vector<double> population_weights() const;

 private:
  std::vector<GeoNode> nodes_;
  std::vector<double> distances_;  // row-major node x node, symmetric
};

// Built-in table: the largest city of each of the 30 most populous U.S.
// states, weighted by state population. `nodes` must be at most 30.
NetworkGeometry default_geometry(std::int32_t nodes);

double great_circle_km(double lat_a, double lon_a, double lat_b, double lon_b);

// Distance-decay rewards: r_j = (max_j d_j - d_j) / max_j d_j, so the
// farthest node scores exactly 0 and a zero-distance node scores exactly 1.
// If every distance is zero (single-node networks) all rewards are defined
// as 1. Entries are rounded to 9 decimal places so serialized instances
// reload bit-exactly.
std::vector<double> rewards_from_distances(std::span<const double> distances);

// The same, for an order originating at one of the geometry's nodes.
std::vector<double> reward_vector(std::int32_t origin_node,
                                  const NetworkGeometry& geometry);

}  // namespace picard::fo
