#include "picard/fo/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace picard::fo {

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kPi = 3.14159265358979323846;

// Largest city of each of the 30 most populous U.S. states, ordered by
// state population (2020-census ballpark figures).
const GeoNode kCityTable[] = {
    {"Los Angeles", "CA", 34.05, -118.24, 39.54e6},
    {"Houston", "TX", 29.76, -95.37, 29.15e6},
    {"Jacksonville", "FL", 30.33, -81.66, 21.54e6},
    {"New York", "NY", 40.71, -74.01, 20.20e6},
    {"Philadelphia", "PA", 39.95, -75.17, 13.00e6},
    {"Chicago", "IL", 41.88, -87.63, 12.81e6},
    {"Columbus", "OH", 39.96, -83.00, 11.80e6},
    {"Atlanta", "GA", 33.75, -84.39, 10.71e6},
    {"Charlotte", "NC", 35.23, -80.84, 10.44e6},
    {"Detroit", "MI", 42.33, -83.05, 10.08e6},
    {"Newark", "NJ", 40.74, -74.17, 9.29e6},
    {"Virginia Beach", "VA", 36.85, -75.98, 8.63e6},
    {"Seattle", "WA", 47.61, -122.33, 7.71e6},
    {"Phoenix", "AZ", 33.45, -112.07, 7.15e6},
    {"Boston", "MA", 42.36, -71.06, 7.03e6},
    {"Nashville", "TN", 36.16, -86.78, 6.91e6},
    {"Indianapolis", "IN", 39.77, -86.16, 6.79e6},
    {"Baltimore", "MD", 39.29, -76.61, 6.18e6},
    {"Kansas City", "MO", 39.10, -94.58, 6.15e6},
    {"Milwaukee", "WI", 43.04, -87.91, 5.89e6},
    {"Denver", "CO", 39.74, -104.99, 5.77e6},
    {"Minneapolis", "MN", 44.98, -93.27, 5.71e6},
    {"Charleston", "SC", 32.78, -79.93, 5.12e6},
    {"Birmingham", "AL", 33.52, -86.81, 5.02e6},
    {"New Orleans", "LA", 29.95, -90.07, 4.66e6},
    {"Louisville", "KY", 38.25, -85.76, 4.51e6},
    {"Portland", "OR", 45.52, -122.68, 4.24e6},
    {"Oklahoma City", "OK", 35.47, -97.52, 3.96e6},
    {"Bridgeport", "CT", 41.19, -73.20, 3.61e6},
    {"Salt Lake City", "UT", 40.76, -111.89, 3.27e6},
};

double radians(double degrees) { return degrees * kPi / 180.0; }

}  // namespace

double great_circle_km(double lat_a, double lon_a, double lat_b, double lon_b) {
  const double phi_a = radians(lat_a);
  const double phi_b = radians(lat_b);
  const double d_phi = radians(lat_b - lat_a);
  const double d_lambda = radians(lon_b - lon_a);
  const double s = std::sin(d_phi / 2.0);
  const double t = std::sin(d_lambda / 2.0);
  const double h = s * s + std::cos(phi_a) * std::cos(phi_b) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, h)));
}

NetworkGeometry::NetworkGeometry(std::vector<GeoNode> nodes)
    : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  if (n == 0) {
    throw std::invalid_argument("geometry needs at least one node");
  }
  for (const auto& node : nodes_) {
    if (node.population <= 0.0) {
      throw std::invalid_argument("node populations must be positive");
    }
  }
  distances_.assign(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double d =
          great_circle_km(nodes_[a].latitude, nodes_[a].longitude,
                          nodes_[b].latitude, nodes_[b].longitude);
      distances_[a * n + b] = d;
      distances_[b * n + a] = d;
    }
  }
}

std::vector<double> NetworkGeometry::population_weights() const {
  std::vector<double> weights;
  weights.reserve(nodes_.size());
  for (const auto& node : nodes_) weights.push_back(node.population);
  return weights;
}

NetworkGeometry default_geometry(std::int32_t nodes) {
  constexpr auto table_size =
      static_cast<std::int32_t>(sizeof(kCityTable) / sizeof(kCityTable[0]));
  if (nodes < 1 || nodes > table_size) {
    throw std::invalid_argument("node count must be in [1, " +
                                std::to_string(table_size) + "]");
  }
  return NetworkGeometry(std::vector<GeoNode>(
      kCityTable, kCityTable + static_cast<std::size_t>(nodes)));
}

std::vector<double> rewards_from_distances(std::span<const double> distances) {
  double max_d = 0.0;
  for (double d : distances) max_d = std::max(max_d, d);
  std::vector<double> rewards(distances.size(), 1.0);
  if (max_d <= 0.0) return rewards;  // degenerate: every node co-located
  for (std::size_t j = 0; j < distances.size(); ++j) {
    const double r = (max_d - distances[j]) / max_d;
    rewards[j] = std::round(r * 1e9) / 1e9;
  }
  return rewards;
}

std::vector<double> reward_vector(std::int32_t origin_node,
                                  const NetworkGeometry& geometry) {
  const auto n = geometry.node_count();
  if (origin_node < 0 || origin_node >= n) {
    throw std::invalid_argument("origin node outside the geometry");
  }
  std::vector<double> distances(static_cast<std::size_t>(n), 0.0);
  for (std::int32_t j = 0; j < n; ++j) {
    distances[static_cast<std::size_t>(j)] =
        geometry.distance_km(origin_node, j);
  }
  return rewards_from_distances(distances);
}

}  // namespace picard::fo
