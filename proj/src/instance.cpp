#include "picard/fo/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "picard/rng.hpp"

namespace picard::fo {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::string format_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

}  // namespace

std::vector<std::int64_t> largest_remainder_apportion(
    std::span<const double> weights, std::int64_t total) {
  const std::size_t n = weights.size();
  std::vector<std::int64_t> out(n, 0);
  if (n == 0 || total <= 0) return out;

  double sum = 0.0;
  for (double w : weights) {
    require(w >= 0.0, "apportion weights must be non-negative");
    sum += w;
  }
  require(sum > 0.0, "apportion weights must not all be zero");

  std::vector<double> fraction(n);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = static_cast<double>(total) * weights[i] / sum;
    out[i] = static_cast<std::int64_t>(std::floor(share));
    fraction[i] = share - static_cast<double>(out[i]);
    assigned += out[i];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fraction[a] > fraction[b];
  });
  for (std::int64_t r = total - assigned; r > 0; --r) {
    out[order[static_cast<std::size_t>(total - assigned - r)]] += 1;
  }
  return out;
}

std::vector<std::int64_t> demand_counts(std::int32_t products,
                                        std::int64_t horizon, double beta) {
  require(products >= 1, "product count must be >= 1");
  require(horizon >= 0, "horizon must be non-negative");
  const double exponent = std::abs(beta);
  std::vector<double> weights(static_cast<std::size_t>(products));
  for (std::int32_t i = 0; i < products; ++i) {
    weights[static_cast<std::size_t>(i)] =
        std::pow(static_cast<double>(i + 1), -exponent);
  }
  return largest_remainder_apportion(weights, horizon);
}

Instance generate_instance(std::int32_t nodes, std::int32_t products,
                           std::int64_t horizon, double beta, double coverage,
                           std::uint64_t seed) {
  require(products >= 1, "product count must be >= 1");
  require(horizon >= 1, "horizon must be >= 1");
  require(coverage > 0.0 && coverage <= 1.0, "coverage must be in (0, 1]");
  require(beta <= 0.0 && beta >= -8.0, "beta must be in [-8, 0]");
  const NetworkGeometry geometry = default_geometry(nodes);

  Instance instance;
  instance.nodes = nodes;
  instance.products = products;
  instance.horizon = horizon;
  instance.meta = {beta, coverage, seed};

  const auto counts = demand_counts(products, horizon, beta);
  const auto populations = geometry.population_weights();
  auto gen = rng::make(seed);
  rng::WeightedSampler origin_sampler(populations);

  // One reward vector per origin node; orders share copies of these.
  std::vector<std::vector<double>> node_rewards;
  node_rewards.reserve(static_cast<std::size_t>(nodes));
  for (std::int32_t j = 0; j < nodes; ++j) {
    node_rewards.push_back(reward_vector(j, geometry));
  }

  instance.orders.reserve(static_cast<std::size_t>(horizon));
  for (std::int32_t i = 0; i < products; ++i) {
    for (std::int64_t q = 0; q < counts[static_cast<std::size_t>(i)]; ++q) {
      Order order;
      order.product = i;
      order.origin_node =
          static_cast<std::int32_t>(origin_sampler.sample(gen));
      order.rewards = node_rewards[static_cast<std::size_t>(order.origin_node)];
      instance.orders.push_back(std::move(order));
    }
  }
  rng::shuffle(std::span<Order>(instance.orders), gen);
  for (std::int64_t t = 0; t < horizon; ++t) {
    instance.orders[static_cast<std::size_t>(t)].t =
        static_cast<std::int32_t>(t);
  }

  instance.initial.capacity.reserve(static_cast<std::size_t>(nodes));
  const auto capacity = largest_remainder_apportion(
      populations, std::llround(coverage * static_cast<double>(horizon)));
  for (auto c : capacity) {
    instance.initial.capacity.push_back(static_cast<std::int32_t>(c));
  }
  for (std::int32_t i = 0; i < products; ++i) {
    const std::int64_t units = std::llround(
        coverage * static_cast<double>(counts[static_cast<std::size_t>(i)]));
    if (units <= 0) continue;
    const auto row = largest_remainder_apportion(populations, units);
    auto& stored = instance.initial.inventory[i];
    stored.reserve(row.size());
    for (auto x : row) stored.push_back(static_cast<std::int32_t>(x));
  }
  return instance;
}

PartitionPlan make_product_partition(const Instance& instance,
                                     std::int32_t processes,
                                     std::uint64_t seed) {
  require(processes >= 1, "process count must be >= 1");

  std::vector<std::int64_t> counts(static_cast<std::size_t>(instance.products),
                                   0);
  for (const auto& order : instance.orders) {
    counts[static_cast<std::size_t>(order.product)] += 1;
  }

  // Heaviest product first onto the currently lightest group; the seeded
  // shuffle decides the order among products of equal demand.
  std::vector<std::int32_t> product_order(
      static_cast<std::size_t>(instance.products));
  std::iota(product_order.begin(), product_order.end(), 0);
  auto gen = rng::make(seed);
  rng::shuffle(std::span<std::int32_t>(product_order), gen);
  std::stable_sort(product_order.begin(), product_order.end(),
                   [&](std::int32_t a, std::int32_t b) {
                     return counts[static_cast<std::size_t>(a)] >
                            counts[static_cast<std::size_t>(b)];
                   });

  using Load = std::pair<std::int64_t, std::int32_t>;  // (load, group)
  std::priority_queue<Load, std::vector<Load>, std::greater<>> lightest;
  for (std::int32_t g = 0; g < processes; ++g) lightest.emplace(0, g);

  std::vector<std::int32_t> group_of(
      static_cast<std::size_t>(instance.products), 0);
  for (auto product : product_order) {
    auto [load, group] = lightest.top();
    lightest.pop();
    group_of[static_cast<std::size_t>(product)] = group;
    lightest.emplace(load + counts[static_cast<std::size_t>(product)], group);
  }

  PartitionPlan plan;
  plan.processes = processes;
  plan.owner.reserve(instance.orders.size());
  for (const auto& order : instance.orders) {
    plan.owner.push_back(group_of[static_cast<std::size_t>(order.product)]);
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::uint64_t fnv1a_file_checksum(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::uint64_t hash = 1469598103934665603ull;
  char buffer[1 << 14];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 1099511628211ull;
    }
    if (!in) break;
  }
  return hash;
}

namespace {

std::string hex64(std::uint64_t value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

void save_instance(const Instance& instance,
                   const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);

  {
    std::ofstream out(directory / "orders.csv");
    out << "t,product,origin_node";
    for (std::int32_t j = 0; j < instance.nodes; ++j) out << ",reward_" << j;
    out << "\n";
    for (const auto& order : instance.orders) {
      out << order.t << ',' << order.product << ',' << order.origin_node;
      for (double r : order.rewards) out << ',' << format_fixed(r, 9);
      out << "\n";
    }
  }
  {
    std::ofstream out(directory / "inventory.csv");
    out << "product,node,units\n";
    std::vector<std::int32_t> products;
    products.reserve(instance.initial.inventory.size());
    for (const auto& [product, row] : instance.initial.inventory) {
      products.push_back(product);
    }
    std::sort(products.begin(), products.end());
    for (auto product : products) {
      const auto& row = instance.initial.inventory.at(product);
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] == 0) continue;
        out << product << ',' << j << ',' << row[j] << "\n";
      }
    }
  }
  {
    std::ofstream out(directory / "capacity.csv");
    out << "node,units\n";
    for (std::size_t j = 0; j < instance.initial.capacity.size(); ++j) {
      out << j << ',' << instance.initial.capacity[j] << "\n";
    }
  }

  nlohmann::json manifest;
  manifest["J"] = instance.nodes;
  manifest["I"] = instance.products;
  manifest["T"] = instance.horizon;
  manifest["beta"] = instance.meta.beta;
  manifest["coverage"] = instance.meta.coverage;
  manifest["seed"] = instance.meta.seed;
  manifest["checksums"] = {
      {"orders.csv", hex64(fnv1a_file_checksum(directory / "orders.csv"))},
      {"inventory.csv",
       hex64(fnv1a_file_checksum(directory / "inventory.csv"))},
      {"capacity.csv",
       hex64(fnv1a_file_checksum(directory / "capacity.csv"))},
  };
  std::ofstream out(directory / "manifest.json");
  out << manifest.dump(2) << "\n";
}

Instance load_instance(const std::filesystem::path& directory) {
  std::ifstream manifest_in(directory / "manifest.json");
  if (!manifest_in) {
    throw std::runtime_error("no manifest.json under " + directory.string());
  }
  nlohmann::json manifest = nlohmann::json::parse(manifest_in);

  Instance instance;
  instance.nodes = manifest.at("J").get<std::int32_t>();
  instance.products = manifest.at("I").get<std::int32_t>();
  instance.horizon = manifest.at("T").get<std::int64_t>();
  instance.meta.beta = manifest.at("beta").get<double>();
  instance.meta.coverage = manifest.at("coverage").get<double>();
  instance.meta.seed = manifest.at("seed").get<std::uint64_t>();

  for (const auto& [file, expected] :
       manifest.at("checksums").items()) {
    const auto actual = hex64(fnv1a_file_checksum(directory / file));
    if (actual != expected.get<std::string>()) {
      throw std::runtime_error("checksum mismatch for " + file);
    }
  }

  {
    std::ifstream in(directory / "orders.csv");
    if (!in) throw std::runtime_error("missing orders.csv");
    std::string line;
    std::getline(in, line);  // header
    instance.orders.reserve(static_cast<std::size_t>(instance.horizon));
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      if (fields.size() != static_cast<std::size_t>(3 + instance.nodes)) {
        throw std::runtime_error("malformed orders.csv row: " + line);
      }
      Order order;
      order.t = static_cast<std::int32_t>(std::stol(fields[0]));
      order.product = static_cast<std::int32_t>(std::stol(fields[1]));
      order.origin_node = static_cast<std::int32_t>(std::stol(fields[2]));
      order.rewards.reserve(static_cast<std::size_t>(instance.nodes));
      for (std::int32_t j = 0; j < instance.nodes; ++j) {
        order.rewards.push_back(
            std::strtod(fields[static_cast<std::size_t>(3 + j)].c_str(),
                        nullptr));
      }
      instance.orders.push_back(std::move(order));
    }
    if (static_cast<std::int64_t>(instance.orders.size()) !=
        instance.horizon) {
      throw std::runtime_error("orders.csv row count disagrees with manifest");
    }
    std::sort(instance.orders.begin(), instance.orders.end(),
              [](const Order& a, const Order& b) { return a.t < b.t; });
  }
  {
    std::ifstream in(directory / "inventory.csv");
    if (!in) throw std::runtime_error("missing inventory.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      if (fields.size() != 3) {
        throw std::runtime_error("malformed inventory.csv row: " + line);
      }
      const auto product = static_cast<std::int32_t>(std::stol(fields[0]));
      const auto node = static_cast<std::int32_t>(std::stol(fields[1]));
      const auto units = static_cast<std::int32_t>(std::stol(fields[2]));
      auto& row = instance.initial.inventory[product];
      if (row.empty()) row.resize(static_cast<std::size_t>(instance.nodes), 0);
      row[static_cast<std::size_t>(node)] = units;
    }
  }
  {
    std::ifstream in(directory / "capacity.csv");
    if (!in) throw std::runtime_error("missing capacity.csv");
    std::string line;
    std::getline(in, line);
    instance.initial.capacity.assign(static_cast<std::size_t>(instance.nodes),
                                     0);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      if (fields.size() != 2) {
        throw std::runtime_error("malformed capacity.csv row: " + line);
      }
      const auto node = static_cast<std::int32_t>(std::stol(fields[0]));
      instance.initial.capacity[static_cast<std::size_t>(node)] =
          static_cast<std::int32_t>(std::stol(fields[1]));
    }
  }
  return instance;
}

}  // namespace picard::fo
