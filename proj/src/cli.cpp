#include "picard/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "picard/engine.hpp"
#include "picard/fo/instance.hpp"
#include "picard/fo/policies.hpp"
#include "picard/fo/timewarp.hpp"
#include "picard/linear.hpp"
#include "picard/theory.hpp"

namespace picard::cli {

namespace {

namespace fs = std::filesystem;

std::string format_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count();
}

// ---------------------------------------------------------------------------
// Options
// ---------------------------------------------------------------------------

struct CommonOptions {
  std::int32_t nodes = 30;
  std::int32_t products = 10000;
  std::int64_t horizon = 30000;
  double beta = 0.0;
  double coverage = 0.8;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string instance_dir;
  std::string algo = "picard";
  std::string partition = "product";
  std::string policy = "greedy";
  double gamma = 0.0;
  std::uint64_t theta_seed = 0;
  std::string theta_file;
  std::vector<std::int32_t> batch_sizes{256};
  std::int64_t max_steps = -1;  // -1 = default 300 * M
  std::int64_t max_iterations = 0;
  std::int32_t threads = 1;
  std::int32_t seeds = 1;
  bool no_oracle = false;
  bool trace = false;
  // sweep and linear-mode parameters
  std::vector<double> betas{0.0, -0.2, -0.4, -0.6, -0.8, -1.0};
  std::vector<double> gammas{0.0, 0.5, 1.0};
  std::vector<double> rhos{0.3, 0.6, 0.9};
  std::int32_t linear_state_dim = 4;
  std::int32_t linear_input_dim = 4;
  std::int64_t linear_horizon = 200;
  std::string rmse_norm = "draft";
};

// ---------------------------------------------------------------------------
// Result rows
// ---------------------------------------------------------------------------

const char* kCsvHeader =
    "seed,M,beta,gamma,partitioning,iterations_to_correct,"
    "iterations_to_converged,conflicts,eval_proxy,oracle_equal,wall_time_ms,"
    "algo,policy,J,I,T,max_steps,sync_rounds,rollbacks";

struct RunRow {
  std::uint64_t seed = 0;
  std::int32_t processes = 1;
  double beta = 0.0;
  double gamma = 0.0;
  std::string partitioning;
  std::optional<std::int64_t> iterations_to_correct;
  std::optional<std::int64_t> iterations_to_converged;
  std::optional<std::int64_t> conflicts;
  std::optional<double> eval_proxy;
  std::optional<bool> oracle_equal;
  double wall_time_ms = 0.0;
  std::string algo;
  std::string policy;
  std::int32_t nodes = 0;
  std::int32_t products = 0;
  std::int64_t horizon = 0;
  std::int64_t max_steps = 0;
  std::optional<std::int64_t> sync_rounds;
  std::optional<std::int64_t> rollbacks;

  [[nodiscard]] std::string to_csv() const {
    auto opt_int = [](const std::optional<std::int64_t>& v) {
      return v ? std::to_string(*v) : std::string();
    };
    std::string row;
    row += std::to_string(seed);
    row += ',' + std::to_string(processes);
    row += ',' + format_fixed(beta, 4);
    row += ',' + format_fixed(gamma, 4);
    row += ',' + partitioning;
    row += ',' + opt_int(iterations_to_correct);
    row += ',' + opt_int(iterations_to_converged);
    row += ',' + opt_int(conflicts);
    row += ',' + (eval_proxy ? format_fixed(*eval_proxy, 6) : std::string());
    row += ',' + (oracle_equal ? std::string(*oracle_equal ? "true" : "false")
                               : std::string());
    row += ',' + format_fixed(wall_time_ms, 3);
    row += ',' + algo;
    row += ',' + policy;
    row += ',' + std::to_string(nodes);
    row += ',' + std::to_string(products);
    row += ',' + std::to_string(horizon);
    row += ',' + std::to_string(max_steps);
    row += ',' + opt_int(sync_rounds);
    row += ',' + opt_int(rollbacks);
    return row;
  }
};

class ResultsWriter {
 public:
  explicit ResultsWriter(const fs::path& directory) : directory_(directory) {
    fs::create_directories(directory);
    csv_.open(directory / "results.csv");
    csv_ << kCsvHeader << "\n";
  }

  void add(const RunRow& row) {
    csv_ << row.to_csv() << "\n";
    rows_.push_back(row);
  }

  void finish(const std::string& mode, nlohmann::json extras = {}) {
    csv_.close();
    nlohmann::json summary;
    summary["mode"] = mode;
    summary["rows"] = rows_.size();
    bool all_equal = true;
    bool any_comparison = false;
    for (const auto& row : rows_) {
      if (row.oracle_equal) {
        any_comparison = true;
        all_equal = all_equal && *row.oracle_equal;
      }
    }
    if (any_comparison) summary["all_oracle_equal"] = all_equal;
    summary["results_csv"] = (directory_ / "results.csv").string();
    for (auto& [key, value] : extras.items()) summary[key] = value;
    std::ofstream out(directory_ / "summary.json");
    out << summary.dump(2) << "\n";
  }

  [[nodiscard]] const std::vector<RunRow>& rows() const { return rows_; }

 private:
  fs::path directory_;
  std::ofstream csv_;
  std::vector<RunRow> rows_;
};

// ---------------------------------------------------------------------------
// Simulation drivers
// ---------------------------------------------------------------------------

struct OracleMismatch : ContractViolation {
  using ContractViolation::ContractViolation;
};

fo::Instance obtain_instance(const CommonOptions& opt, double beta,
                             std::uint64_t seed) {
  if (!opt.instance_dir.empty()) {
    return fo::load_instance(opt.instance_dir);
  }
  return fo::generate_instance(opt.nodes, opt.products, opt.horizon, beta,
                               opt.coverage, seed);
}

PartitionPlan make_plan(const fo::Instance& instance,
                        const std::string& partitioning,
                        std::int32_t processes, std::uint64_t seed) {
  if (partitioning == "product") {
    return fo::make_product_partition(instance, processes, seed);
  }
  if (partitioning == "uniform") {
    return make_uniform_time_partition(instance.horizon, processes, seed);
  }
  throw CLI::ValidationError("--partition must be product or uniform");
}

// Drives one (instance, policy, algorithm) run and fills a result row.
template <typename P>
RunRow run_one(const CommonOptions& opt, const fo::Instance& instance,
               const P& policy, const std::string& policy_name,
               const std::string& algo, const std::string& partitioning,
               std::int32_t processes, std::uint64_t seed,
               const fs::path& out_dir) {
  RunRow row;
  row.seed = seed;
  row.processes = processes;
  row.beta = instance.meta.beta;
  row.gamma = opt.gamma;
  row.partitioning = partitioning;
  row.algo = algo;
  row.policy = policy_name;
  row.nodes = instance.nodes;
  row.products = instance.products;
  row.horizon = instance.horizon;
  row.max_steps = opt.max_steps >= 0
                      ? opt.max_steps
                      : 300 * static_cast<std::int64_t>(processes);

  const auto env = instance.make_env();
  const std::span<const fo::Order> orders(instance.orders);

  std::vector<fo::FoAction> oracle_actions;
  if (!opt.no_oracle || algo == "sequential") {
    oracle_actions = sequential_simulate(env, policy, orders).actions;
  }

  const auto start = std::chrono::steady_clock::now();
  if (algo == "sequential") {
    row.wall_time_ms = elapsed_ms(start);
    row.eval_proxy = 1.0;
    row.oracle_equal = true;
    return row;
  }

  if (algo == "picard") {
    const auto plan = make_plan(instance, partitioning, processes, seed);
    PicardConfig config;
    config.max_steps = row.max_steps;
    config.max_iterations = opt.max_iterations;
    config.threads = opt.threads;
    config.record_trace = opt.trace;
    const auto result = picard_simulate(
        env, policy, orders, plan, config, {},
        std::span<const fo::FoAction>(oracle_actions));
    row.wall_time_ms = elapsed_ms(start);
    row.iterations_to_correct = result.iterations_to_correct;
    row.iterations_to_converged = result.iterations_to_converged;
    row.conflicts = result.conflicts;
    row.eval_proxy = theory::evaluation_speedup_proxy(result, instance.horizon);
    if (!opt.no_oracle) {
      const auto cmp = compare_to_oracle(
          env, std::span<const fo::FoAction>(result.actions),
          std::span<const fo::FoAction>(oracle_actions));
      row.oracle_equal = cmp.equal;
      if (!cmp.equal) {
        throw OracleMismatch("oracle mismatch at t=" +
                                 std::to_string(*cmp.first_mismatch),
                             *cmp.first_mismatch);
      }
    }
    if (opt.trace) {
      std::ofstream out(out_dir / "trace.csv");
      out << "chunk,iteration,changed_slots,max_process_evals,t_reset\n";
      for (const auto& r : result.trace) {
        out << r.chunk << ',' << r.iteration << ',' << r.changed_slots << ','
            << r.max_process_evals << ',' << r.t_reset << "\n";
      }
    }
    return row;
  }

  if (algo == "timewarp") {
    if (partitioning != "product") {
      throw CLI::ValidationError("timewarp requires --partition product");
    }
    const auto result = timewarp::time_warp_simulate(instance, policy,
                                                     processes, seed, opt.trace);
    row.wall_time_ms = elapsed_ms(start);
    row.eval_proxy = theory::evaluation_speedup_proxy(result, instance.horizon);
    row.sync_rounds = result.sync_rounds;
    row.rollbacks = result.rollbacks;
    if (!opt.no_oracle) {
      const auto cmp = compare_to_oracle(
          env, std::span<const fo::FoAction>(result.actions),
          std::span<const fo::FoAction>(oracle_actions));
      row.oracle_equal = cmp.equal;
      if (!cmp.equal) {
        throw OracleMismatch("oracle mismatch at t=" +
                                 std::to_string(*cmp.first_mismatch),
                             *cmp.first_mismatch);
      }
    }
    if (opt.trace) {
      // Core trace row shape plus the extra window_length column; a rolled
      // back window re-decides every slot, which is what changed_slots
      // reports here.
      std::ofstream out(out_dir / "trace.csv");
      out << "chunk,iteration,changed_slots,max_process_evals,t_reset,"
             "window_length\n";
      for (const auto& r : result.trace) {
        out << r.round << ',' << r.round << ','
            << (r.rolled_back ? r.window_length : 0) << ','
            << r.max_process_evals << ',' << r.t_start << ','
            << r.window_length << "\n";
      }
    }
    return row;
  }

  throw CLI::ValidationError("--algo must be sequential, picard or timewarp");
}

// Dispatches on the configured policy kind.
template <typename Fn>
auto with_policy(const CommonOptions& opt, const fo::Instance& instance,
                 Fn&& fn) {
  if (opt.policy == "greedy") {
    return fn(fo::GreedyPolicy{}, "greedy");
  }
  if (opt.policy == "capacity") {
    return fn(fo::CapacityPenalizedPolicy{opt.gamma}, "capacity");
  }
  if (opt.policy == "dual") {
    auto initial = instance.shared_initial();
    if (!opt.theta_file.empty()) {
      return fn(fo::DualNetworkPolicy(fo::MlpParams::load(opt.theta_file),
                                      initial, instance.horizon),
                "dual");
    }
    if (opt.theta_seed == 0) {
      return fn(fo::DualNetworkPolicy::zero(initial, instance.horizon),
                "dual");
    }
    return fn(
        fo::DualNetworkPolicy::seeded(initial, instance.horizon, opt.theta_seed),
        "dual");
  }
  throw CLI::ValidationError("--policy must be greedy, dual or capacity");
}

// ---------------------------------------------------------------------------
// Modes
// ---------------------------------------------------------------------------

int mode_generate(const CommonOptions& opt) {
  const auto instance = fo::generate_instance(
      opt.nodes, opt.products, opt.horizon, opt.beta, opt.coverage, opt.seed);
  fo::save_instance(instance, opt.out_dir);
  std::cout << "wrote instance (J=" << instance.nodes
            << " I=" << instance.products << " T=" << instance.horizon
            << ") to " << opt.out_dir << "\n";
  return 0;
}

int mode_simulate(const CommonOptions& opt) {
  const auto instance = obtain_instance(opt, opt.beta, opt.seed);
  ResultsWriter writer(opt.out_dir);
  with_policy(opt, instance, [&](const auto& policy, const char* name) {
    writer.add(run_one(opt, instance, policy, name, opt.algo, opt.partition,
                       opt.batch_sizes.front(), opt.seed, opt.out_dir));
  });
  writer.finish("simulate");
  return 0;
}

int mode_sweep_batch(const CommonOptions& opt) {
  const auto instance = obtain_instance(opt, opt.beta, opt.seed);
  ResultsWriter writer(opt.out_dir);
  with_policy(opt, instance, [&](const auto& policy, const char* name) {
    for (auto m : opt.batch_sizes) {
      for (std::int32_t s = 0; s < opt.seeds; ++s) {
        writer.add(run_one(opt, instance, policy, name, "picard",
                           opt.partition, m, opt.seed + s, opt.out_dir));
      }
    }
  });
  writer.finish("sweep-batch");
  return 0;
}

int mode_sweep_beta(const CommonOptions& opt) {
  ResultsWriter writer(opt.out_dir);
  for (double beta : opt.betas) {
    for (std::int32_t s = 0; s < opt.seeds; ++s) {
      const auto instance = obtain_instance(opt, beta, opt.seed + s);
      with_policy(opt, instance, [&](const auto& policy, const char* name) {
        for (const char* partitioning : {"product", "uniform"}) {
          writer.add(run_one(opt, instance, policy, name, "picard",
                             partitioning, opt.batch_sizes.front(),
                             opt.seed + s, opt.out_dir));
        }
      });
    }
  }
  writer.finish("sweep-beta");
  return 0;
}

int mode_sweep_gamma(const CommonOptions& opt) {
  ResultsWriter writer(opt.out_dir);
  for (std::int32_t s = 0; s < opt.seeds; ++s) {
    const auto instance = obtain_instance(opt, opt.beta, opt.seed + s);
    for (double gamma : opt.gammas) {
      CommonOptions local = opt;
      local.gamma = gamma;
      const fo::CapacityPenalizedPolicy policy{gamma};
      writer.add(run_one(local, instance, policy, "capacity", "picard",
                         opt.partition, opt.batch_sizes.front(), opt.seed + s,
                         opt.out_dir));
    }
  }
  writer.finish("sweep-gamma");
  return 0;
}

int mode_timewarp_compare(const CommonOptions& opt) {
  ResultsWriter writer(opt.out_dir);
  double picard_proxy = 0.0, timewarp_proxy = 0.0;
  for (std::int32_t s = 0; s < opt.seeds; ++s) {
    const auto instance = obtain_instance(opt, opt.beta, opt.seed + s);
    with_policy(opt, instance, [&](const auto& policy, const char* name) {
      auto picard_row = run_one(opt, instance, policy, name, "picard",
                                "product", opt.batch_sizes.front(),
                                opt.seed + s, opt.out_dir);
      auto warp_row = run_one(opt, instance, policy, name, "timewarp",
                              "product", opt.batch_sizes.front(), opt.seed + s,
                              opt.out_dir);
      picard_proxy += picard_row.eval_proxy.value_or(0.0);
      timewarp_proxy += warp_row.eval_proxy.value_or(0.0);
      writer.add(picard_row);
      writer.add(warp_row);
    });
  }
  nlohmann::json extras;
  extras["picard_mean_eval_proxy"] = picard_proxy / opt.seeds;
  extras["timewarp_mean_eval_proxy"] = timewarp_proxy / opt.seeds;
  if (timewarp_proxy > 0.0) {
    extras["proxy_ratio"] = picard_proxy / timewarp_proxy;
  }
  writer.finish("timewarp-compare", extras);
  return 0;
}

int mode_linear_convergence(const CommonOptions& opt) {
  fs::create_directories(opt.out_dir);
  std::ofstream csv(fs::path(opt.out_dir) / "convergence.csv");
  csv << "rho,seed,iteration,relative_rmse\n";

  linear::ConvergenceCurveOptions curve_options;
  curve_options.normalization = opt.rmse_norm == "reference"
                                    ? linear::RmseNormalization::reference
                                    : linear::RmseNormalization::draft;

  nlohmann::json per_rho = nlohmann::json::array();
  for (double rho : opt.rhos) {
    std::vector<std::int64_t> iterations_to_tolerance;
    for (std::int32_t s = 0; s < opt.seeds; ++s) {
      const auto spec = linear::make_contractive_spec(
          opt.linear_state_dim, opt.linear_input_dim, opt.linear_horizon, rho,
          opt.seed + static_cast<std::uint64_t>(s));
      const auto curve = linear::picard_convergence_curve(spec, {},
                                                          curve_options);
      for (std::size_t k = 0; k < curve.size(); ++k) {
        char value[32];
        std::snprintf(value, sizeof(value), "%.9e", curve[k]);
        csv << format_fixed(rho, 3) << ',' << opt.seed + s << ',' << k + 1
            << ',' << value << "\n";
      }
      iterations_to_tolerance.push_back(
          static_cast<std::int64_t>(curve.size()));
    }
    std::sort(iterations_to_tolerance.begin(), iterations_to_tolerance.end());
    nlohmann::json row;
    row["rho"] = rho;
    row["median_iterations_to_tolerance"] =
        iterations_to_tolerance[iterations_to_tolerance.size() / 2];
    per_rho.push_back(row);
  }
  nlohmann::json summary;
  summary["mode"] = "linear-convergence";
  summary["tolerance"] = curve_options.tolerance;
  summary["normalization"] = opt.rmse_norm;
  summary["per_rho"] = per_rho;
  std::ofstream out(fs::path(opt.out_dir) / "summary.json");
  out << summary.dump(2) << "\n";
  return 0;
}

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--J", opt.nodes, "fulfillment nodes");
  cmd->add_option("--I", opt.products, "products");
  cmd->add_option("--T", opt.horizon, "orders (horizon)");
  cmd->add_option("--beta", opt.beta, "demand exponent (<= 0)");
  cmd->add_option("--coverage", opt.coverage, "servable demand fraction");
  cmd->add_option("--seed", opt.seed, "base seed");
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--instance", opt.instance_dir, "instance directory to load");
  cmd->add_option("--algo", opt.algo, "sequential | picard | timewarp");
  cmd->add_option("--partition", opt.partition, "product | uniform");
  cmd->add_option("--policy", opt.policy, "greedy | dual | capacity");
  cmd->add_option("--gamma", opt.gamma, "capacity-penalty strength");
  cmd->add_option("--theta-seed", opt.theta_seed,
                  "dual-network init seed (0 = zero parameters)");
  cmd->add_option("--theta-file", opt.theta_file,
                  "dual-network parameter file");
  cmd->add_option("--M", opt.batch_sizes, "process counts")->delimiter(',');
  cmd->add_option("--max-steps", opt.max_steps,
                  "window width (-1 = 300*M, 0 = whole horizon)");
  cmd->add_option("--max-iterations", opt.max_iterations,
                  "iteration safety cap (0 = default)");
  cmd->add_option("--threads", opt.threads, "worker threads");
  cmd->add_option("--seeds", opt.seeds, "seed count for sweeps");
  cmd->add_flag("--no-oracle", opt.no_oracle, "skip the oracle comparison");
  cmd->add_flag("--trace", opt.trace, "write per-iteration trace rows");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Parallel-in-time policy simulation"};
  app.require_subcommand(1);

  CommonOptions opt;
  if (const char* env_seed = std::getenv("PICARD_SIM_SEED")) {
    opt.seed = std::strtoull(env_seed, nullptr, 10);
  }
  const bool seed_from_env = std::getenv("PICARD_SIM_SEED") != nullptr;

  auto* generate = app.add_subcommand("generate", "write a synthetic instance");
  auto* simulate = app.add_subcommand("simulate", "run one simulation");
  auto* sweep_batch =
      app.add_subcommand("sweep-batch", "vary the process count");
  auto* sweep_beta =
      app.add_subcommand("sweep-beta", "vary the demand distribution");
  auto* sweep_gamma =
      app.add_subcommand("sweep-gamma", "vary the capacity penalty");
  auto* timewarp_compare = app.add_subcommand(
      "timewarp-compare", "fixed-point engine versus the safe-window baseline");
  auto* linear_convergence = app.add_subcommand(
      "linear-convergence", "convergence curves on contractive linear systems");

  for (auto* cmd : {generate, simulate, sweep_batch, sweep_beta, sweep_gamma,
                    timewarp_compare, linear_convergence}) {
    add_common_flags(cmd, opt);
  }
  sweep_beta->add_option("--betas", opt.betas, "beta values")->delimiter(',');
  sweep_gamma->add_option("--gammas", opt.gammas, "gamma values")
      ->delimiter(',');
  linear_convergence->add_option("--rho", opt.rhos, "contraction factors")
      ->delimiter(',');
  linear_convergence->add_option("--n", opt.linear_state_dim,
                                 "linear state dimension");
  linear_convergence->add_option("--p", opt.linear_input_dim,
                                 "linear input dimension");
  linear_convergence->add_option("--linear-T", opt.linear_horizon,
                                 "linear horizon");
  linear_convergence->add_option("--rmse-norm", opt.rmse_norm,
                                 "draft | reference");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help() << std::flush;
      return 0;
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }
  if (seed_from_env) {
    // PICARD_SIM_SEED wins over --seed.
    opt.seed = std::strtoull(std::getenv("PICARD_SIM_SEED"), nullptr, 10);
  }

  try {
    if (generate->parsed()) return mode_generate(opt);
    if (simulate->parsed()) return mode_simulate(opt);
    if (sweep_batch->parsed()) return mode_sweep_batch(opt);
    if (sweep_beta->parsed()) return mode_sweep_beta(opt);
    if (sweep_gamma->parsed()) return mode_sweep_gamma(opt);
    if (timewarp_compare->parsed()) return mode_timewarp_compare(opt);
    if (linear_convergence->parsed()) return mode_linear_convergence(opt);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return 2;
  } catch (const IterationLimitError& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace picard::cli
