#include "picard/linear.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "picard/rng.hpp"

namespace picard::linear {

namespace {

void matvec(std::span<const double> matrix, std::span<const double> x,
            std::span<double> out, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = matrix.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

double norm2(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

}  // namespace

void LinearSystemSpec::validate() const {
  const auto n = static_cast<std::size_t>(state_dim);
  const auto p = static_cast<std::size_t>(input_dim);
  if (state_dim < 1 || input_dim < 1 || horizon < 0) {
    throw ContractViolation("linear spec: dimensions must be positive");
  }
  const auto steps = static_cast<std::size_t>(horizon);
  if (dynamics.size() != steps || input.size() != steps ||
      disturbances.size() != steps) {
    throw ContractViolation("linear spec: per-step matrix counts disagree");
  }
  if (gain.size() != p * n) {
    throw ContractViolation("linear spec: gain dimensions disagree");
  }
  for (std::size_t t = 0; t < steps; ++t) {
    if (dynamics[t].size() != n * n || input[t].size() != n * p ||
        disturbances[t].size() != n) {
      throw ContractViolation("linear spec: matrix dimensions disagree at t=" +
                              std::to_string(t));
    }
  }
}

void LinearEnv::step(std::vector<double>& state, const Action& action,
                     const LinearStep& w) const {
  const auto n = static_cast<std::size_t>(spec_->state_dim);
  const auto p = static_cast<std::size_t>(spec_->input_dim);
  const auto t = static_cast<std::size_t>(w.t);
  std::vector<double> next(n, 0.0);
  matvec(spec_->dynamics[t], state, next, n, n);
  std::vector<double> driven(n, 0.0);
  matvec(spec_->input[t], action, driven, n, p);
  for (std::size_t i = 0; i < n; ++i) next[i] += driven[i] + w.w[i];
  state = std::move(next);
}

double spectral_norm(std::span<const double> matrix, std::int32_t rows,
                     std::int32_t cols) {
  const auto r = static_cast<std::size_t>(rows);
  const auto c = static_cast<std::size_t>(cols);
  std::vector<double> v(c, 1.0 / std::sqrt(static_cast<double>(c)));
  std::vector<double> mv(r, 0.0), mtmv(c, 0.0);
  double sigma = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    matvec(matrix, v, mv, r, c);
    const double mv_norm = norm2(mv);
    if (mv_norm < 1e-300) return 0.0;
    // M^T (M v)
    std::fill(mtmv.begin(), mtmv.end(), 0.0);
    for (std::size_t i = 0; i < r; ++i) {
      const double* row = matrix.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) mtmv[j] += row[j] * mv[i];
    }
    const double mtmv_norm = norm2(mtmv);
    if (mtmv_norm < 1e-300) return mv_norm;
    for (std::size_t j = 0; j < c; ++j) v[j] = mtmv[j] / mtmv_norm;
    sigma = mv_norm;
  }
  return sigma;
}

double closed_loop_contraction(const LinearSystemSpec& spec) {
  const auto n = static_cast<std::size_t>(spec.state_dim);
  const auto p = static_cast<std::size_t>(spec.input_dim);
  std::vector<double> closed(n * n, 0.0);
  double worst = 0.0;
  for (std::size_t t = 0; t < spec.dynamics.size(); ++t) {
    // A_t + B_t G
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        double acc = spec.dynamics[t][r * n + c];
        for (std::size_t k = 0; k < p; ++k) {
          acc += spec.input[t][r * p + k] * spec.gain[k * n + c];
        }
        closed[r * n + c] = acc;
      }
    }
    worst = std::max(worst, spectral_norm(closed, spec.state_dim,
                                          spec.state_dim));
  }
  return worst;
}

std::vector<LinearStep> make_steps(const LinearSystemSpec& spec) {
  std::vector<LinearStep> steps;
  steps.reserve(spec.disturbances.size());
  for (std::size_t t = 0; t < spec.disturbances.size(); ++t) {
    steps.push_back({static_cast<std::int32_t>(t), spec.disturbances[t]});
  }
  return steps;
}

LinearSystemSpec make_contractive_spec(std::int32_t state_dim,
                                       std::int32_t input_dim,
                                       std::int64_t horizon, double rho,
                                       std::uint64_t seed,
                                       double state_coupling) {
  if (rho <= 0.0) throw ContractViolation("rho must be positive");
  if (state_coupling < 0.0 || state_coupling >= 1.0) {
    throw ContractViolation("state_coupling must be in [0, 1)");
  }
  const auto n = static_cast<std::size_t>(state_dim);
  const auto p = static_cast<std::size_t>(input_dim);
  auto gen = rng::make(seed);

  LinearSystemSpec spec;
  spec.state_dim = state_dim;
  spec.input_dim = input_dim;
  spec.horizon = horizon;
  spec.gain.resize(p * n);
  for (auto& g : spec.gain) g = rng::range(gen, -1.0, 1.0);

  spec.dynamics.reserve(static_cast<std::size_t>(horizon));
  spec.input.reserve(static_cast<std::size_t>(horizon));
  spec.disturbances.reserve(static_cast<std::size_t>(horizon));
  for (std::int64_t t = 0; t < horizon; ++t) {
    std::vector<double> a(n * n, 0.0);
    if (state_coupling > 0.0) {
      for (auto& v : a) v = rng::range(gen, -1.0, 1.0);
      const double norm = spectral_norm(a, state_dim, state_dim);
      const double target = state_coupling * rho;
      for (auto& v : a) v *= norm > 0.0 ? target / norm : 0.0;
    }
    std::vector<double> b(n * p);
    for (auto& v : b) v = rng::range(gen, -1.0, 1.0);

    // Scale B_t so that ||A_t + B_t G|| equals rho exactly.
    std::vector<double> bg(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          acc += b[r * p + k] * spec.gain[k * n + c];
        }
        bg[r * n + c] = acc;
      }
    }
    const double bg_norm = spectral_norm(bg, state_dim, state_dim);
    if (bg_norm < 1e-12) {
      throw ContractViolation("degenerate random draw: B_t G is zero");
    }
    double scale;
    if (state_coupling == 0.0) {
      scale = rho / bg_norm;
    } else {
      auto closed_norm = [&](double s) {
        std::vector<double> closed(n * n);
        for (std::size_t i = 0; i < n * n; ++i) closed[i] = a[i] + s * bg[i];
        return spectral_norm(closed, state_dim, state_dim);
      };
      double lo = 0.0, hi = (rho + state_coupling * rho + 1.0) / bg_norm;
      while (closed_norm(hi) < rho) hi *= 2.0;
      for (int iter = 0; iter < 120; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (closed_norm(mid) < rho ? lo : hi) = mid;
      }
      scale = 0.5 * (lo + hi);
    }
    for (auto& v : b) v *= scale;

    std::vector<double> w(n);
    for (auto& v : w) v = rng::range(gen, -1.0, 1.0);

    spec.dynamics.push_back(std::move(a));
    spec.input.push_back(std::move(b));
    spec.disturbances.push_back(std::move(w));
  }
  spec.contraction = closed_loop_contraction(spec);
  return spec;
}

std::vector<std::vector<double>> rollout_states(
    const LinearSystemSpec& spec,
    std::span<const std::vector<double>> actions) {
  LinearEnv env(spec);
  const auto steps = make_steps(spec);
  std::vector<std::vector<double>> states;
  states.reserve(actions.size() + 1);
  states.push_back(env.initial_state());
  for (std::size_t t = 0; t < actions.size(); ++t) {
    auto next = states.back();
    env.apply(next, actions[t], steps[t]);
    states.push_back(std::move(next));
  }
  return states;
}

namespace {

double trajectory_gap(std::span<const std::vector<double>> a,
                      std::span<const std::vector<double>> b) {
  double total = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a[t].size(); ++i) {
      const double d = a[t][i] - b[t][i];
      acc += d * d;
    }
    total += std::sqrt(acc);
  }
  return total;
}

}  // namespace

double relative_rmse(std::span<const std::vector<double>> candidate,
                     std::span<const std::vector<double>> reference) {
  if (candidate.size() != reference.size()) {
    throw ContractViolation("relative rmse: trajectory length mismatch");
  }
  double denom = 0.0;
  for (const auto& s : reference) denom += norm2(s);
  if (denom <= 0.0) {
    throw ContractViolation("relative rmse: reference trajectory is zero");
  }
  return trajectory_gap(reference, candidate) / denom;
}

double relative_rmse(std::span<const std::vector<double>> candidate,
                     std::span<const std::vector<double>> reference,
                     std::span<const std::vector<double>> baseline) {
  if (candidate.size() != reference.size() ||
      baseline.size() != reference.size()) {
    throw ContractViolation("relative rmse: trajectory length mismatch");
  }
  const double denom = trajectory_gap(reference, baseline);
  if (denom <= 0.0) {
    throw ContractViolation("relative rmse: baseline equals the reference");
  }
  return trajectory_gap(reference, candidate) / denom;
}

std::vector<double> picard_convergence_curve(
    const LinearSystemSpec& spec,
    std::span<const std::vector<double>> initial_cache,
    const ConvergenceCurveOptions& options) {
  LinearEnv env(spec);
  GainPolicy policy(spec);
  const auto steps = make_steps(spec);
  const std::int64_t horizon = spec.horizon;

  PartitionPlan plan;  // one time-step per process
  plan.processes = static_cast<std::int32_t>(std::max<std::int64_t>(1, horizon));
  plan.owner.resize(static_cast<std::size_t>(horizon));
  for (std::int64_t t = 0; t < horizon; ++t) {
    plan.owner[static_cast<std::size_t>(t)] = static_cast<std::int32_t>(t);
  }

  ActionCache<std::vector<double>> cache;
  if (!initial_cache.empty()) {
    cache.assign(initial_cache.begin(), initial_cache.end());
  } else {
    cache.assign(static_cast<std::size_t>(horizon), env.null_action());
  }

  const auto reference = sequential_simulate_with_states(
      env, policy, std::span<const LinearStep>(steps));
  const auto draft = rollout_states(spec, cache);

  auto score = [&](const std::vector<std::vector<double>>& states) {
    const std::span<const std::vector<double>> cand(states.begin() + 1,
                                                    states.end());
    const std::span<const std::vector<double>> ref(
        reference.states.begin() + 1, reference.states.end());
    if (options.normalization == RmseNormalization::draft) {
      const std::span<const std::vector<double>> base(draft.begin() + 1,
                                                      draft.end());
      return relative_rmse(cand, ref, base);
    }
    return relative_rmse(cand, ref);
  };

  const std::int64_t cap =
      options.max_iterations > 0 ? options.max_iterations : horizon;
  const auto checkpoint = env.initial_state();
  std::vector<double> curve;
  for (std::int64_t k = 1; k <= cap; ++k) {
    picard_iterate_once(env, policy, std::span<const LinearStep>(steps), plan,
                        cache, 0, horizon, checkpoint);
    curve.push_back(score(rollout_states(spec, cache)));
    if (curve.back() <= options.tolerance) break;
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

namespace {

std::string format_exact(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace

void save_linear_spec(const LinearSystemSpec& spec,
                      const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const auto n = static_cast<std::size_t>(spec.state_dim);
  const auto p = static_cast<std::size_t>(spec.input_dim);
  {
    std::ofstream out(directory / "dynamics.csv");
    out << "t,row,col,value\n";
    for (std::size_t t = 0; t < spec.dynamics.size(); ++t) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          out << t << ',' << r << ',' << c << ','
              << format_exact(spec.dynamics[t][r * n + c]) << "\n";
        }
      }
    }
  }
  {
    std::ofstream out(directory / "input.csv");
    out << "t,row,col,value\n";
    for (std::size_t t = 0; t < spec.input.size(); ++t) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
          out << t << ',' << r << ',' << c << ','
              << format_exact(spec.input[t][r * p + c]) << "\n";
        }
      }
    }
  }
  {
    std::ofstream out(directory / "gain.csv");
    out << "row,col,value\n";
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        out << r << ',' << c << ',' << format_exact(spec.gain[r * n + c])
            << "\n";
      }
    }
  }
  {
    std::ofstream out(directory / "disturbance.csv");
    out << "t,row,value\n";
    for (std::size_t t = 0; t < spec.disturbances.size(); ++t) {
      for (std::size_t r = 0; r < n; ++r) {
        out << t << ',' << r << ',' << format_exact(spec.disturbances[t][r])
            << "\n";
      }
    }
  }
  nlohmann::json manifest;
  manifest["n"] = spec.state_dim;
  manifest["p"] = spec.input_dim;
  manifest["T"] = spec.horizon;
  manifest["contraction"] = spec.contraction;
  std::ofstream out(directory / "manifest.json");
  out << manifest.dump(2) << "\n";
}

LinearSystemSpec load_linear_spec(const std::filesystem::path& directory) {
  std::ifstream manifest_in(directory / "manifest.json");
  if (!manifest_in) {
    throw std::runtime_error("no manifest.json under " + directory.string());
  }
  nlohmann::json manifest = nlohmann::json::parse(manifest_in);

  LinearSystemSpec spec;
  spec.state_dim = manifest.at("n").get<std::int32_t>();
  spec.input_dim = manifest.at("p").get<std::int32_t>();
  spec.horizon = manifest.at("T").get<std::int64_t>();
  spec.contraction = manifest.at("contraction").get<double>();

  const auto n = static_cast<std::size_t>(spec.state_dim);
  const auto p = static_cast<std::size_t>(spec.input_dim);
  const auto steps = static_cast<std::size_t>(spec.horizon);
  spec.dynamics.assign(steps, std::vector<double>(n * n, 0.0));
  spec.input.assign(steps, std::vector<double>(n * p, 0.0));
  spec.gain.assign(p * n, 0.0);
  spec.disturbances.assign(steps, std::vector<double>(n, 0.0));

  auto for_each_row = [&](const std::filesystem::path& file, int fields,
                          auto&& sink) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("missing " + file.string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> parts;
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
          parts.push_back(line.substr(start));
          break;
        }
        parts.push_back(line.substr(start, comma - start));
        start = comma + 1;
      }
      if (static_cast<int>(parts.size()) != fields) {
        throw std::runtime_error("malformed row in " + file.string());
      }
      sink(parts);
    }
  };

  for_each_row(directory / "dynamics.csv", 4, [&](const auto& f) {
    spec.dynamics[std::stoul(f[0])][std::stoul(f[1]) * n + std::stoul(f[2])] =
        std::strtod(f[3].c_str(), nullptr);
  });
  for_each_row(directory / "input.csv", 4, [&](const auto& f) {
    spec.input[std::stoul(f[0])][std::stoul(f[1]) * p + std::stoul(f[2])] =
        std::strtod(f[3].c_str(), nullptr);
  });
  for_each_row(directory / "gain.csv", 3, [&](const auto& f) {
    spec.gain[std::stoul(f[0]) * n + std::stoul(f[1])] =
        std::strtod(f[2].c_str(), nullptr);
  });
  for_each_row(directory / "disturbance.csv", 3, [&](const auto& f) {
    spec.disturbances[std::stoul(f[0])][std::stoul(f[1])] =
        std::strtod(f[2].c_str(), nullptr);
  });
  spec.validate();
  return spec;
}

}  // namespace picard::linear
