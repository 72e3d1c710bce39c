#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "picard/engine.hpp"

namespace picard::linear {

// Time-varying linear system s_{t+1} = A_t s_t + B_t a_t + w_t with the
// linear feedback policy a_t = G s_t. The contraction factor is
// max_t ||A_t + B_t G||_2 (spectral norm); values below 1 make the
// closed-loop map a contraction.
struct LinearSystemSpec {
  std::int32_t state_dim = 0;  // n
  std::int32_t input_dim = 0;  // p
  std::int64_t horizon = 0;    // T
  std::vector<std::vector<double>> dynamics;      // A_t, row-major n x n
  std::vector<std::vector<double>> input;         // B_t, row-major n x p
  std::vector<double> gain;                       // G, row-major p x n
  std::vector<std::vector<double>> disturbances;  // w_t, length n
  double contraction = 0.0;

  [[nodiscard]] bool contractive() const { return contraction < 1.0; }
  void validate() const;
};

// One step's disturbance record; carries its index because the dynamics are
// time-varying.
struct LinearStep {
  std::int32_t t = 0;
  std::vector<double> w;
};

double spectral_norm(std::span<const double> matrix, std::int32_t rows,
                     std::int32_t cols);

// Recomputes max_t ||A_t + B_t G||_2 for a spec.
double closed_loop_contraction(const LinearSystemSpec& spec);

class LinearEnv {
 public:
  using State = std::vector<double>;
  using Action = std::vector<double>;
  using Disturbance = LinearStep;
  using Local = std::vector<double>;

  explicit LinearEnv(const LinearSystemSpec& spec) : spec_(&spec) {
    spec.validate();
  }

  [[nodiscard]] State initial_state() const {
    return State(static_cast<std::size_t>(spec_->state_dim), 0.0);
  }
  [[nodiscard]] Action null_action() const {
    return Action(static_cast<std::size_t>(spec_->input_dim), 0.0);
  }
  // Relative tolerance 1e-9: the fixed point is detected up to floating
  // noise rather than requiring bit equality of real-valued actions.
  [[nodiscard]] bool actions_equal(const Action& a, const Action& b) const {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
      if (std::abs(a[i] - b[i]) > 1e-9 * scale) return false;
    }
    return true;
  }

  [[nodiscard]] bool feasible(const State&, const Disturbance&,
                              const Action&) const {
    return true;  // unconstrained action space
  }
  void apply(State& state, const Action& action, const Disturbance& w) const {
    step(state, action, w);
  }

  [[nodiscard]] Local make_local() const { return initial_state(); }
  void reset_local(Local& local, const State& base) const { local = base; }
  [[nodiscard]] bool feasible_local(const Local&, const Disturbance&,
                                    const Action&) const {
    return true;
  }
  void apply_local(Local& local, const Action& action,
                   const Disturbance& w) const {
    step(local, action, w);
  }
  [[nodiscard]] State snapshot(const Local& local) const { return local; }

  [[nodiscard]] const LinearSystemSpec& spec() const { return *spec_; }

 private:
  void step(std::vector<double>& state, const Action& action,
            const LinearStep& w) const;

  const LinearSystemSpec* spec_;
};

static_assert(Environment<LinearEnv>);

// The linear feedback policy a = G s, treated as the expensive call.
class GainPolicy {
 public:
  static constexpr EvalCost cost_class = EvalCost::expensive;

  explicit GainPolicy(const LinearSystemSpec& spec) : spec_(&spec) {}

  [[nodiscard]] std::vector<double> evaluate(const std::vector<double>& state,
                                             const LinearStep&) const {
    const auto n = static_cast<std::size_t>(spec_->state_dim);
    const auto p = static_cast<std::size_t>(spec_->input_dim);
    std::vector<double> action(p, 0.0);
    for (std::size_t r = 0; r < p; ++r) {
      double acc = 0.0;
      const double* row = spec_->gain.data() + r * n;
      for (std::size_t c = 0; c < n; ++c) acc += row[c] * state[c];
      action[r] = acc;
    }
    return action;
  }

 private:
  const LinearSystemSpec* spec_;
};

// Builds the per-step disturbance records the engine consumes.
std::vector<LinearStep> make_steps(const LinearSystemSpec& spec);

// Seeded random spec scaled so the closed-loop contraction factor equals
// `rho` exactly. `state_coupling` sets ||A_t|| as a fraction of rho; zero
// routes the entire closed-loop map through the policy term B_t G, which is
// the regime where cache errors decay at exactly rho per iteration.
LinearSystemSpec make_contractive_spec(std::int32_t state_dim,
                                       std::int32_t input_dim,
                                       std::int64_t horizon, double rho,
                                       std::uint64_t seed,
                                       double state_coupling = 0.0);

// Trajectory induced by replaying a fixed action sequence from the origin.
std::vector<std::vector<double>> rollout_states(
    const LinearSystemSpec& spec, std::span<const std::vector<double>> actions);

// Trajectory-distance metric: sum_t ||ref_t - cand_t|| / sum_t ||ref_t||,
// or, when a baseline ("draft") trajectory is supplied, normalized by
// sum_t ||ref_t - baseline_t|| instead.
double relative_rmse(std::span<const std::vector<double>> candidate,
                     std::span<const std::vector<double>> reference);
double relative_rmse(std::span<const std::vector<double>> candidate,
                     std::span<const std::vector<double>> reference,
                     std::span<const std::vector<double>> baseline);

enum class RmseNormalization { reference, draft };

struct ConvergenceCurveOptions {
  RmseNormalization normalization = RmseNormalization::draft;
  double tolerance = 1e-3;
  std::int64_t max_iterations = 0;  // 0 = horizon
};

// Runs single-step partitions (M = T) and records the relative RMSE of the
// cache-induced state trajectory after every iteration, stopping once it
// falls below the tolerance or after max_iterations. The initial cache may
// be empty (= all-zero actions) or a draft action sequence such as the
// previous policy iterate's rollout.
std::vector<double> picard_convergence_curve(
    const LinearSystemSpec& spec,
    std::span<const std::vector<double>> initial_cache = {},
    const ConvergenceCurveOptions& options = {});

// Manifest + CSV serialization mirroring the instance file scheme; doubles
// are written with round-trip precision.
void save_linear_spec(const LinearSystemSpec& spec,
                      const std::filesystem::path& directory);
LinearSystemSpec load_linear_spec(const std::filesystem::path& directory);

}  // namespace picard::linear
