#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace picard {

// Thrown when an environment or policy breaks its contract (infeasible
// action, malformed plan, non-finite network output, ...).
class ContractViolation : public std::runtime_error {
 public:
  ContractViolation(std::string what, std::int64_t time_step = -1)
      : std::runtime_error(std::move(what)), time_step_(time_step) {}

  [[nodiscard]] std::int64_t time_step() const { return time_step_; }

 private:
  std::int64_t time_step_;
};

}  // namespace picard
