#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "delta_loop/experiments.hpp"
#include "delta_loop/machine.hpp"

namespace delta_loop {

enum class CheckStatus { Pass, Fail, Skipped };

const char* to_string(CheckStatus status);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Skipped;
  double measured = 0.0;   ///< worst case over the evaluated points
  double tolerance = 0.0;  ///< pass iff measured < tolerance
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  /// First failing check, or nullptr.
  const CheckResult* first_failure() const;
  nlohmann::json to_json() const;
};

/// Runs the model invariants at every speed of `spec`: loop-sum consistency,
/// harmonic cancellation, phasor/ODE agreement, closed-form torque, asymptotes,
/// Parseval, energy balance and star observability. Checks that need a decaying
/// transient are skipped for R = 0; loop checks are skipped for star machines.
VerificationReport run_verification(const MachineParams<double>& params, const SweepSpec& spec, unsigned threads = 1);

}  // namespace delta_loop
