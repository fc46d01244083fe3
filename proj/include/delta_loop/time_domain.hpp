#pragma once

/// Fixed-step RK4 integration of the delta loop KVL
///
///   L' dI/dt = -(R I + sum_w bemf_w),
///
/// carried out in the position domain, dI/dtheta = (dI/dt) / omega_e, so every
/// step lands on the uniform theta grid used for spectral analysis. Serves as an
/// independent check on the closed-form loop solution: the forcing comes from
/// summing the per-winding BEMFs and the torque from the per-winding flux
/// derivatives, not from the loop closed forms.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "delta_loop/errors.hpp"
#include "delta_loop/loop_analytics.hpp"
#include "delta_loop/machine.hpp"
#include "delta_loop/waveform.hpp"

namespace delta_loop {

template <typename Scalar = double>
struct SimSpec {
  int steps_per_cycle = 2048;
  int settle_cycles = 5;  ///< cycles discarded before the reported one
  Scalar initial_current = Scalar(0);
  Scalar convergence_tolerance = Scalar(1e-6);  ///< on the last-two-cycle relative RMS change
};

template <typename Scalar = double>
struct SteadyStateResult {
  Waveform<Scalar> current;
  Waveform<Scalar> torque;
  Scalar residual_settle = Scalar(0);
  bool converged = false;
};

/// Transient cycles covering at least 20 loop time constants L'/R, never fewer than 5.
template <typename Scalar>
int settle_cycles_default(const MachineParams<Scalar>& params, Scalar omega_e) {
  using std::ceil;
  if (!(params.resistance() > Scalar(0)))
    throw DegenerateOperatingPoint("R = 0: loop transient never decays; supply an exact initial current");
  detail::check_speed(omega_e);
  const Scalar tau = params.loop_inductance() / params.resistance();
  const Scalar period = Scalar(2) * std::numbers::pi_v<Scalar> / omega_e;
  const Scalar cycles = ceil(Scalar(20) * tau / period);
  return cycles < Scalar(5) ? 5 : static_cast<int>(cycles);
}

template <typename Scalar>
SteadyStateResult<Scalar> integrate_loop(const MachineParams<Scalar>& params, Scalar omega_e,
                                         const SimSpec<Scalar>& spec) {
  detail::require_delta(params, "integrate_loop");
  detail::check_speed(omega_e);
  if (omega_e == Scalar(0)) throw DegenerateOperatingPoint("omega_e = 0: no periodic cycle to integrate");
  if (spec.settle_cycles < 1) throw ArgumentError("settle_cycles must be >= 1");
  const auto orders = circulating_orders(params);
  const int top = orders.empty() ? 1 : orders.back();
  if (spec.steps_per_cycle < 8 * top)
    throw ArgumentError("steps_per_cycle " + std::to_string(spec.steps_per_cycle) + " below 8 x max circulating order " +
                        std::to_string(top));

  const int steps = spec.steps_per_cycle;
  const int n = params.phases();
  const Scalar dtheta = Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(steps);

  // Loop BEMF at the half-step grid theta_j = j dtheta / 2, j = 0..2*steps-1.
  std::vector<Scalar> forcing(static_cast<std::size_t>(2 * steps));
  for (int j = 0; j < 2 * steps; ++j) {
    const OperatingPoint<Scalar> op{omega_e, Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(j) / Scalar(2 * steps)};
    Scalar sum(0);
    for (int w = 0; w < n; ++w) sum += bemf_winding(params, w, op);
    forcing[static_cast<std::size_t>(j)] = sum;
  }
  const Scalar rate = Scalar(1) / (omega_e * params.loop_inductance());
  const Scalar R = params.resistance();
  auto slope = [&](int half_index, Scalar current) {
    return -(R * current + forcing[static_cast<std::size_t>(half_index % (2 * steps))]) * rate;
  };

  typename Waveform<Scalar>::Samples previous(steps), last(steps);
  Scalar current = spec.initial_current;
  for (int cycle = 0; cycle <= spec.settle_cycles; ++cycle) {
    previous.swap(last);
    for (int k = 0; k < steps; ++k) {
      last(k) = current;
      const Scalar k1 = slope(2 * k, current);
      const Scalar k2 = slope(2 * k + 1, current + Scalar(0.5) * dtheta * k1);
      const Scalar k3 = slope(2 * k + 1, current + Scalar(0.5) * dtheta * k2);
      const Scalar k4 = slope(2 * k + 2, current + dtheta * k3);
      current += dtheta / Scalar(6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
    }
  }

  const Scalar scale = std::sqrt(last.squaredNorm() / Scalar(steps));
  const Scalar change = std::sqrt((last - previous).squaredNorm() / Scalar(steps));
  const Scalar residual = scale > Scalar(0) ? change / scale : change;

  Waveform<Scalar> current_wave(last, Unit::Ampere);
  const Scalar p = Scalar(params.pole_pairs());
  typename Waveform<Scalar>::Samples torque(steps);
  for (int k = 0; k < steps; ++k) {
    const Scalar theta = current_wave.theta(k);
    Scalar dflux(0);
    for (int w = 0; w < n; ++w) dflux += flux_derivative_winding(params, w, theta);
    torque(k) = p * last(k) * dflux;
  }
  return {std::move(current_wave), Waveform<Scalar>(std::move(torque), Unit::NewtonMeter), residual,
          residual <= spec.convergence_tolerance};
}

/// SimSpec with the default settle length, or, for R = 0, one settle cycle started
/// from the exact steady-state current at theta = 0.
template <typename Scalar>
SimSpec<Scalar> default_sim_spec(const MachineParams<Scalar>& params, Scalar omega_e, int steps_per_cycle = 2048) {
  SimSpec<Scalar> spec;
  spec.steps_per_cycle = steps_per_cycle;
  if (params.resistance() > Scalar(0)) {
    spec.settle_cycles = settle_cycles_default(params, omega_e);
  } else {
    spec.settle_cycles = 1;
    for (const auto& phasor : circulating_current_phasors(params, omega_e)) spec.initial_current += phasor.at(Scalar(0));
  }
  return spec;
}

}  // namespace delta_loop
