#pragma once

/// Closed-form steady state of the delta loop.
///
/// Only spectrum orders h that are multiples of n add up around the loop; each
/// drives the loop with n h omega lambda_h sin(h theta). R and L' = L - 2M are
/// the loop resistance and inductance, so the order-h loop current is
///
///   I_h(theta) = -A_h sin(h theta - phi_h),
///   A_h   = n h omega lambda_h / |Z_h|,  |Z_h| = hypot(R, h omega L'),
///   phi_h = atan2(h omega L', R).
///
/// Torque follows from virtual work with constant currents and linear
/// magnetics: T(theta) = p I_c(theta) sum_w dflux_w/dtheta. For one order this
/// expands to
///
///   T = -(p n^2 h^2 omega lambda^2 / (2 |Z|)) (cos phi - cos(2 h theta - phi)),
///
/// a DC drag plus a ripple at order 2h.

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "delta_loop/errors.hpp"
#include "delta_loop/machine.hpp"
#include "delta_loop/spectral.hpp"
#include "delta_loop/waveform.hpp"

namespace delta_loop {

/// Orders present in the spectrum that are multiples of n, ascending.
/// Empty for star machines, which have no loop.
template <typename Scalar>
std::vector<int> circulating_orders(const MachineParams<Scalar>& params) {
  std::vector<int> orders;
  if (params.config() == WindingConfig::Star) return orders;
  for (const auto& harmonic : params.spectrum())
    if (harmonic.order % params.phases() == 0) orders.push_back(harmonic.order);
  return orders;
}

template <typename Scalar>
bool is_circulating_order(const MachineParams<Scalar>& params, int order) {
  const auto orders = circulating_orders(params);
  return std::find(orders.begin(), orders.end(), order) != orders.end();
}

namespace detail {

template <typename Scalar>
void require_delta(const MachineParams<Scalar>& params, const char* what) {
  if (params.config() != WindingConfig::Delta)
    throw ConfigurationError(std::string(what) + " requires a delta-connected machine");
}

template <typename Scalar>
void require_circulating(const MachineParams<Scalar>& params, int order) {
  if (!is_circulating_order(params, order))
    throw ArgumentError("order " + std::to_string(order) + " is not a circulating order of this machine");
}

/// Sum over windings of dflux/dtheta, written in closed form.
template <typename Scalar>
Scalar loop_flux_derivative(const MachineParams<Scalar>& params, Scalar theta_e) {
  using std::sin;
  const Scalar n = Scalar(params.phases());
  Scalar total(0);
  for (int h : circulating_orders(params))
    total += n * Scalar(h) * params.magnitude(h) * sin(Scalar(h) * theta_e);
  return total;
}

}  // namespace detail

/// Loop sum of winding BEMFs: sum over circulating orders of n h omega lambda_h sin(h theta).
template <typename Scalar>
Scalar loop_bemf_sum(const MachineParams<Scalar>& params, const OperatingPoint<Scalar>& op) {
  detail::require_delta(params, "loop_bemf_sum");
  detail::check_speed(op.omega_e);
  return op.omega_e * detail::loop_flux_derivative(params, op.theta_e);
}

template <typename Scalar = double>
struct CurrentPhasor {
  int order = 0;
  Scalar amplitude = Scalar(0);
  Scalar phase_lag = Scalar(0);

  /// -amplitude * sin(order * theta - phase_lag)
  Scalar at(Scalar theta_e) const {
    using std::sin;
    return -amplitude * sin(Scalar(order) * theta_e - phase_lag);
  }
};

template <typename Scalar>
CurrentPhasor<Scalar> circulating_current_phasor(const MachineParams<Scalar>& params, Scalar omega_e, int order) {
  using std::atan2;
  using std::hypot;
  detail::require_circulating(params, order);
  detail::check_speed(omega_e);
  const Scalar R = params.resistance();
  if (R == Scalar(0) && omega_e == Scalar(0))
    throw DegenerateOperatingPoint("R = 0 and omega_e = 0: loop current undefined");
  const Scalar h = Scalar(order);
  const Scalar reactance = h * omega_e * params.loop_inductance();
  const Scalar drive = Scalar(params.phases()) * h * omega_e * params.magnitude(order);
  return {order, drive / hypot(R, reactance), atan2(reactance, R)};
}

/// Phasors for every circulating order, ascending.
template <typename Scalar>
std::vector<CurrentPhasor<Scalar>> circulating_current_phasors(const MachineParams<Scalar>& params, Scalar omega_e) {
  std::vector<CurrentPhasor<Scalar>> phasors;
  for (int h : circulating_orders(params)) phasors.push_back(circulating_current_phasor(params, omega_e, h));
  return phasors;
}

/// Smallest power of two >= 64 that resolves order 2h of the highest circulating order
/// with margin.
template <typename Scalar>
Eigen::Index default_samples(const MachineParams<Scalar>& params) {
  const auto orders = circulating_orders(params);
  const unsigned top = orders.empty() ? 1u : static_cast<unsigned>(orders.back());
  return static_cast<Eigen::Index>(std::bit_ceil(std::max(64u, 16u * top)));
}

/// Superposed steady-state loop current; all zeros for star machines.
template <typename Scalar>
Waveform<Scalar> circulating_current_waveform(const MachineParams<Scalar>& params, Scalar omega_e,
                                              Eigen::Index samples) {
  if (params.config() == WindingConfig::Star) {
    detail::check_speed(omega_e);
    return Waveform<Scalar>::zeros(samples, Unit::Ampere);
  }
  const auto phasors = circulating_current_phasors(params, omega_e);
  return Waveform<Scalar>::sample(samples, Unit::Ampere, [&](Scalar theta) {
    Scalar total(0);
    for (const auto& phasor : phasors) total += phasor.at(theta);
    return total;
  });
}

/// T(theta) = p * I_c(theta) * sum_w dflux_w/dtheta. Zero for star machines.
template <typename Scalar>
Waveform<Scalar> torque_waveform(const MachineParams<Scalar>& params, Scalar omega_e, Eigen::Index samples) {
  const auto current = circulating_current_waveform(params, omega_e, samples);
  if (params.config() == WindingConfig::Star) return Waveform<Scalar>::zeros(samples, Unit::NewtonMeter);
  const Scalar p = Scalar(params.pole_pairs());
  typename Waveform<Scalar>::Samples torque(samples);
  for (Eigen::Index k = 0; k < samples; ++k)
    torque(k) = p * current[k] * detail::loop_flux_derivative(params, current.theta(k));
  return Waveform<Scalar>(std::move(torque), Unit::NewtonMeter);
}

template <typename Scalar = double>
struct RippleComponent {
  int order = 0;  ///< 2h
  Scalar amplitude = Scalar(0);
  Scalar phase = Scalar(0);  ///< spectral convention: amplitude * sin(order theta + phase)
};

template <typename Scalar = double>
struct TorqueSummary {
  Scalar dc = Scalar(0);
  /// One entry per circulating order h, at order 2h.
  std::vector<RippleComponent<Scalar>> ripple;
};

/// Mean torque and the order-2h content for each circulating order h, from the
/// spectral decomposition of `torque_waveform`.
template <typename Scalar>
TorqueSummary<Scalar> torque_summary(const MachineParams<Scalar>& params, Scalar omega_e, Eigen::Index samples = 0) {
  if (samples == 0) samples = default_samples(params);
  const auto orders = circulating_orders(params);
  const auto torque = torque_waveform(params, omega_e, samples);
  const int m_max = orders.empty() ? 0 : 2 * orders.back();
  const auto spectrum = decompose(torque, m_max);
  TorqueSummary<Scalar> out;
  out.dc = spectrum.dc;
  for (int h : orders) {
    const auto component = spectrum.at(2 * h);
    out.ripple.push_back({2 * h, component.magnitude, component.phase});
  }
  return out;
}

/// Expanded closed form of the torque produced by a single circulating order.
template <typename Scalar = double>
struct SingleOrderTorque {
  int ripple_order = 0;
  Scalar dc = Scalar(0);
  Scalar ripple_amplitude = Scalar(0);
  Scalar ripple_phase = Scalar(0);

  Scalar at(Scalar theta_e) const {
    using std::sin;
    return dc + ripple_amplitude * sin(Scalar(ripple_order) * theta_e + ripple_phase);
  }
};

/// Torque of order h acting alone:
/// dc = -K cos(phi), ripple K cos(2h theta - phi) = K sin(2h theta + pi/2 - phi),
/// K = p n^2 h^2 omega lambda^2 / (2 |Z|).
template <typename Scalar>
SingleOrderTorque<Scalar> single_order_torque(const MachineParams<Scalar>& params, Scalar omega_e, int order) {
  using std::cos;
  using std::hypot;
  const auto phasor = circulating_current_phasor(params, omega_e, order);
  const Scalar h = Scalar(order);
  const Scalar n = Scalar(params.phases());
  const Scalar lambda = params.magnitude(order);
  const Scalar impedance = hypot(params.resistance(), h * omega_e * params.loop_inductance());
  const Scalar k = Scalar(params.pole_pairs()) * n * n * h * h * omega_e * lambda * lambda / (Scalar(2) * impedance);
  return {2 * order, -k * cos(phasor.phase_lag), k, std::numbers::pi_v<Scalar> / Scalar(2) - phasor.phase_lag};
}

/// n lambda_h / L', the loop current amplitude as omega -> infinity.
template <typename Scalar>
Scalar high_speed_current_limit(const MachineParams<Scalar>& params, int order) {
  detail::require_circulating(params, order);
  return Scalar(params.phases()) * params.magnitude(order) / params.loop_inductance();
}

/// p n^2 h lambda_h^2 / (2 L'), the order-2h ripple amplitude as omega -> infinity.
template <typename Scalar>
Scalar high_speed_ripple_limit(const MachineParams<Scalar>& params, int order) {
  detail::require_circulating(params, order);
  const Scalar n = Scalar(params.phases());
  const Scalar lambda = params.magnitude(order);
  return Scalar(params.pole_pairs()) * n * n * Scalar(order) * lambda * lambda /
         (Scalar(2) * params.loop_inductance());
}

/// Speed R / (h L') at which the order-h DC drag peaks.
template <typename Scalar>
Scalar dc_peak_speed(const MachineParams<Scalar>& params, int order) {
  detail::require_circulating(params, order);
  return params.resistance() / (Scalar(order) * params.loop_inductance());
}

/// Speed at which h omega L' / R equals `ratio`. Requires R > 0.
template <typename Scalar>
Scalar speed_for_reactance_ratio(const MachineParams<Scalar>& params, int order, Scalar ratio) {
  return ratio * params.resistance() / (Scalar(order) * params.loop_inductance());
}

}  // namespace delta_loop
