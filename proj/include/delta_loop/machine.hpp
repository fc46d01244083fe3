#pragma once

/// Machine description and per-winding permanent-magnet quantities.
///
/// Winding w (0..n-1, a -> 0, b -> 1, ...) is displaced by w * beta electrical
/// radians, beta = 2 pi / n. For every spectrum entry (h, lambda_h):
///
///   flux(w, theta)  = -lambda_h cos(h (theta - w beta))
///   dflux/dtheta    =  h lambda_h sin(h (theta - w beta))
///   bemf(w, theta)  =  omega_e * dflux/dtheta
///
/// The fundamental is just the order-1 entry of the spectrum.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "delta_loop/errors.hpp"

namespace delta_loop {

enum class WindingConfig { Star, Delta };

inline const char* to_string(WindingConfig config) {
  return config == WindingConfig::Star ? "star" : "delta";
}

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One PM flux-linkage harmonic: electrical order and magnitude in Wb.
template <typename Scalar = double>
struct FluxHarmonic {
  int order = 1;
  Scalar magnitude = Scalar(0);
};

template <typename Scalar = double>
struct OperatingPoint {
  Scalar omega_e = Scalar(0);  ///< electrical speed [rad/s]
  Scalar theta_e = Scalar(0);  ///< electrical position [rad]
};

/// Immutable, validated machine description. All windings share R, L, M.
template <typename Scalar = double>
class MachineParams {
 public:
  struct Fields {
    int phases = 3;
    int pole_pairs = 1;
    Scalar resistance = Scalar(0);         ///< R [ohm]
    Scalar self_inductance = Scalar(0);    ///< L [H]
    Scalar mutual_inductance = Scalar(0);  ///< M [H]
    std::vector<FluxHarmonic<Scalar>> spectrum;
    WindingConfig config = WindingConfig::Delta;
  };

  explicit MachineParams(Fields fields) : f_(std::move(fields)) {
    using std::isfinite;
    if (f_.phases < 3) throw ValidationError("n", "phase count must be >= 3");
    if (f_.pole_pairs < 1) throw ValidationError("p", "pole pairs must be >= 1");
    if (!isfinite(f_.resistance) || f_.resistance < Scalar(0))
      throw ValidationError("R", "resistance must be finite and >= 0");
    if (!isfinite(f_.self_inductance)) throw ValidationError("L", "must be finite");
    if (!isfinite(f_.mutual_inductance)) throw ValidationError("M", "must be finite");
    if (!(loop_inductance() > Scalar(0)))
      throw ValidationError("L-2M", "effective loop inductance L - 2M must be > 0");
    for (const auto& harmonic : f_.spectrum) {
      if (harmonic.order < 1) throw ValidationError("spectrum.order", "order must be >= 1");
      if (!isfinite(harmonic.magnitude) || harmonic.magnitude < Scalar(0))
        throw ValidationError("spectrum.magnitude", "magnitude must be finite and >= 0");
    }
    std::sort(f_.spectrum.begin(), f_.spectrum.end(),
              [](const auto& a, const auto& b) { return a.order < b.order; });
    auto dup = std::adjacent_find(f_.spectrum.begin(), f_.spectrum.end(),
                                  [](const auto& a, const auto& b) { return a.order == b.order; });
    if (dup != f_.spectrum.end())
      throw ValidationError("spectrum.order", "duplicate order " + std::to_string(dup->order));
  }

  int phases() const { return f_.phases; }
  int pole_pairs() const { return f_.pole_pairs; }
  Scalar resistance() const { return f_.resistance; }
  Scalar self_inductance() const { return f_.self_inductance; }
  Scalar mutual_inductance() const { return f_.mutual_inductance; }
  /// L' = L - 2M, the inductance seen by the loop current.
  Scalar loop_inductance() const { return f_.self_inductance - Scalar(2) * f_.mutual_inductance; }
  /// Spectrum sorted by ascending order.
  const std::vector<FluxHarmonic<Scalar>>& spectrum() const { return f_.spectrum; }
  WindingConfig config() const { return f_.config; }
  const Fields& fields() const { return f_; }

  /// beta = 2 pi / n.
  Scalar winding_pitch() const { return Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(f_.phases); }

  int max_order() const { return f_.spectrum.empty() ? 0 : f_.spectrum.back().order; }

  /// Magnitude of order h, zero when absent.
  Scalar magnitude(int order) const {
    for (const auto& harmonic : f_.spectrum)
      if (harmonic.order == order) return harmonic.magnitude;
    return Scalar(0);
  }

  MachineParams with_spectrum(std::vector<FluxHarmonic<Scalar>> spectrum) const {
    Fields copy = f_;
    copy.spectrum = std::move(spectrum);
    return MachineParams(std::move(copy));
  }

  MachineParams with_config(WindingConfig config) const {
    Fields copy = f_;
    copy.config = config;
    return MachineParams(std::move(copy));
  }

 private:
  Fields f_;
};

namespace detail {

template <typename Scalar>
void check_winding(const MachineParams<Scalar>& params, int w) {
  if (w < 0 || w >= params.phases())
    throw ArgumentError("winding index " + std::to_string(w) + " outside 0.." +
                        std::to_string(params.phases() - 1));
}

template <typename Scalar>
void check_speed(Scalar omega_e) {
  using std::isfinite;
  if (!isfinite(omega_e) || omega_e < Scalar(0))
    throw ArgumentError("omega_e must be finite and >= 0");
}

}  // namespace detail

template <typename Scalar>
Scalar flux_linkage_winding(const MachineParams<Scalar>& params, int w, Scalar theta_e) {
  using std::cos;
  detail::check_winding(params, w);
  const Scalar shifted = theta_e - Scalar(w) * params.winding_pitch();
  Scalar total(0);
  for (const auto& [order, magnitude] : params.spectrum()) total -= magnitude * cos(Scalar(order) * shifted);
  return total;
}

/// Analytic d(flux)/d(theta_e) [Wb/rad]; speed independent.
template <typename Scalar>
Scalar flux_derivative_winding(const MachineParams<Scalar>& params, int w, Scalar theta_e) {
  using std::sin;
  detail::check_winding(params, w);
  const Scalar shifted = theta_e - Scalar(w) * params.winding_pitch();
  Scalar total(0);
  for (const auto& [order, magnitude] : params.spectrum())
    total += Scalar(order) * magnitude * sin(Scalar(order) * shifted);
  return total;
}

template <typename Scalar>
Scalar bemf_winding(const MachineParams<Scalar>& params, int w, const OperatingPoint<Scalar>& op) {
  detail::check_speed(op.omega_e);
  return op.omega_e * flux_derivative_winding(params, w, op.theta_e);
}

/// Line-to-line BEMF seen at the terminals with the windings open circuit.
/// Star: entry w is bemf(w) - bemf(w + 1 mod n). Delta: each line pair spans
/// exactly one winding, so entry w is bemf(w).
template <typename Scalar>
Vector<Scalar> terminal_bemf(const MachineParams<Scalar>& params, const OperatingPoint<Scalar>& op) {
  const int n = params.phases();
  Vector<Scalar> winding(n);
  for (int w = 0; w < n; ++w) winding(w) = bemf_winding(params, w, op);
  if (params.config() == WindingConfig::Delta) return winding;
  Vector<Scalar> line(n);
  for (int w = 0; w < n; ++w) line(w) = winding(w) - winding((w + 1) % n);
  return line;
}

/// Terminal voltage of each winding of a closed delta loop.
///
/// The loop current drops R*I + L'*dI/dt = -(sum of winding BEMFs) across the
/// loop; with identical windings each one carries 1/n of that drop, leaving
/// bemf(w) - (1/n) sum_k bemf(k). Orders that are multiples of n vanish.
template <typename Scalar>
Vector<Scalar> closed_delta_terminal_voltage(const MachineParams<Scalar>& params,
                                             const OperatingPoint<Scalar>& op) {
  const int n = params.phases();
  Vector<Scalar> winding(n);
  for (int w = 0; w < n; ++w) winding(w) = bemf_winding(params, w, op);
  return (winding.array() - winding.mean()).matrix();
}

}  // namespace delta_loop
