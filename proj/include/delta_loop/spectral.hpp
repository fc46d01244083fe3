#pragma once

/// Fourier projection of one-cycle waveforms onto electrical orders.
///
/// Phase convention: a component (m, magnitude, phase) contributes
/// magnitude * sin(m theta + phase), so x(theta) = dc + sum_m of those terms.
/// With a_m = (2/N) sum x_k cos(m theta_k) and b_m = (2/N) sum x_k sin(m theta_k):
/// magnitude = hypot(a_m, b_m), phase = atan2(a_m, b_m) in (-pi, pi].

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "delta_loop/errors.hpp"
#include "delta_loop/waveform.hpp"

namespace delta_loop {

template <typename Scalar = double>
struct HarmonicComponent {
  int order = 0;
  Scalar magnitude = Scalar(0);
  Scalar phase = Scalar(0);
};

template <typename Scalar = double>
struct HarmonicDecomposition {
  Scalar dc = Scalar(0);
  /// components[m - 1] holds order m, m = 1..m_max.
  std::vector<HarmonicComponent<Scalar>> components;

  int max_order() const { return static_cast<int>(components.size()); }

  /// Component of order m; a zero component past m_max.
  HarmonicComponent<Scalar> at(int order) const {
    if (order < 1) throw ArgumentError("harmonic order must be >= 1");
    if (order > max_order()) return {order, Scalar(0), Scalar(0)};
    return components[static_cast<std::size_t>(order - 1)];
  }
};

template <typename Scalar>
HarmonicDecomposition<Scalar> decompose(const Waveform<Scalar>& waveform, int m_max) {
  using std::atan2;
  using std::hypot;
  const Eigen::Index n = waveform.size();
  if (m_max < 0) throw ArgumentError("m_max must be >= 0");
  if (2 * Eigen::Index(m_max) >= n)
    throw AliasingError("m_max " + std::to_string(m_max) + " must be < N/2 for N = " + std::to_string(n));

  const auto theta = theta_grid<Scalar>(n);
  const auto x = waveform.samples().array();
  const Scalar scale = Scalar(2) / Scalar(n);

  HarmonicDecomposition<Scalar> out;
  out.dc = x.mean();
  out.components.reserve(static_cast<std::size_t>(m_max));
  for (int m = 1; m <= m_max; ++m) {
    const auto arg = Scalar(m) * theta;
    const Scalar a = scale * (x * arg.cos()).sum();
    const Scalar b = scale * (x * arg.sin()).sum();
    Scalar phase = atan2(a, b);
    if (phase <= -std::numbers::pi_v<Scalar>) phase = std::numbers::pi_v<Scalar>;
    out.components.push_back({m, hypot(a, b), phase});
  }
  return out;
}

template <typename Scalar>
Waveform<Scalar> synthesize(const HarmonicDecomposition<Scalar>& decomposition, Eigen::Index samples,
                            Unit unit = Unit::Volt) {
  int top = 0;
  for (const auto& c : decomposition.components) top = std::max(top, c.order);
  if (samples < 4 || 2 * Eigen::Index(top) >= samples)
    throw AliasingError("N = " + std::to_string(samples) + " cannot carry order " + std::to_string(top));

  const auto theta = theta_grid<Scalar>(samples);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> x =
      Eigen::Array<Scalar, Eigen::Dynamic, 1>::Constant(samples, decomposition.dc);
  for (const auto& c : decomposition.components) {
    if (c.magnitude == Scalar(0)) continue;
    x += c.magnitude * (Scalar(c.order) * theta + c.phase).sin();
  }
  return Waveform<Scalar>(x.matrix(), unit);
}

}  // namespace delta_loop
