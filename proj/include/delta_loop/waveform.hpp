#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "delta_loop/errors.hpp"

namespace delta_loop {

enum class Unit { Ampere, NewtonMeter, Volt };

inline const char* to_string(Unit unit) {
  switch (unit) {
    case Unit::Ampere: return "A";
    case Unit::NewtonMeter: return "N*m";
    case Unit::Volt: return "V";
  }
  return "?";
}

/// theta_k = 2 pi k / N, k = 0..N-1.
template <typename Scalar = double>
Eigen::Array<Scalar, Eigen::Dynamic, 1> theta_grid(Eigen::Index samples) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> theta(samples);
  for (Eigen::Index k = 0; k < samples; ++k)
    theta(k) = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(k) / Scalar(samples);
  return theta;
}

/// One electrical cycle sampled on the uniform grid theta_k = 2 pi k / N.
template <typename Scalar = double>
class Waveform {
 public:
  using Samples = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Waveform(Samples samples, Unit unit) : samples_(std::move(samples)), unit_(unit) {
    if (samples_.size() < 4)
      throw ArgumentError("waveform needs at least 4 samples, got " + std::to_string(samples_.size()));
  }

  static Waveform zeros(Eigen::Index samples, Unit unit) { return Waveform(Samples::Zero(samples), unit); }

  /// Samples `fn(theta_k)` on the grid.
  template <typename Fn>
  static Waveform sample(Eigen::Index samples, Unit unit, Fn&& fn) {
    if (samples < 4) throw ArgumentError("waveform needs at least 4 samples");
    const auto theta = theta_grid<Scalar>(samples);
    Samples values(samples);
    for (Eigen::Index k = 0; k < samples; ++k) values(k) = fn(theta(k));
    return Waveform(std::move(values), unit);
  }

  const Samples& samples() const { return samples_; }
  Scalar operator[](Eigen::Index k) const { return samples_(k); }
  Eigen::Index size() const { return samples_.size(); }
  Unit unit() const { return unit_; }
  Scalar theta(Eigen::Index k) const {
    return Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(k) / Scalar(size());
  }

  Scalar mean() const { return samples_.mean(); }
  Scalar rms() const { return std::sqrt(samples_.squaredNorm() / Scalar(size())); }
  Scalar peak() const { return samples_.cwiseAbs().maxCoeff(); }

 private:
  Samples samples_;
  Unit unit_;
};

/// RMS of the pointwise difference; sizes must match.
template <typename Scalar>
Scalar rms_difference(const Waveform<Scalar>& a, const Waveform<Scalar>& b) {
  if (a.size() != b.size()) throw ArgumentError("waveform sizes differ");
  return std::sqrt((a.samples() - b.samples()).squaredNorm() / Scalar(a.size()));
}

}  // namespace delta_loop
