#include "delta_loop/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "delta_loop/loop_analytics.hpp"
#include "delta_loop/spectral.hpp"
#include "delta_loop/time_domain.hpp"

namespace delta_loop {

const char* to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "?";
}

bool VerificationReport::passed() const { return first_failure() == nullptr; }

const CheckResult* VerificationReport::first_failure() const {
  for (const auto& check : checks)
    if (check.status == CheckStatus::Fail) return &check;
  return nullptr;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& check : checks) {
    nlohmann::json entry = {{"name", check.name}, {"status", to_string(check.status)}, {"tolerance", check.tolerance}};
    entry["measured"] = check.status == CheckStatus::Skipped ? nlohmann::json(nullptr) : nlohmann::json(check.measured);
    if (!check.detail.empty()) entry["detail"] = check.detail;
    list.push_back(std::move(entry));
  }
  return {{"passed", passed()}, {"checks", std::move(list)}};
}

namespace {

using Params = MachineParams<double>;

CheckResult measured(std::string name, double worst, double tolerance, std::string detail = {}) {
  return {std::move(name), worst < tolerance ? CheckStatus::Pass : CheckStatus::Fail, worst, tolerance,
          std::move(detail)};
}

CheckResult skipped(std::string name, double tolerance, std::string why) {
  return {std::move(name), CheckStatus::Skipped, 0.0, tolerance, std::move(why)};
}

/// Worst value of fn over the grid, evaluated in parallel, reduced in grid order.
double worst_over(const std::vector<double>& grid, unsigned threads, const std::function<double(double)>& fn) {
  std::vector<double> values(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) { values[i] = fn(grid[i]); });
  double worst = 0.0;
  for (double v : values) worst = std::max(worst, v);
  return worst;
}

Params only_order(const Params& params, int order) { return params.with_spectrum({{order, params.magnitude(order)}}); }

double parseval_gap(const Waveform<double>& wave) {
  const auto d = decompose(wave, static_cast<int>(wave.size() / 2 - 1));
  double power = d.dc * d.dc;
  for (const auto& c : d.components) power += 0.5 * c.magnitude * c.magnitude;
  const double mean_square = wave.samples().squaredNorm() / static_cast<double>(wave.size());
  return mean_square > 0.0 ? std::abs(mean_square - power) / mean_square : std::abs(power);
}

}  // namespace

VerificationReport run_verification(const Params& params, const SweepSpec& spec, unsigned threads) {
  const auto grid = speed_grid(spec);
  const auto orders = circulating_orders(params);
  const bool delta = params.config() == WindingConfig::Delta;
  const bool resistive = params.resistance() > 0.0;
  const int n = params.phases();
  const Eigen::Index samples = default_samples(params);
  const auto theta = theta_grid<double>(samples);
  VerificationReport report;
  auto& checks = report.checks;

  // Loop BEMF sum against the per-winding sum.
  if (delta) {
    checks.push_back(measured("loop_sum_consistency", worst_over(grid, threads, [&](double omega) {
      double scale = 0.0;
      for (const auto& [h, lambda] : params.spectrum()) scale += n * h * omega * lambda;
      double worst = 0.0;
      for (double t : theta) {
        const OperatingPoint<double> op{omega, t};
        double sum = 0.0;
        for (int w = 0; w < n; ++w) sum += bemf_winding(params, w, op);
        worst = std::max(worst, std::abs(sum - loop_bemf_sum(params, op)));
      }
      return scale > 0.0 ? worst / scale : worst;
    }), 1e-10));
  } else {
    checks.push_back(skipped("loop_sum_consistency", 1e-10, "star machine has no loop"));
  }

  // Orders that are not multiples of n cancel around the windings.
  {
    std::vector<FluxHarmonic<double>> others;
    for (const auto& harmonic : params.spectrum())
      if (harmonic.order % n != 0) others.push_back(harmonic);
    const auto rest = params.with_spectrum(others);
    checks.push_back(measured("non_kn_cancellation", worst_over(grid, threads, [&](double omega) {
      double worst = 0.0;
      for (const auto& [h, lambda] : others) {
        const auto single = rest.with_spectrum({{h, lambda}});
        const double per_winding = h * omega * lambda;
        if (per_winding == 0.0) continue;
        for (double t : theta) {
          double sum = 0.0;
          for (int w = 0; w < n; ++w) sum += bemf_winding(single, w, OperatingPoint<double>{omega, t});
          worst = std::max(worst, std::abs(sum) / per_winding);
        }
      }
      return worst;
    }), 1e-12));
  }

  // R I + L' dI/dt + E_c = 0 for the closed-form current.
  if (delta) {
    checks.push_back(measured("phasor_residual", worst_over(grid, threads, [&](double omega) {
      const auto phasors = circulating_current_phasors(params, omega);
      double worst = 0.0, drive = 0.0;
      for (double t : theta) {
        double current = 0.0, slope = 0.0;
        for (const auto& ph : phasors) {
          current += ph.at(t);
          slope += -ph.amplitude * ph.order * omega * std::cos(ph.order * t - ph.phase_lag);
        }
        const double emf = loop_bemf_sum(params, OperatingPoint<double>{omega, t});
        drive = std::max(drive, std::abs(emf));
        worst = std::max(worst, std::abs(params.resistance() * current + params.loop_inductance() * slope + emf));
      }
      return drive > 0.0 ? worst / drive : worst;
    }), 1e-9));
  } else {
    checks.push_back(skipped("phasor_residual", 1e-9, "star machine has no loop"));
  }

  // Closed-form single-order torque against the virtual-work product.
  if (delta) {
    checks.push_back(measured("torque_closed_form", worst_over(grid, threads, [&](double omega) {
      double worst = 0.0;
      for (int h : orders) {
        const auto single = only_order(params, h);
        const auto closed = single_order_torque(single, omega, h);
        if (closed.ripple_amplitude == 0.0) continue;
        const auto torque = torque_waveform(single, omega, samples);
        for (Eigen::Index k = 0; k < samples; ++k)
          worst = std::max(worst, std::abs(closed.at(torque.theta(k)) - torque[k]) / closed.ripple_amplitude);
      }
      return worst;
    }), 1e-9));

    checks.push_back(measured("torque_order_purity", worst_over(grid, threads, [&](double omega) {
      double worst = 0.0;
      for (int h : orders) {
        const auto single = only_order(params, h);
        const auto d = decompose(torque_waveform(single, omega, samples), static_cast<int>(samples / 2 - 1));
        const double ripple = d.at(2 * h).magnitude;
        if (ripple == 0.0) continue;
        for (const auto& c : d.components)
          if (c.order != 2 * h) worst = std::max(worst, c.magnitude / ripple);
      }
      return worst;
    }), 1e-9));
  } else {
    checks.push_back(skipped("torque_closed_form", 1e-9, "star machine has no loop"));
    checks.push_back(skipped("torque_order_purity", 1e-9, "star machine has no loop"));
  }

  // High-speed asymptotes and DC decay, each circulating order on its own.
  if (delta) {
    double current_gap = 0.0, ripple_gap = 0.0;
    bool monotone = true;
    for (int h : orders) {
      const auto single = only_order(params, h);
      const double high = resistive ? speed_for_reactance_ratio(single, h, 100.0) : grid.back();
      const double limit = high_speed_current_limit(single, h);
      if (limit > 0.0)
        current_gap = std::max(current_gap, std::abs(circulating_current_phasor(single, high, h).amplitude - limit) / limit);
      const double ripple_limit = high_speed_ripple_limit(single, h);
      if (ripple_limit > 0.0)
        ripple_gap = std::max(ripple_gap,
                              std::abs(torque_summary(single, high).ripple.front().amplitude - ripple_limit) / ripple_limit);
      double previous = 0.0;
      for (double omega : grid) {
        const double amplitude = circulating_current_phasor(single, omega, h).amplitude;
        monotone = monotone && amplitude >= previous * (1.0 - 1e-12) && amplitude <= limit * (1.0 + 1e-12);
        previous = amplitude;
      }
    }
    checks.push_back(measured("current_asymptote", current_gap, 0.01, "at h omega L'/R = 100"));
    checks.push_back(measured("current_monotone_below_limit", monotone ? 0.0 : 1.0, 0.5));
    checks.push_back(measured("ripple_asymptote", ripple_gap, 0.01, "at h omega L'/R = 100"));
  } else {
    for (const char* name : {"current_asymptote", "current_monotone_below_limit", "ripple_asymptote"})
      checks.push_back(skipped(name, 0.01, "star machine has no loop"));
  }

  if (delta && resistive) {
    double worst = 0.0;
    for (int h : orders) {
      const auto single = only_order(params, h);
      const double peak = std::abs(torque_summary(single, dc_peak_speed(single, h)).dc);
      if (peak == 0.0) continue;
      worst = std::max(worst, std::abs(torque_summary(single, speed_for_reactance_ratio(single, h, 100.0)).dc) / peak);
    }
    checks.push_back(measured("dc_decay", worst, 0.02, "|DC| at h omega L'/R = 100 over peak"));
  } else {
    checks.push_back(skipped("dc_decay", 0.02, delta ? "R = 0: no DC torque" : "star machine has no loop"));
  }

  checks.push_back(measured("parseval", worst_over(grid, threads, [&](double omega) {
    return std::max(parseval_gap(circulating_current_waveform(params, omega, samples)),
                    parseval_gap(torque_waveform(params, omega, samples)));
  }), 1e-9));

  // Time-domain oracle.
  if (delta && resistive) {
    std::vector<std::optional<SteadyStateResult<double>>> slots(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
      slots[i] = integrate_loop(params, grid[i], default_sim_spec(params, grid[i], 2048));
    });
    double mismatch = 0.0, residual = 0.0, energy = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& run = *slots[i];
      const double omega = grid[i];
      const auto analytic = circulating_current_waveform(params, omega, 2048);
      const double peak = analytic.peak();
      mismatch = std::max(mismatch, peak > 0.0 ? rms_difference(run.current, analytic) / peak : run.current.peak());
      residual = std::max(residual, run.residual_settle);
      const double dissipated = params.resistance() * run.current.samples().squaredNorm() / 2048.0;
      const double mechanical = omega / params.pole_pairs() * run.torque.mean();
      if (dissipated > 0.0) energy = std::max(energy, std::abs(dissipated + mechanical) / dissipated);
    }
    checks.push_back(measured("phasor_ode_agreement", mismatch, 1e-3, "RMS(ODE - analytic) / analytic peak"));
    checks.push_back(measured("ode_settled", residual, 1e-6, "relative RMS change over the last two cycles"));
    checks.push_back(measured("energy_balance", energy, 5e-3, "R<I^2> against -omega_m <T>"));
  } else {
    const std::string why = delta ? "R = 0: no decaying transient, analytic checks only" : "star machine has no loop";
    checks.push_back(skipped("phasor_ode_agreement", 1e-3, why));
    checks.push_back(skipped("ode_settled", 1e-6, why));
    checks.push_back(skipped("energy_balance", 5e-3, why));
  }

  // Multiples of n vanish line-to-line in star and never circulate there.
  {
    const auto star = params.with_config(WindingConfig::Star);
    const auto m_max = static_cast<int>(samples / 2 - 1);
    checks.push_back(measured("star_observability", worst_over(grid, threads, [&](double omega) {
      const auto line = decompose(Waveform<double>::sample(samples, Unit::Volt, [&](double t) {
        return terminal_bemf(star, OperatingPoint<double>{omega, t})(0);
      }), m_max);
      const auto winding = decompose(Waveform<double>::sample(samples, Unit::Volt, [&](double t) {
        return bemf_winding(star, 0, OperatingPoint<double>{omega, t});
      }), m_max);
      double worst = circulating_current_waveform(star, omega, samples).peak();
      for (const auto& [h, lambda] : params.spectrum()) {
        if (h % n != 0 || h > m_max) continue;
        const double reference = winding.at(h).magnitude;
        if (reference > 0.0) worst = std::max(worst, line.at(h).magnitude / reference);
      }
      return worst;
    }), 1e-10));
  }

  return report;
}

}  // namespace delta_loop
