#include "delta_loop/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <ostream>
#include <thread>

#include "delta_loop/machine_io.hpp"
#include "delta_loop/spectral.hpp"
#include "delta_loop/time_domain.hpp"

namespace delta_loop {

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // no "-0"
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

unsigned thread_count_from_env() {
  if (const char* env = std::getenv("DELTA_LOOP_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value >= 1) return static_cast<unsigned>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double electrical_speed_from_rpm(int pole_pairs, double rpm) {
  return pole_pairs * 2.0 * std::numbers::pi / 60.0 * rpm;
}

// ---- waveform ----

WaveformTable run_waveform(const MachineParams<double>& params, double omega_e, Eigen::Index samples) {
  if (!(omega_e > 0.0) || !std::isfinite(omega_e))
    throw DegenerateOperatingPoint("waveform needs omega_e > 0");
  auto current = circulating_current_waveform(params, omega_e, samples);
  auto torque = torque_waveform(params, omega_e, samples);
  if (params.config() == WindingConfig::Star) {
    return {current, Waveform<double>::zeros(samples, Unit::Ampere), torque,
            Waveform<double>::zeros(samples, Unit::NewtonMeter)};
  }

  const auto decimation = static_cast<int>(std::max<Eigen::Index>(1, (2048 + samples - 1) / samples));
  const auto spec = default_sim_spec(params, omega_e, static_cast<int>(samples) * decimation);
  const auto ode = integrate_loop(params, omega_e, spec);
  Waveform<double>::Samples ode_current(samples), ode_torque(samples);
  for (Eigen::Index k = 0; k < samples; ++k) {
    ode_current(k) = ode.current[k * decimation];
    ode_torque(k) = ode.torque[k * decimation];
  }
  return {std::move(current), Waveform<double>(std::move(ode_current), Unit::Ampere), std::move(torque),
          Waveform<double>(std::move(ode_torque), Unit::NewtonMeter), ode.residual_settle, ode.converged};
}

void write_waveform_csv(std::ostream& out, const WaveformTable& table) {
  out << "theta_e_rad,i_circ_analytic_A,i_circ_ode_A,torque_analytic_Nm,torque_ode_Nm\n";
  for (Eigen::Index k = 0; k < table.current_analytic.size(); ++k) {
    out << format_number(table.current_analytic.theta(k)) << ',' << format_number(table.current_analytic[k]) << ','
        << format_number(table.current_ode[k]) << ',' << format_number(table.torque_analytic[k]) << ','
        << format_number(table.torque_ode[k]) << '\n';
  }
}

// ---- bemf ----

namespace {

double terminal_magnitude(const MachineParams<double>& params, double omega_e, int order, Eigen::Index samples,
                          bool closed) {
  const auto wave = Waveform<double>::sample(samples, Unit::Volt, [&](double theta) {
    const OperatingPoint<double> op{omega_e, theta};
    return closed ? closed_delta_terminal_voltage(params, op)(0) : terminal_bemf(params, op)(0);
  });
  return decompose(wave, order).at(order).magnitude;
}

}  // namespace

std::vector<BemfRow> bemf_table(const MachineParams<double>& params, double omega_e) {
  const auto star = params.with_config(WindingConfig::Star);
  const auto delta = params.with_config(WindingConfig::Delta);
  const auto samples =
      static_cast<Eigen::Index>(std::bit_ceil(static_cast<unsigned>(std::max(64, 4 * params.max_order() + 4))));
  const auto winding_wave = Waveform<double>::sample(
      samples, Unit::Volt, [&](double theta) { return bemf_winding(params, 0, OperatingPoint<double>{omega_e, theta}); });
  const auto winding_spectrum = decompose(winding_wave, params.max_order());

  std::vector<BemfRow> rows;
  for (const auto& harmonic : params.spectrum()) {
    const int h = harmonic.order;
    rows.push_back({h, winding_spectrum.at(h).magnitude, terminal_magnitude(star, omega_e, h, samples, false),
                    terminal_magnitude(delta, omega_e, h, samples, false),
                    terminal_magnitude(delta, omega_e, h, samples, true)});
  }
  return rows;
}

void write_bemf_csv(std::ostream& out, const std::vector<BemfRow>& rows) {
  out << "order,winding_V,star_line_V,delta_line_V,delta_closed_V\n";
  for (const auto& row : rows) {
    out << row.order << ',' << format_number(row.winding) << ',' << format_number(row.star_line) << ','
        << format_number(row.delta_line) << ',' << format_number(row.delta_closed) << '\n';
  }
}

// ---- sweep ----

void SweepSpec::validate() const {
  if (!std::isfinite(omega_start) || !std::isfinite(omega_end) || !(omega_start > 0.0) || omega_end < omega_start)
    throw ArgumentError("sweep needs 0 < omega_start <= omega_end");
  if (points < 1 || (points == 1 && omega_start != omega_end))
    throw ArgumentError("sweep needs points >= 2 (or 1 when omega_start == omega_end)");
}

std::vector<double> speed_grid(const SweepSpec& spec) {
  spec.validate();
  std::vector<double> grid(static_cast<std::size_t>(spec.points));
  if (spec.points == 1) {
    grid[0] = spec.omega_start;
    return grid;
  }
  const double last = spec.points - 1;
  for (int i = 0; i < spec.points; ++i) {
    const double t = i / last;
    grid[static_cast<std::size_t>(i)] =
        spec.scale == SweepScale::Linear
            ? spec.omega_start + t * (spec.omega_end - spec.omega_start)
            : std::exp(std::log(spec.omega_start) + t * (std::log(spec.omega_end) - std::log(spec.omega_start)));
  }
  grid.front() = spec.omega_start;
  grid.back() = spec.omega_end;
  return grid;
}

SweepResult run_sweep(const MachineParams<double>& params, const SweepSpec& spec, const SweepOptions& options) {
  const auto grid = speed_grid(spec);
  const Eigen::Index samples = options.samples > 0 ? options.samples : default_samples(params);

  SweepResult result;
  result.orders = circulating_orders(params);
  result.verified = options.verify;
  result.rows.resize(grid.size());

  parallel_for(grid.size(), options.threads, [&](std::size_t i) {
    const double omega = grid[i];
    SweepRow& row = result.rows[i];
    row.omega_e = omega;
    if (params.config() == WindingConfig::Delta) row.currents = circulating_current_phasors(params, omega);
    const auto torque = torque_summary(params, omega, samples);
    row.torque_dc = torque.dc;
    row.ripple = torque.ripple;
    if (options.verify) {
      if (params.config() == WindingConfig::Star) {
        row.ode_mismatch = 0.0;
      } else {
        const auto analytic = circulating_current_waveform(params, omega, 2048);
        const auto ode = integrate_loop(params, omega, default_sim_spec(params, omega, 2048));
        const double diff = rms_difference(ode.current, analytic);
        const double peak = analytic.peak();
        row.ode_mismatch = peak > 0.0 ? diff / peak : diff;
      }
    }
  });
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "omega_e_rad_s";
  for (int h : result.orders) out << ",i_h" << h << "_amplitude_A,i_h" << h << "_phase_rad";
  out << ",torque_dc_Nm";
  for (int h : result.orders) out << ",torque_h" << 2 * h << "_amplitude_Nm,torque_h" << 2 * h << "_phase_rad";
  if (result.verified) out << ",ode_rms_mismatch";
  out << '\n';
  for (const auto& row : result.rows) {
    out << format_number(row.omega_e);
    for (const auto& c : row.currents) out << ',' << format_number(c.amplitude) << ',' << format_number(c.phase_lag);
    out << ',' << format_number(row.torque_dc);
    for (const auto& r : row.ripple) out << ',' << format_number(r.amplitude) << ',' << format_number(r.phase);
    if (result.verified) out << ',' << format_number(row.ode_mismatch.value_or(0.0));
    out << '\n';
  }
}

nlohmann::json sweep_summary(const MachineParams<double>& params, const SweepSpec& spec, const SweepResult& result) {
  using nlohmann::json;
  json orders = json::array();
  const auto& rows = result.rows;
  for (std::size_t j = 0; j < result.orders.size(); ++j) {
    const int h = result.orders[j];
    const double current_limit = high_speed_current_limit(params, h);
    const double ripple_limit = high_speed_ripple_limit(params, h);
    const double current_top = rows.back().currents[j].amplitude;
    const double ripple_top = rows.back().ripple[j].amplitude;
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      monotone = monotone && rows[i].currents[j].amplitude >= rows[i - 1].currents[j].amplitude * (1.0 - 1e-12);
    json entry = {
        {"order", h},
        {"current_limit",
         {{"theory_A", current_limit},
          {"sweep_top_A", current_top},
          {"relative_gap", current_limit > 0.0 ? std::abs(current_top - current_limit) / current_limit : 0.0},
          {"monotone", monotone}}},
        {"ripple_limit",
         {{"order", 2 * h},
          {"theory_Nm", ripple_limit},
          {"sweep_top_Nm", ripple_top},
          {"single_order_top_Nm", single_order_torque(params, rows.back().omega_e, h).ripple_amplitude},
          {"relative_gap", ripple_limit > 0.0 ? std::abs(ripple_top - ripple_limit) / ripple_limit : 0.0}}},
        {"dc_peak_speed_theory_rad_s", dc_peak_speed(params, h)},
    };
    orders.push_back(std::move(entry));
  }

  json dc_peak = nullptr;
  const auto peak = std::max_element(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::abs(a.torque_dc) < std::abs(b.torque_dc);
  });
  if (peak != rows.end() && peak->torque_dc != 0.0) {
    dc_peak = {{"grid_argmax_rad_s", peak->omega_e},
               {"dc_at_peak_Nm", peak->torque_dc},
               {"dc_at_top_Nm", rows.back().torque_dc},
               {"top_over_peak", std::abs(rows.back().torque_dc / peak->torque_dc)}};
  }

  return {{"machine", machine_to_json(params)},
          {"sweep",
           {{"omega_start_rad_s", spec.omega_start},
            {"omega_end_rad_s", spec.omega_end},
            {"points", spec.points},
            {"scale", spec.scale == SweepScale::Linear ? "linear" : "log"}}},
          {"orders", std::move(orders)},
          {"dc_peak", std::move(dc_peak)}};
}

}  // namespace delta_loop
