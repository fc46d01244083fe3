#pragma once

/// Desk-scale experiments behind the command-line workbench: single-speed
/// waveforms, per-order BEMF observability tables and speed sweeps.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "delta_loop/loop_analytics.hpp"
#include "delta_loop/machine.hpp"
#include "delta_loop/waveform.hpp"

namespace delta_loop {

/// Fixed `%.17g` rendering used for every CSV cell.
std::string format_number(double value);

/// Worker count from DELTA_LOOP_THREADS, else hardware concurrency; at least 1.
unsigned thread_count_from_env();

/// Electrical rad/s from mechanical rpm: omega_e = p * 2 pi / 60 * rpm.
double electrical_speed_from_rpm(int pole_pairs, double rpm);

// ---- waveform ----

struct WaveformTable {
  Waveform<double> current_analytic;
  Waveform<double> current_ode;
  Waveform<double> torque_analytic;
  Waveform<double> torque_ode;
  double ode_residual = 0.0;
  bool ode_converged = true;
};

/// Analytic and RK4 loop current / torque over one cycle at N samples. The ODE
/// runs at a multiple of N steps (at least 2048) and is decimated onto the grid.
WaveformTable run_waveform(const MachineParams<double>& params, double omega_e, Eigen::Index samples);
void write_waveform_csv(std::ostream& out, const WaveformTable& table);

// ---- bemf ----

struct BemfRow {
  int order = 0;
  double winding = 0.0;       ///< single winding, open circuit
  double star_line = 0.0;     ///< star line-to-line
  double delta_line = 0.0;    ///< open delta: one winding per line pair
  double delta_closed = 0.0;  ///< closed delta terminal, loop drop included
};

/// Per-order BEMF magnitudes from decomposing sampled terminal waveforms.
std::vector<BemfRow> bemf_table(const MachineParams<double>& params, double omega_e);
void write_bemf_csv(std::ostream& out, const std::vector<BemfRow>& rows);

// ---- sweep ----

enum class SweepScale { Linear, Logarithmic };

struct SweepSpec {
  double omega_start = 0.0;
  double omega_end = 0.0;
  int points = 2;
  SweepScale scale = SweepScale::Linear;

  /// Throws ArgumentError unless 0 < start <= end and points >= 2 (1 when start == end).
  void validate() const;
};

std::vector<double> speed_grid(const SweepSpec& spec);

struct SweepRow {
  double omega_e = 0.0;
  std::vector<CurrentPhasor<double>> currents;  ///< one per circulating order
  double torque_dc = 0.0;
  std::vector<RippleComponent<double>> ripple;  ///< one per circulating order, at 2h
  std::optional<double> ode_mismatch;           ///< RMS(ODE - analytic) / analytic peak
};

struct SweepResult {
  std::vector<int> orders;
  std::vector<SweepRow> rows;
  bool verified = false;
};

struct SweepOptions {
  Eigen::Index samples = 0;  ///< 0: default_samples(params)
  bool verify = false;
  unsigned threads = 1;
};

/// Rows are computed independently and may run on several threads; the result
/// does not depend on the thread count.
SweepResult run_sweep(const MachineParams<double>& params, const SweepSpec& spec, const SweepOptions& options);
void write_sweep_csv(std::ostream& out, const SweepResult& result);

/// High-speed limits and DC-peak speed, theory next to what the sweep measured.
/// The measured 2h ripple includes cross products between circulating orders;
/// `single_order_top_Nm` is order h acting alone at the top speed.
nlohmann::json sweep_summary(const MachineParams<double>& params, const SweepSpec& spec, const SweepResult& result);

/// Runs fn(i) for i in [0, count) across `threads` workers.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn);

}  // namespace delta_loop

#include "delta_loop/detail/parallel_for.hpp"
