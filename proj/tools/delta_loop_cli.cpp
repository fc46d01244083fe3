// delta-loop: circulating-current workbench for delta-wound PM machines.
//
//   delta-loop waveform --machine m.json --omega 200 [--samples 512] [--out w.csv]
//   delta-loop sweep    --machine m.json --omega-start 10 --omega-end 1e4 --points 81 --log [--verify] [--out s.csv]
//   delta-loop bemf     --machine m.json --omega 200 [--out b.csv]
//   delta-loop verify   --machine m.json [--omega-start .. --omega-end .. --points ..] [--out report.json]
//
// Exit codes: 0 ok, 1 verification failure, 2 input validation, 3 degenerate operating point.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "delta_loop/experiments.hpp"
#include "delta_loop/loop_analytics.hpp"
#include "delta_loop/machine_io.hpp"
#include "delta_loop/verification.hpp"

namespace {

using namespace delta_loop;

enum ExitCode { kOk = 0, kVerificationFailed = 1, kInvalidInput = 2, kDegenerate = 3 };

int fail(ExitCode code, const char* kind, const std::string& message) {
  std::string line = message;
  for (char& c : line)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "error: " << kind << ": " << line << '\n';
  return code;
}

void with_output(const std::string& path, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("out", "cannot write " + path);
  write(out);
}

std::string summary_path_for(const std::string& csv_path) {
  const auto dot = csv_path.find_last_of('.');
  const auto slash = csv_path.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? csv_path.substr(0, dot) : csv_path) + ".summary.json";
}

struct Options {
  std::string machine;
  std::string out;
  std::string summary;
  double omega = 0.0;
  std::optional<double> omega_start, omega_end;
  int points = 41;
  bool log_scale = false;
  bool rpm = false;
  bool verify = false;
  int samples = 0;
};

double to_electrical(const Options& o, const MachineParams<double>& params, double value) {
  return o.rpm ? electrical_speed_from_rpm(params.pole_pairs(), value) : value;
}

SweepSpec sweep_spec(const Options& o, const MachineParams<double>& params) {
  if (!o.omega_start || !o.omega_end) throw ArgumentError("--omega-start and --omega-end are required");
  SweepSpec spec{to_electrical(o, params, *o.omega_start), to_electrical(o, params, *o.omega_end), o.points,
                 o.log_scale ? SweepScale::Logarithmic : SweepScale::Linear};
  spec.validate();
  return spec;
}

/// Log grid over h omega L'/R in [0.01, 100] for the lowest circulating order.
SweepSpec default_verify_spec(const MachineParams<double>& params) {
  const auto orders = circulating_orders(params.with_config(WindingConfig::Delta));
  if (orders.empty() || !(params.resistance() > 0.0)) return {10.0, 1000.0, 21, SweepScale::Logarithmic};
  const int h = orders.front();
  return {speed_for_reactance_ratio(params, h, 0.01), speed_for_reactance_ratio(params, h, 100.0), 41,
          SweepScale::Logarithmic};
}

int cmd_waveform(const Options& o) {
  const auto params = load_machine(o.machine);
  const double omega = to_electrical(o, params, o.omega);
  if (!(omega > 0.0)) throw DegenerateOperatingPoint("waveform needs omega_e > 0");
  const Eigen::Index samples = o.samples > 0 ? o.samples : 512;
  const auto table = run_waveform(params, omega, samples);
  with_output(o.out, [&](std::ostream& out) { write_waveform_csv(out, table); });
  if (!table.ode_converged)
    std::cerr << "warning: ODE not settled, residual " << format_number(table.ode_residual) << '\n';
  return kOk;
}

int cmd_sweep(const Options& o) {
  const auto params = load_machine(o.machine);
  const auto spec = sweep_spec(o, params);
  SweepOptions options;
  options.samples = o.samples;
  options.verify = o.verify;
  options.threads = thread_count_from_env();
  const auto result = run_sweep(params, spec, options);
  with_output(o.out, [&](std::ostream& out) { write_sweep_csv(out, result); });
  std::string summary = o.summary;
  if (summary.empty() && !o.out.empty()) summary = summary_path_for(o.out);
  if (!summary.empty())
    with_output(summary, [&](std::ostream& out) { out << sweep_summary(params, spec, result).dump(2) << '\n'; });
  return kOk;
}

int cmd_bemf(const Options& o) {
  const auto params = load_machine(o.machine);
  const double omega = to_electrical(o, params, o.omega);
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw ArgumentError("--omega must be finite and >= 0");
  const auto rows = bemf_table(params, omega);
  with_output(o.out, [&](std::ostream& out) { write_bemf_csv(out, rows); });
  return kOk;
}

int cmd_verify(const Options& o) {
  const auto params = load_machine(o.machine);
  const auto spec = (o.omega_start || o.omega_end) ? sweep_spec(o, params) : default_verify_spec(params);
  const auto report = run_verification(params, spec, thread_count_from_env());
  with_output(o.out, [&](std::ostream& out) { out << report.to_json().dump(2) << '\n'; });
  if (const auto* failure = report.first_failure()) {
    return fail(kVerificationFailed, "verification",
                failure->name + " measured " + format_number(failure->measured) + " >= tolerance " +
                    format_number(failure->tolerance));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Circulating currents and torque in delta-wound PM machines"};
  app.require_subcommand(1);
  Options o;

  auto machine_flag = [&](CLI::App* cmd) {
    cmd->add_option("--machine", o.machine, "Machine description (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "Output path (default: stdout)");
    cmd->add_flag("--rpm", o.rpm, "Speeds are mechanical rpm instead of electrical rad/s");
  };
  auto sweep_flags = [&](CLI::App* cmd) {
    cmd->add_option("--omega-start", o.omega_start, "First speed");
    cmd->add_option("--omega-end", o.omega_end, "Last speed");
    cmd->add_option("--points", o.points, "Number of speeds")->capture_default_str();
    cmd->add_flag("--log", o.log_scale, "Logarithmic speed spacing");
  };

  auto* waveform = app.add_subcommand("waveform", "Loop current and torque over one cycle, analytic and ODE");
  machine_flag(waveform);
  waveform->add_option("--omega", o.omega, "Electrical speed [rad/s]")->required();
  waveform->add_option("--samples", o.samples, "Samples per cycle (default 512)");

  auto* sweep = app.add_subcommand("sweep", "Current and torque harmonics against speed");
  machine_flag(sweep);
  sweep_flags(sweep);
  sweep->add_option("--samples", o.samples, "Samples per cycle for torque decomposition");
  sweep->add_flag("--verify", o.verify, "Add an analytic-vs-ODE mismatch column");
  sweep->add_option("--summary", o.summary, "Summary JSON path (default: <out>.summary.json)");

  auto* bemf = app.add_subcommand("bemf", "Per-order BEMF: winding, star and delta terminals");
  machine_flag(bemf);
  bemf->add_option("--omega", o.omega, "Electrical speed [rad/s]")->required();

  auto* verify = app.add_subcommand("verify", "Run the model invariant checks");
  machine_flag(verify);
  sweep_flags(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kInvalidInput, "usage", e.what());
  }

  try {
    if (waveform->parsed()) return cmd_waveform(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (bemf->parsed()) return cmd_bemf(o);
    return cmd_verify(o);
  } catch (const ValidationError& e) {
    return fail(kInvalidInput, "validation", e.what());
  } catch (const DegenerateOperatingPoint& e) {
    return fail(kDegenerate, "degenerate", e.what());
  } catch (const ArgumentError& e) {
    return fail(kInvalidInput, "argument", e.what());
  } catch (const ConfigurationError& e) {
    return fail(kInvalidInput, "configuration", e.what());
  } catch (const std::exception& e) {
    return fail(kInvalidInput, "error", e.what());
  }
}
