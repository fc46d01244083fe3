// Acceptance suite: one line per criterion, exit status 0 iff all pass.
//
//   acceptance [path/to/delta-loop]
//
// The CLI path enables the byte-identical sweep check through the real binary.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "delta_loop/experiments.hpp"
#include "delta_loop/loop_analytics.hpp"
#include "delta_loop/machine_io.hpp"
#include "delta_loop/spectral.hpp"
#include "delta_loop/time_domain.hpp"
#include "oracles.hpp"

using namespace delta_loop;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool passed = true;
  std::string summary;
};

/// Tracks the worst ratio measured/tolerance over many sub-checks.
class Gauge {
 public:
  void observe(const std::string& what, double measured, double tolerance) {
    const bool ok = measured < tolerance;
    if (!ok && failures_ < 3) std::cerr << "    " << what << ": " << measured << " >= " << tolerance << '\n';
    failures_ += !ok;
    if (!(measured / tolerance <= worst_ratio_)) {
      worst_ratio_ = measured / tolerance;
      worst_ = what + " " + format(measured) + " (tol " + format(tolerance) + ")";
    }
    ++count_;
  }
  void require(const std::string& what, bool ok) { observe(what, ok ? 0.0 : 1.0, 0.5); }

  Outcome outcome() const {
    return {failures_ == 0, std::to_string(count_) + " checks, " + std::to_string(failures_) + " failed; worst " + worst_};
  }

  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

 private:
  double worst_ratio_ = -1.0;
  std::string worst_;
  int count_ = 0;
  int failures_ = 0;
};

MachineParams<double> bundled(const char* name) { return load_machine(fs::path(DELTA_LOOP_DATA_DIR) / name); }

// 1. Loop-sum identity and non-kn cancellation.
Outcome loop_sum_identity() {
  Gauge g;
  oracle::RandomMachine gen(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen.uniform(0.0, 1.0) < 0.5 ? 3 : 5;
    const auto m = gen.machine(n, 4 * n, WindingConfig::Delta);
    const double omega = gen.log_uniform(1.0, 1e4);
    double scale = 0.0;
    for (const auto& [h, lambda] : m.spectrum()) scale += n * h * omega * lambda;
    for (int s = 0; s < 16; ++s) {
      const OperatingPoint<double> op{omega, gen.uniform(0.0, 2.0 * kPi)};
      double sum = 0.0;
      for (int w = 0; w < n; ++w) sum += bemf_winding(m, w, op);
      g.observe("loop sum rel error", std::abs(sum - loop_bemf_sum(m, op)) / scale, 1e-10);
      for (const auto& [h, lambda] : m.spectrum()) {
        if (h % n == 0) continue;
        const auto single = m.with_spectrum({{h, lambda}});
        double part = 0.0;
        for (int w = 0; w < n; ++w) part += bemf_winding(single, w, op);
        g.observe("non-kn residue", std::abs(part) / (h * omega * lambda), 1e-12);
      }
    }
  }
  return g.outcome();
}

struct SingleOrderCase {
  MachineParams<double> machine;
  int order;
  double omega;
};

std::vector<SingleOrderCase> single_order_cases() {
  std::vector<SingleOrderCase> cases;
  oracle::RandomMachine gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = gen.uniform(0.0, 1.0) < 0.5 ? 3 : 5;
    const int h = n * gen.integer(1, 3);
    const auto m = gen.single_order(n, h);
    for (double ratio : {0.05, 0.3, 1.0, 4.0, 40.0})
      cases.push_back({m, h, speed_for_reactance_ratio(m, h, ratio * gen.uniform(0.8, 1.25))});
  }
  return cases;
}

SimSpec<double> acceptance_sim_spec(const SingleOrderCase& c) {
  const auto& m = c.machine;
  SimSpec<double> spec;
  spec.steps_per_cycle = 2048;
  spec.settle_cycles =
      static_cast<int>(std::ceil(10.0 * (m.loop_inductance() / m.resistance()) * (c.omega * c.order) / (2.0 * kPi))) + 2;
  return spec;
}

// 2. RK4 steady state against the closed-form current.
Outcome phasor_ode_equivalence() {
  Gauge g;
  for (const auto& c : single_order_cases()) {
    const auto run = integrate_loop(c.machine, c.omega, acceptance_sim_spec(c));
    const auto analytic = circulating_current_waveform(c.machine, c.omega, 2048);
    const double amplitude = circulating_current_phasor(c.machine, c.omega, c.order).amplitude;
    g.observe("RMS(ODE - phasor)/amplitude", rms_difference(run.current, analytic) / amplitude, 1e-3);
  }
  return g.outcome();
}

// 3. Closed-form torque against virtual work and the ODE path.
Outcome torque_oracle_agreement() {
  Gauge g;
  for (const auto& c : single_order_cases()) {
    const auto& m = c.machine;
    const auto closed = single_order_torque(m, c.omega, c.order);
    const auto phasor = circulating_current_phasor(m, c.omega, c.order);
    const auto theta = theta_grid<double>(2048);
    typename Waveform<double>::Samples closed_samples(2048);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      double slope = 0.0;
      for (int w = 0; w < m.phases(); ++w) slope += flux_derivative_winding(m, w, theta(k));
      const double virtual_work = m.pole_pairs() * phasor.at(theta(k)) * slope;
      closed_samples(k) = closed.at(theta(k));
      worst = std::max(worst, std::abs(closed_samples(k) - virtual_work));
    }
    g.observe("closed form vs virtual work", worst / closed.ripple_amplitude, 1e-9);

    const auto summary = torque_summary(m, c.omega);
    g.observe("DC vs decomposition", std::abs(summary.dc - closed.dc) / closed.ripple_amplitude, 1e-9);
    g.observe("2h ripple vs decomposition",
              std::abs(summary.ripple.front().amplitude - closed.ripple_amplitude) / closed.ripple_amplitude, 1e-9);

    const Waveform<double> closed_wave(closed_samples, Unit::NewtonMeter);
    const auto run = integrate_loop(m, c.omega, acceptance_sim_spec(c));
    g.observe("RMS(ODE torque - closed)/RMS", rms_difference(run.torque, closed_wave) / closed_wave.rms(), 1e-3);
  }
  return g.outcome();
}

// 4. Current amplitude at h omega L'/R = 100.
Outcome high_speed_current() {
  Gauge g;
  oracle::RandomMachine gen(4);
  std::vector<MachineParams<double>> machines = {bundled("delta_9s6p.json"), bundled("delta_12s8p.json"),
                                                 bundled("delta_5phase.json")};
  for (int i = 0; i < 50; ++i) machines.push_back(gen.machine(gen.uniform(0, 1) < 0.5 ? 3 : 5, 20, WindingConfig::Delta));
  for (const auto& m : machines) {
    for (int h : circulating_orders(m)) {
      const double limit = m.phases() * m.magnitude(h) / (m.self_inductance() - 2.0 * m.mutual_inductance());
      const double amplitude = circulating_current_phasor(m, speed_for_reactance_ratio(m, h, 100.0), h).amplitude;
      g.observe("|I - n lambda/(L-2M)|/limit", std::abs(amplitude - limit) / limit, 0.01);
    }
  }
  return g.outcome();
}

// 5. Single order h: torque holds only DC and order 2h.
Outcome torque_order_content() {
  Gauge g;
  for (const auto& c : single_order_cases()) {
    const auto torque = torque_waveform(c.machine, c.omega, 512);
    const auto d = decompose(torque, 255);
    const double ripple = d.at(2 * c.order).magnitude;
    double stray = 0.0;
    for (const auto& comp : d.components)
      if (comp.order != 2 * c.order) stray = std::max(stray, comp.magnitude);
    g.observe("stray order / ripple", stray / ripple, 1e-9);
  }
  return g.outcome();
}

// 6. Log sweep over h omega L'/R in [0.01, 100]: DC peak location, decay, ripple plateau.
Outcome dc_decay_ripple_plateau() {
  Gauge g;
  std::vector<std::pair<MachineParams<double>, int>> cases;
  const auto reference = bundled("delta_9s6p.json");
  cases.push_back({reference.with_spectrum({{1, reference.magnitude(1)}, {3, reference.magnitude(3)},
                                            {5, reference.magnitude(5)}}),
                   3});
  oracle::RandomMachine gen(6);
  for (int i = 0; i < 10; ++i) {
    const int n = i % 2 ? 5 : 3;
    const int h = n * gen.integer(1, 2);
    cases.push_back({gen.single_order(n, h), h});
  }
  for (const auto& [m, h] : cases) {
    const SweepSpec spec{speed_for_reactance_ratio(m, h, 0.01), speed_for_reactance_ratio(m, h, 100.0), 81,
                         SweepScale::Logarithmic};
    SweepOptions options;
    options.threads = 4;
    const auto result = run_sweep(m, spec, options);
    std::size_t argmax = 0, nearest = 0;
    const double target = dc_peak_speed(m, h);
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      if (std::abs(result.rows[i].torque_dc) > std::abs(result.rows[argmax].torque_dc)) argmax = i;
      if (std::abs(std::log(result.rows[i].omega_e / target)) < std::abs(std::log(result.rows[nearest].omega_e / target)))
        nearest = i;
    }
    g.require("DC argmax at grid point nearest R/(hL')", argmax == nearest);
    g.observe("|DC(top)|/|DC(peak)|", std::abs(result.rows.back().torque_dc / result.rows[argmax].torque_dc), 0.02);
    const double n = m.phases(), lambda = m.magnitude(h);
    const double plateau = m.pole_pairs() * n * n * h * lambda * lambda / (2.0 * m.loop_inductance());
    g.observe("|ripple(top) - plateau|/plateau", std::abs(result.rows.back().ripple.front().amplitude - plateau) / plateau,
              0.01);
  }
  return g.outcome();
}

// 7. Star: multiples of n invisible line-to-line, visible per winding, no loop current.
Outcome star_observability() {
  Gauge g;
  oracle::RandomMachine gen(7);
  std::vector<MachineParams<double>> machines = {bundled("star_9s6p.json")};
  for (int i = 0; i < 40; ++i) machines.push_back(gen.machine(i % 2 ? 5 : 3, 20, WindingConfig::Star));
  for (const auto& m : machines) {
    const double omega = gen.log_uniform(10.0, 5000.0);
    const int n = m.phases();
    const auto line = decompose(Waveform<double>::sample(256, Unit::Volt, [&](double t) {
      return terminal_bemf(m, OperatingPoint<double>{omega, t})(0);
    }), 100);
    const auto winding = decompose(Waveform<double>::sample(256, Unit::Volt, [&](double t) {
      return bemf_winding(m, 0, OperatingPoint<double>{omega, t});
    }), 100);
    for (const auto& [h, lambda] : m.spectrum()) {
      if (h % n != 0 || lambda == 0.0) continue;
      g.require("per-winding kn content present", winding.at(h).magnitude > 0.5 * h * omega * lambda);
      g.observe("star line kn content / winding", line.at(h).magnitude / winding.at(h).magnitude, 1e-10);
    }
    g.require("star loop current identically zero", circulating_current_waveform(m, omega, 256).peak() == 0.0);
  }
  return g.outcome();
}

// 8. Energy balance at the ODE steady state.
Outcome energy_balance() {
  Gauge g;
  oracle::RandomMachine gen(8);
  for (int i = 0; i < 40; ++i) {
    const auto m = gen.machine(i % 2 ? 5 : 3, 20, WindingConfig::Delta);
    const auto orders = circulating_orders(m);
    if (orders.empty()) continue;
    const double omega = speed_for_reactance_ratio(m, orders.front(), gen.log_uniform(0.03, 30.0));
    const auto run = integrate_loop(m, omega, default_sim_spec(m, omega));
    const double dissipated = m.resistance() * run.current.samples().squaredNorm() / run.current.size();
    const double mechanical = omega / m.pole_pairs() * run.torque.mean();
    g.observe("|R<I^2> + omega_m<T>| / R<I^2>", std::abs(dissipated + mechanical) / dissipated, 5e-3);
  }
  return g.outcome();
}

// 9. Parseval and round trip.
Outcome spectral_identities() {
  Gauge g;
  oracle::RandomMachine gen(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int m_max = gen.integer(3, 20);
    HarmonicDecomposition<double> d;
    d.dc = gen.uniform(-3.0, 3.0);
    for (int m = 1; m <= m_max; ++m)
      d.components.push_back({m, gen.uniform(0.0, 1.0) < 0.5 ? gen.uniform(0.0, 4.0) : 0.0, gen.uniform(-kPi + 1e-9, kPi)});
    const Eigen::Index samples = 2 * m_max + gen.integer(1, 200);
    const auto x = synthesize(d, samples);
    const auto back = decompose(x, m_max);
    double power = d.dc * d.dc;
    for (const auto& c : d.components) power += 0.5 * c.magnitude * c.magnitude;
    const double mean_square = x.samples().squaredNorm() / static_cast<double>(samples);
    g.observe("Parseval rel gap", std::abs(mean_square - power) / mean_square, 1e-9);
    double worst = std::abs(back.dc - d.dc);
    for (int m = 1; m <= m_max; ++m) {
      const auto want = std::polar(d.at(m).magnitude, d.at(m).phase);
      const auto got = std::polar(back.at(m).magnitude, back.at(m).phase);
      worst = std::max(worst, std::abs(want - got));
    }
    g.observe("round-trip coefficient error", worst, 1e-9);
  }
  return g.outcome();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10. Sweep CSV is byte-identical for 1 and 8 threads.
Outcome determinism(const std::string& cli) {
  Gauge g;
  const auto m = bundled("delta_9s6p.json");
  const SweepSpec spec{5.0, 2e4, 60, SweepScale::Logarithmic};
  std::string csv[2];
  int slot = 0;
  for (const char* threads : {"1", "8"}) {
    ::setenv("DELTA_LOOP_THREADS", threads, 1);
    SweepOptions options;
    options.verify = true;
    options.threads = thread_count_from_env();
    std::ostringstream out;
    write_sweep_csv(out, run_sweep(m, spec, options));
    csv[slot++] = out.str();
  }
  g.require("in-process CSV identical", csv[0] == csv[1]);

  if (!cli.empty()) {
    const auto dir = fs::temp_directory_path() / ("delta_loop_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::string files[2];
    slot = 0;
    for (const char* threads : {"1", "8"}) {
      const auto out = dir / (std::string("sweep_") + threads + ".csv");
      const std::string command = "DELTA_LOOP_THREADS=" + std::string(threads) + " '" + cli + "' sweep --machine '" +
                                  (fs::path(DELTA_LOOP_DATA_DIR) / "delta_9s6p.json").string() +
                                  "' --omega-start 5 --omega-end 20000 --points 60 --log --verify --out '" +
                                  out.string() + "'";
      g.require(std::string("cli exit 0 with ") + threads + " threads", std::system(command.c_str()) == 0);
      files[slot++] = slurp(out);
    }
    g.require("CLI CSV non-empty", !files[0].empty());
    g.require("CLI CSV byte-identical", files[0] == files[1]);
    fs::remove_all(dir);
  }
  ::unsetenv("DELTA_LOOP_THREADS");
  return g.outcome();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1 loop-sum identity", loop_sum_identity},
      {"AC2 phasor-ODE equivalence", phasor_ode_equivalence},
      {"AC3 torque oracle agreement", torque_oracle_agreement},
      {"AC4 high-speed current asymptote", high_speed_current},
      {"AC5 torque-order content", torque_order_content},
      {"AC6 DC decay and ripple plateau", dc_decay_ripple_plateau},
      {"AC7 star observability", star_observability},
      {"AC8 energy balance", energy_balance},
      {"AC9 spectral identities", spectral_identities},
      {"AC10 sweep determinism", [&] { return determinism(cli); }},
  };

  int failed = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s: %s (%.2f s)\n", outcome.passed ? "PASS" : "FAIL", criterion.name, outcome.summary.c_str(),
                seconds);
    std::fflush(stdout);
    failed += !outcome.passed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
