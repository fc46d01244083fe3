#include "doctest.h"

#include <cmath>
#include <numbers>

#include "delta_loop/time_domain.hpp"
#include "oracles.hpp"

using namespace delta_loop;
using oracle::reference_machine;
constexpr double kPi = std::numbers::pi;

namespace {

double max_error_vs_phasor(const MachineParams<double>& m, double omega, int steps, int settle) {
  SimSpec<double> spec;
  spec.steps_per_cycle = steps;
  spec.settle_cycles = settle;
  const auto run = integrate_loop(m, omega, spec);
  const auto analytic = circulating_current_waveform(m, omega, steps);
  return (run.current.samples() - analytic.samples()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("settle cycles default") {
  const auto m = reference_machine({{3, 0.01}});  // tau = L'/R = 2 ms
  CHECK(settle_cycles_default(m, 1.0) == 5);       // tau << period

  auto f = m.fields();
  f.resistance = 1e-4;
  f.self_inductance = 1e-4;  // tau = 1 s
  const MachineParams<double> slow(f);
  const double omega = 2.0 * kPi / 0.01;  // period 10 ms
  CHECK(settle_cycles_default(slow, omega) >= 1000);

  int previous = 0;
  for (double l = 1e-5; l < 1e-2; l *= 2.0) {
    f.self_inductance = l;
    const int cycles = settle_cycles_default(MachineParams<double>(f), 500.0);
    CHECK(cycles >= previous);
    previous = cycles;
  }
  previous = 1 << 30;
  f.self_inductance = 1e-3;
  for (double r = 1e-3; r < 10.0; r *= 2.0) {
    f.resistance = r;
    const int cycles = settle_cycles_default(MachineParams<double>(f), 500.0);
    CHECK(cycles <= previous);
    previous = cycles;
  }

  f.resistance = 0.0;
  CHECK_THROWS_AS(settle_cycles_default(MachineParams<double>(f), 500.0), DegenerateOperatingPoint);
}

TEST_CASE("integrate_loop preconditions") {
  const auto m = reference_machine({{3, 0.01}});
  CHECK_THROWS_AS(integrate_loop(m, 0.0, SimSpec<double>{}), DegenerateOperatingPoint);
  CHECK_THROWS_AS(integrate_loop(m.with_config(WindingConfig::Star), 100.0, SimSpec<double>{}), ConfigurationError);
  SimSpec<double> coarse;
  coarse.steps_per_cycle = 16;
  CHECK_THROWS_AS(integrate_loop(m, 100.0, coarse), ArgumentError);
  SimSpec<double> no_settle;
  no_settle.settle_cycles = 0;
  CHECK_THROWS_AS(integrate_loop(m, 100.0, no_settle), ArgumentError);
}

TEST_CASE("no circulating orders: zero current and torque") {
  const auto m = reference_machine({{1, 0.05}, {5, 0.002}, {7, 0.001}});
  const auto run = integrate_loop(m, 400.0, SimSpec<double>{});
  CHECK(run.current.peak() < 1e-12);
  CHECK(run.torque.peak() < 1e-12);
  CHECK(run.converged);
}

TEST_CASE("single order steady state matches the phasor") {
  const auto m = reference_machine({{1, 0.05}, {3, 0.01}});
  for (double ratio : {0.1, 1.0, 10.0, 100.0}) {
    const double omega = speed_for_reactance_ratio(m, 3, ratio);
    SimSpec<double> spec;
    spec.steps_per_cycle = 2048;
    spec.settle_cycles =
        static_cast<int>(std::ceil(10.0 * (m.loop_inductance() / m.resistance()) * (omega * 3) / (2.0 * kPi))) + 2;
    const auto run = integrate_loop(m, omega, spec);
    const auto analytic = circulating_current_waveform(m, omega, 2048);
    const double amplitude = circulating_current_phasor(m, omega, 3).amplitude;
    CHECK(rms_difference(run.current, analytic) < 1e-3 * amplitude);

    const auto torque = torque_waveform(m, omega, 2048);
    CHECK(rms_difference(run.torque, torque) < 1e-3 * torque.peak());
  }
}

TEST_CASE("initial condition independence") {
  const auto m = reference_machine({{3, 0.01}});
  const double omega = 400.0;
  const double amplitude = circulating_current_phasor(m, omega, 3).amplitude;
  auto spec = default_sim_spec(m, omega);
  const auto from_zero = integrate_loop(m, omega, spec);
  spec.initial_current = 2.0 * amplitude;
  const auto from_high = integrate_loop(m, omega, spec);
  CHECK(from_high.converged);
  CHECK(rms_difference(from_zero.current, from_high.current) < 1e-5 * amplitude);
}

TEST_CASE("unconverged settle is reported") {
  const auto m = reference_machine({{3, 0.01}});
  const double omega = speed_for_reactance_ratio(m, 3, 100.0);  // tau spans ~5 cycles
  SimSpec<double> spec;
  spec.settle_cycles = 1;
  const auto run = integrate_loop(m, omega, spec);
  CHECK_FALSE(run.converged);
  CHECK(run.residual_settle > spec.convergence_tolerance);
  const auto settled = integrate_loop(m, omega, default_sim_spec(m, omega));
  CHECK(settled.converged);
}

TEST_CASE("fourth-order convergence") {
  const auto m = reference_machine({{3, 0.01}});
  const double omega = speed_for_reactance_ratio(m, 3, 1.0);
  const int settle = settle_cycles_default(m, omega) + 20;
  const double e1 = max_error_vs_phasor(m, omega, 32, settle);
  const double e2 = max_error_vs_phasor(m, omega, 64, settle);
  const double e3 = max_error_vs_phasor(m, omega, 128, settle);
  MESSAGE("RK4 error ratios: " << e1 / e2 << ", " << e2 / e3);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
  CHECK(e2 / e3 > 12.0);
  CHECK(e2 / e3 < 20.0);
}

TEST_CASE("energy balance: R<I^2> = -omega_m <T>") {
  oracle::RandomMachine gen(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = gen.machine(3, 12, WindingConfig::Delta);
    if (circulating_orders(m).empty()) continue;
    const double omega = speed_for_reactance_ratio(m, circulating_orders(m).front(), gen.log_uniform(0.1, 10.0));
    const auto run = integrate_loop(m, omega, default_sim_spec(m, omega));
    const double dissipated = m.resistance() * run.current.samples().squaredNorm() / run.current.size();
    const double mechanical = omega / m.pole_pairs() * run.torque.mean();
    CHECK(std::abs(dissipated + mechanical) < 5e-3 * dissipated);
  }
}

TEST_CASE("superposition of two orders") {
  const auto both = reference_machine({{3, 0.01}, {9, 0.002}});
  const auto third = reference_machine({{3, 0.01}});
  const auto ninth = reference_machine({{9, 0.002}});
  const double omega = 300.0;
  const auto spec = default_sim_spec(both, omega);
  const auto a = integrate_loop(both, omega, spec);
  const auto b = integrate_loop(third, omega, spec);
  const auto c = integrate_loop(ninth, omega, spec);
  const Waveform<double> sum(b.current.samples() + c.current.samples(), Unit::Ampere);
  CHECK(rms_difference(a.current, sum) < 1e-3 * a.current.rms());
}

TEST_CASE("R = 0 from the exact initial current stays on the analytic cycle") {
  auto f = reference_machine({{3, 0.01}}).fields();
  f.resistance = 0.0;
  const MachineParams<double> lossless(f);
  const auto spec = default_sim_spec(lossless, 250.0);
  CHECK(spec.settle_cycles == 1);
  const auto run = integrate_loop(lossless, 250.0, spec);
  const auto analytic = circulating_current_waveform(lossless, 250.0, spec.steps_per_cycle);
  CHECK(rms_difference(run.current, analytic) < 1e-6 * analytic.peak());
}
