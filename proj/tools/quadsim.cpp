#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadsim/control.hpp"
#include "quadsim/estimation.hpp"
#include "quadsim/harness.hpp"
#include "quadsim/key_value.hpp"
#include "quadsim/model.hpp"

namespace {

constexpr double kDeg = M_PI / 180.0;

struct LoadedModel {
  quadsim::QuadcopterParams params;
  quadsim::PropellerModel prop;
};

LoadedModel load_model(const std::string& path) {
  auto kv = quadsim::load_key_value_file(path);
  LoadedModel m{quadsim::params_from_kv(kv), quadsim::propeller_from_kv(kv)};
  auto rep = quadsim::validate_params(m.params);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  if (!rep.ok()) {
    throw std::invalid_argument("parameter file failed validation: " + rep.failures.front());
  }
  auto prep = quadsim::validate_propeller(m.prop);
  if (!prep.ok()) {
    throw std::invalid_argument("propeller model failed validation: " + prep.failures.front());
  }
  return m;
}

void print_axis(const char* name, const quadsim::AxisSummary& s, double unit,
                const char* unit_name) {
  std::printf("%-6s settling %.3f s  overshoot %.4f %s  oscillations %d  steady error %.5f %s\n",
              name, s.settling_time, s.overshoot / unit, unit_name, s.oscillations,
              s.steady_error / unit, unit_name);
}

int cmd_simulate(const std::string& scenario_path, const std::string& params_path,
                 const std::string& gains_path, const std::string& out_path,
                 long long seed_override, bool has_seed, const std::string& spin_out) {
  LoadedModel model = load_model(params_path);
  quadsim::GainSet gains = quadsim::gains_from_kv(quadsim::load_key_value_file(gains_path));
  quadsim::ScenarioSpec spec = quadsim::load_scenario(scenario_path);
  if (has_seed) spec.seed = static_cast<unsigned long long>(seed_override);

  quadsim::RunResult result = quadsim::run_scenario(spec, model.params, gains, model.prop);
  if (!out_path.empty()) quadsim::write_telemetry(out_path, result.telemetry);

  if (result.diverged) {
    std::cerr << "divergence: " << result.message << "\n";
    return 2;
  }
  print_axis("z", result.summary.z, 1.0, "m");
  print_axis("phi", result.summary.phi, kDeg, "deg");
  print_axis("theta", result.summary.theta, kDeg, "deg");
  print_axis("psi", result.summary.psi, kDeg, "deg");
  if (spec.mode == quadsim::ScenarioMode::FixedTorque) {
    std::printf("yaw spin: applied torque %.6g N m, steady rate %.6g rad/s (%s)\n",
                2.0 * spec.fixed_torque, result.summary.r_steady,
                result.summary.r_converged ? "converged" : "not converged");
    if (!spin_out.empty()) {
      bool fresh = !std::ifstream(spin_out).good();
      std::ofstream out(spin_out, std::ios::app);
      if (fresh) out << "tau,r\n";
      char buf[80];
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", 2.0 * spec.fixed_torque,
                    result.summary.r_steady);
      out << buf;
    }
  }
  return 0;
}

int cmd_fit_drag(const std::string& data_path) {
  auto points = quadsim::load_yaw_csv(data_path);
  auto fit = quadsim::fit_drag_coefficients(points);
  std::printf("gamma1 = %.9g\ngamma2 = %.9g%s\n", fit.gamma1, fit.gamma2,
              fit.gamma2_clamped ? " (negative intercept clamped to 0)" : "");
  return 0;
}

int cmd_fit_propeller(const std::string& data_path) {
  auto samples = quadsim::load_bench_csv(data_path);
  auto thrust_fit = quadsim::fit_thrust_pwm(samples);
  double c1 = quadsim::fit_thrust_omega(samples);
  auto torque_fit = quadsim::fit_torque_thrust(samples);
  std::printf("h1 = %.9g\nh2 = %.9g\nc1 = %.9g\ng1 = %.9g\ng2 = %.9g\n",
              thrust_fit.h1, thrust_fit.h2, c1, torque_fit.g1, torque_fit.g2);
  std::printf("thrust fit residual rms = %.3g N\n", thrust_fit.residuals.rms);
  return 0;
}

std::vector<std::vector<double>> load_swings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::vector<double>> trials;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (quadsim::trim(line).empty()) continue;
    std::vector<double> stamps;
    for (const auto& field : quadsim::split_csv_row(line)) stamps.push_back(std::stod(field));
    trials.push_back(std::move(stamps));
  }
  return trials;
}

int cmd_moi(double mass, double g, double pivot, double period,
            const std::string& swings_path) {
  double T = period;
  if (!swings_path.empty()) {
    T = quadsim::period_from_swings(load_swings_csv(swings_path));
    std::printf("mean swing period T = %.9g s\n", T);
  }
  if (mass > 0 && pivot > 0 && T > 0) {
    auto moi = quadsim::moi_from_pendulum(mass, g, pivot, T);
    std::printf("J_pivot = %.9g kg m^2\nJ_com   = %.9g kg m^2\n", moi.J_pivot, moi.J_com);
  } else if (swings_path.empty()) {
    throw std::invalid_argument("moi needs --mass/--pivot/--period or --swings");
  }
  return 0;
}

int cmd_tune(const std::string& axis_name, int oscillations, double settling,
             double tolerance, const std::string& params_path,
             const std::string& gains_path) {
  LoadedModel model = load_model(params_path);
  quadsim::GainSet base = quadsim::gains_from_kv(quadsim::load_key_value_file(gains_path));

  quadsim::Axis axis;
  double magnitude, band;
  if (axis_name == "z") {
    axis = quadsim::Axis::Z;
    magnitude = 2.0;
    band = 0.01;
    base.phi = base.theta = base.psi = {};  // altitude is tuned first, alone
  } else if (axis_name == "phi") {
    axis = quadsim::Axis::Phi;
    magnitude = 5.0 * kDeg;
    band = 0.1 * kDeg;
    base.theta = base.psi = {};
  } else if (axis_name == "theta") {
    axis = quadsim::Axis::Theta;
    magnitude = 5.0 * kDeg;
    band = 0.1 * kDeg;
    base.phi = base.psi = {};
  } else if (axis_name == "psi") {
    axis = quadsim::Axis::Psi;
    magnitude = 30.0 * kDeg;
    band = 0.1 * kDeg;
  } else {
    throw std::invalid_argument("unknown axis: " + axis_name);
  }
  if (tolerance > 0) band = axis == quadsim::Axis::Z ? tolerance : tolerance * kDeg;

  quadsim::TuneSpec spec;
  spec.target_oscillations = oscillations;
  spec.reference = magnitude;
  spec.settling_window = settling;
  spec.tolerance = band;

  auto simulate = quadsim::make_step_simulator(axis, magnitude, 2.0 * settling, base,
                                               model.params, model.prop);
  quadsim::PidGains tuned = quadsim::auto_tune_axis(simulate, spec);
  std::printf("kp_%s = %.6g\nkd_%s = %.6g\nki_%s = %.6g\n", axis_name.c_str(), tuned.kp,
              axis_name.c_str(), tuned.kd, axis_name.c_str(), tuned.ki);
  return 0;
}

int cmd_timing(double t0, double t1, double t2) {
  auto timing = quadsim::average_loop_time(t0, t1, t2);
  std::printf("average loop period = %.3f us\naverage loop frequency = %.0f Hz\n",
              timing.period * 1e6, timing.frequency);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadcopter flight-dynamics simulator and identification toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, params_path = "data/params.txt",
              gains_path = "data/gains_flight.txt", out_path, data_path, spin_out;
  long long seed = 0;

  auto* simulate = app.add_subcommand("simulate", "Run a closed-loop scenario");
  simulate->add_option("--scenario", scenario_path, "Scenario file")->required();
  simulate->add_option("--params", params_path, "Parameter file");
  simulate->add_option("--gains", gains_path, "Gains file");
  simulate->add_option("--out", out_path, "Telemetry CSV output path");
  auto* seed_opt = simulate->add_option("--seed", seed, "Seed override");
  simulate->add_option("--spin-out", spin_out, "Append tau,r rows for fixed-torque runs");

  auto* fit_drag = app.add_subcommand("fit-drag", "Fit drag coefficients from tau,r CSV");
  fit_drag->add_option("--data", data_path, "CSV with header tau,r")->required();

  auto* fit_prop = app.add_subcommand("fit-propeller", "Fit propeller model from bench CSV");
  fit_prop->add_option("--data", data_path, "CSV with header P,f,w,V,I")->required();

  double mass = 0, grav = 9.80665, pivot = 0, period = 0;
  std::string swings_path;
  auto* moi = app.add_subcommand("moi", "Pendulum moment-of-inertia identification");
  moi->add_option("--mass", mass, "Total mass (kg)");
  moi->add_option("--g", grav, "Gravity (m/s^2)");
  moi->add_option("--pivot", pivot, "Pivot-to-COM distance (m)");
  moi->add_option("--period", period, "Measured period (s)");
  moi->add_option("--swings", swings_path, "CSV of swing timestamps, one trial per row");

  std::string axis_name;
  int oscillations = 1;
  double settling = 3.0, tolerance = 0.0;
  auto* tune = app.add_subcommand("tune", "Auto-tune one PID axis");
  tune->add_option("--axis", axis_name, "Axis: z|phi|theta|psi")->required();
  tune->add_option("--oscillations", oscillations, "Target oscillation count")->required();
  tune->add_option("--settling", settling, "Settling window (s)");
  tune->add_option("--tolerance", tolerance, "Band: m for z, deg for angles");
  tune->add_option("--params", params_path, "Parameter file");
  tune->add_option("--gains", gains_path, "Base gains for the other axes");

  double t0 = 0, t1 = 0, t2 = 0;
  auto* timing = app.add_subcommand("timing", "Average interrupted-loop period");
  timing->add_option("--t0", t0, "Interrupt interval (s)")->required();
  timing->add_option("--t1", t1, "Main loop execution time (s)")->required();
  timing->add_option("--t2", t2, "Interrupt handler execution time (s)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return cmd_simulate(scenario_path, params_path, gains_path, out_path, seed,
                          seed_opt->count() > 0, spin_out);
    }
    if (fit_drag->parsed()) return cmd_fit_drag(data_path);
    if (fit_prop->parsed()) return cmd_fit_propeller(data_path);
    if (moi->parsed()) return cmd_moi(mass, grav, pivot, period, swings_path);
    if (tune->parsed()) {
      return cmd_tune(axis_name, oscillations, settling, tolerance, params_path, gains_path);
    }
    if (timing->parsed()) return cmd_timing(t0, t1, t2);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
