#include "quadsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "quadsim/key_value.hpp"

namespace quadsim {

namespace {

constexpr double kDeg = M_PI / 180.0;
constexpr double kAltitudeBand = 0.01;        // m
constexpr double kAngleBand = 0.1 * kDeg;     // rad

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

References ScenarioSpec::references_at(double t) const {
  References refs;
  for (const auto& entry : schedule) {
    if (entry.t_start <= t) {
      refs = entry.refs;
    } else {
      break;
    }
  }
  return refs;
}

ScenarioSpec scenario_from_kv(const KeyValueFile& kv) {
  ScenarioSpec sp;
  sp.duration = kv.get_double("duration", sp.duration);
  if (!(sp.duration > 0)) throw std::runtime_error("duration must be positive");
  sp.controller_hz = kv.get_int("controller_hz", sp.controller_hz);
  sp.altitude_decimation = kv.get_int("altitude_decimation", sp.altitude_decimation);
  std::string mode = kv.get_string("mode", "closed_loop");
  if (mode == "closed_loop") {
    sp.mode = ScenarioMode::ClosedLoop;
  } else if (mode == "fixed_torque") {
    sp.mode = ScenarioMode::FixedTorque;
  } else {
    throw std::runtime_error("unknown mode: " + mode);
  }
  sp.fixed_torque = kv.get_double("torque", 0.0);
  sp.bearing = kv.get_int("bearing", 0) != 0;
  sp.quantize = kv.get_int("quantize", 1) != 0;
  if (kv.has("seed")) {
    sp.seed = static_cast<unsigned long long>(kv.get_double("seed"));
  } else if (const char* env = std::getenv("QUADSIM_SEED")) {
    sp.seed = std::strtoull(env, nullptr, 10);
  }
  std::string integ = kv.get_string("integrator", "adaptive");
  if (integ == "adaptive") {
    sp.integrator = IntegratorKind::Adaptive;
  } else if (integ == "rk4") {
    sp.integrator = IntegratorKind::Rk4;
  } else {
    throw std::runtime_error("unknown integrator: " + integ);
  }
  sp.rtol = kv.get_double("rtol", sp.rtol);
  sp.atol = kv.get_double("atol", sp.atol);
  sp.rk4_substeps = kv.get_int("rk4_substeps", sp.rk4_substeps);

  sp.sensors.accel_sigma = kv.get_double("accel_sigma", 0.0);
  sp.sensors.gyro_sigma = kv.get_double("gyro_sigma", 0.0);
  sp.sensors.mag_sigma = kv.get_double("mag_sigma", 0.0);
  sp.alt_sigma = kv.get_double("alt_sigma", 0.0);
  sp.filter = filter_config_from_kv(kv, 1.0 / sp.controller_hz);

  sp.initial.phi = kv.get_double("init_phi_deg", 0.0) * kDeg;
  sp.initial.theta = kv.get_double("init_theta_deg", 0.0) * kDeg;
  sp.initial.psi = kv.get_double("init_psi_deg", 0.0) * kDeg;
  sp.initial.p = kv.get_double("init_p", 0.0);
  sp.initial.q = kv.get_double("init_q", 0.0);
  sp.initial.r = kv.get_double("init_r", 0.0);
  sp.initial.x = kv.get_double("init_x", 0.0);
  sp.initial.y = kv.get_double("init_y", 0.0);
  sp.initial.z = kv.get_double("init_z", 0.0);
  sp.initial.vx = kv.get_double("init_vx", 0.0);
  sp.initial.vy = kv.get_double("init_vy", 0.0);
  sp.initial.vz = kv.get_double("init_vz", 0.0);

  if (kv.has("props")) {
    auto fields = split_csv_row(kv.values.at("props"));
    if (fields.size() != 4) throw std::runtime_error("props needs 4 comma-separated flags");
    for (int i = 0; i < 4; ++i) sp.enabled[i] = std::stoi(fields[i]) != 0;
  }

  auto it = kv.section_rows.find("schedule");
  if (it != kv.section_rows.end()) {
    int row_no = 0;
    for (const auto& row : it->second) {
      ++row_no;
      auto fields = split_csv_row(row);
      if (fields.size() != 5) {
        throw std::runtime_error("schedule row " + std::to_string(row_no) +
                                 ": expected 't, z_d, phi_d_deg, theta_d_deg, psi_d_deg'");
      }
      ScheduleEntry entry;
      entry.t_start = std::stod(fields[0]);
      entry.refs.z_d = std::stod(fields[1]);
      entry.refs.phi_d = std::stod(fields[2]) * kDeg;
      entry.refs.theta_d = std::stod(fields[3]) * kDeg;
      entry.refs.psi_d = std::stod(fields[4]) * kDeg;
      if (!sp.schedule.empty() && entry.t_start < sp.schedule.back().t_start) {
        throw std::runtime_error("schedule row " + std::to_string(row_no) +
                                 ": times must be non-decreasing");
      }
      sp.schedule.push_back(entry);
    }
  }
  return sp;
}

ScenarioSpec load_scenario(const std::string& path) {
  return scenario_from_kv(load_key_value_file(path));
}

void save_scenario(const std::string& path, const ScenarioSpec& sp) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "duration = " << fmt(sp.duration) << "\n";
  out << "controller_hz = " << sp.controller_hz << "\n";
  out << "altitude_decimation = " << sp.altitude_decimation << "\n";
  out << "mode = " << (sp.mode == ScenarioMode::ClosedLoop ? "closed_loop" : "fixed_torque")
      << "\n";
  out << "torque = " << fmt(sp.fixed_torque) << "\n";
  out << "bearing = " << (sp.bearing ? 1 : 0) << "\n";
  out << "quantize = " << (sp.quantize ? 1 : 0) << "\n";
  out << "seed = " << sp.seed << "\n";
  out << "integrator = " << (sp.integrator == IntegratorKind::Adaptive ? "adaptive" : "rk4")
      << "\n";
  out << "rtol = " << fmt(sp.rtol) << "\n";
  out << "atol = " << fmt(sp.atol) << "\n";
  out << "rk4_substeps = " << sp.rk4_substeps << "\n";
  out << "accel_sigma = " << fmt(sp.sensors.accel_sigma) << "\n";
  out << "gyro_sigma = " << fmt(sp.sensors.gyro_sigma) << "\n";
  out << "mag_sigma = " << fmt(sp.sensors.mag_sigma) << "\n";
  out << "alt_sigma = " << fmt(sp.alt_sigma) << "\n";
  out << "alpha_phi = " << fmt(sp.filter.alpha_phi) << "\n";
  out << "alpha_theta = " << fmt(sp.filter.alpha_theta) << "\n";
  out << "alpha_psi = " << fmt(sp.filter.alpha_psi) << "\n";
  out << "alpha_ema_p = " << fmt(sp.filter.alpha_ema_p) << "\n";
  out << "alpha_ema_q = " << fmt(sp.filter.alpha_ema_q) << "\n";
  out << "alpha_ema_r = " << fmt(sp.filter.alpha_ema_r) << "\n";
  out << "init_phi_deg = " << fmt(sp.initial.phi / kDeg) << "\n";
  out << "init_theta_deg = " << fmt(sp.initial.theta / kDeg) << "\n";
  out << "init_psi_deg = " << fmt(sp.initial.psi / kDeg) << "\n";
  out << "init_p = " << fmt(sp.initial.p) << "\n";
  out << "init_q = " << fmt(sp.initial.q) << "\n";
  out << "init_r = " << fmt(sp.initial.r) << "\n";
  out << "init_x = " << fmt(sp.initial.x) << "\n";
  out << "init_y = " << fmt(sp.initial.y) << "\n";
  out << "init_z = " << fmt(sp.initial.z) << "\n";
  out << "init_vx = " << fmt(sp.initial.vx) << "\n";
  out << "init_vy = " << fmt(sp.initial.vy) << "\n";
  out << "init_vz = " << fmt(sp.initial.vz) << "\n";
  out << "props = " << sp.enabled[0] << ", " << sp.enabled[1] << ", " << sp.enabled[2]
      << ", " << sp.enabled[3] << "\n";
  out << "[schedule]\n";
  for (const auto& entry : sp.schedule) {
    out << fmt(entry.t_start) << ", " << fmt(entry.refs.z_d) << ", "
        << fmt(entry.refs.phi_d / kDeg) << ", " << fmt(entry.refs.theta_d / kDeg) << ", "
        << fmt(entry.refs.psi_d / kDeg) << "\n";
  }
}

namespace {

bool diverged(const State& s, const ScenarioSpec& sp, std::string* why) {
  if (std::abs(s.phi) > sp.angle_limit || std::abs(s.theta) > sp.angle_limit) {
    *why = "attitude exceeded the divergence bound";
    return true;
  }
  if (std::abs(s.z) > sp.z_limit) {
    *why = "altitude exceeded the divergence bound";
    return true;
  }
  if (std::abs(s.p) > sp.rate_limit || std::abs(s.q) > sp.rate_limit ||
      std::abs(s.r) > sp.rate_limit) {
    *why = "body rate exceeded the divergence bound";
    return true;
  }
  if (!s.finite()) {
    *why = "state became non-finite";
    return true;
  }
  return false;
}

AxisSummary summarize_axis(const std::vector<TelemetryRecord>& telemetry,
                           Axis axis, double reference, double t_ref,
                           double band) {
  std::vector<TracePoint> trace;
  for (const auto& rec : telemetry) {
    if (rec.t < t_ref) continue;
    double y = 0;
    switch (axis) {
      case Axis::Z: y = rec.state.z; break;
      case Axis::Phi: y = rec.state.phi; break;
      case Axis::Theta: y = rec.state.theta; break;
      case Axis::Psi: y = rec.state.psi; break;
    }
    trace.push_back({rec.t, y});
  }
  AxisSummary sum;
  if (trace.empty()) return sum;
  double y0 = trace.front().y;
  double dir = reference >= y0 ? 1.0 : -1.0;
  for (const auto& pt : trace) {
    sum.overshoot = std::max(sum.overshoot, dir * (pt.y - reference));
  }
  double st = settling_time(trace, reference, band);
  sum.settling_time = std::isfinite(st) && st > 0 ? st - t_ref : st;
  sum.oscillations = count_oscillations(trace, band);
  sum.steady_error = std::abs(trace.back().y - reference);
  return sum;
}

}  // namespace

RunResult run_scenario(const ScenarioSpec& spec, const QuadcopterParams& params,
                       const GainSet& gains, const PropellerModel& prop) {
  auto rep = validate_params(params);
  if (!rep.ok()) throw std::invalid_argument("invalid params: " + rep.failures.front());

  const double dt = 1.0 / spec.controller_hz;
  const long n_ticks = std::lround(spec.duration * spec.controller_hz);
  DynamicsOptions dyn = spec.dynamics;
  dyn.bearing = spec.bearing;
  FilterConfig fc = spec.filter;
  fc.dt = dt;
  AttitudeFilter filter(fc);
  bool any_integral = gains.z.ki > 0 || gains.phi.ki > 0 || gains.theta.ki > 0 ||
                      gains.psi.ki > 0;
  Controller controller(gains, params, prop, spec.altitude_decimation, spec.quantize,
                        any_integral);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double fixed_thrust = 0.0;
  if (spec.mode == ScenarioMode::FixedTorque) {
    fixed_thrust = std::max(0.0, (spec.fixed_torque - prop.g2) / prop.g1);
  }

  RunResult out;
  out.telemetry.reserve(n_ticks);
  State state = spec.initial;
  double z_meas = state.z;

  for (long k = 0; k < n_ticks; ++k) {
    double t = k * dt;
    std::string why;
    if (diverged(state, spec, &why)) {
      out.diverged = true;
      out.message = why + " at t = " + fmt(t);
      break;
    }

    TelemetryRecord rec;
    rec.t = t;
    rec.state = state;
    Thrusts thrusts{};

    if (spec.mode == ScenarioMode::ClosedLoop) {
      ImuReading reading = simulate_imu(state, spec.sensors, rng, t);
      AttitudeEstimate est = filter.step(reading);
      if (k % spec.altitude_decimation == 0) {
        z_meas = state.z + (spec.alt_sigma > 0 ? spec.alt_sigma * gauss(rng) : 0.0);
      }
      References refs = spec.references_at(t);
      AttitudeMeasurement meas{est.phi, est.theta, est.psi, z_meas};
      ControllerResult res = controller.tick(refs, meas, t);
      for (int i = 0; i < 4; ++i) {
        thrusts[i] = spec.enabled[i] ? res.actuated[i] : 0.0;
        rec.commands[i] = spec.enabled[i] ? res.commands[i].scaled : 0;
      }
      rec.phi_f = est.phi;
      rec.theta_f = est.theta;
      rec.psi_f = est.psi;
      rec.outputs = res.outputs;
    } else {
      thrusts = {fixed_thrust, 0.0, fixed_thrust, 0.0};
      for (int i = 0; i < 4; ++i) {
        if (!spec.enabled[i]) thrusts[i] = 0.0;
      }
      rec.phi_f = state.phi;
      rec.theta_f = state.theta;
      rec.psi_f = state.psi;
    }
    rec.thrusts = thrusts;
    out.telemetry.push_back(rec);

    try {
      if (spec.integrator == IntegratorKind::Adaptive) {
        state = integrate_adaptive_to(state, thrusts, t, t + dt, params, prop, dyn,
                                      spec.rtol, spec.atol);
      } else {
        double h = dt / spec.rk4_substeps;
        for (int i = 0; i < spec.rk4_substeps; ++i) {
          state = step_rk4(state, thrusts, h, params, prop, dyn);
        }
      }
    } catch (const std::exception& e) {
      out.diverged = true;
      out.message = std::string("integration failed: ") + e.what();
      break;
    }
    if (spec.mode == ScenarioMode::FixedTorque) {
      // Bench-mounted on the bearing rig: translation is constrained.
      state.x = spec.initial.x;
      state.y = spec.initial.y;
      state.z = spec.initial.z;
      state.vx = state.vy = state.vz = 0.0;
    }
  }

  if (!out.telemetry.empty()) {
    References final_refs = spec.references_at(spec.duration);
    double t_ref = spec.schedule.empty() ? 0.0 : spec.schedule.back().t_start;
    out.summary.z = summarize_axis(out.telemetry, Axis::Z, final_refs.z_d, t_ref,
                                   kAltitudeBand);
    out.summary.phi = summarize_axis(out.telemetry, Axis::Phi, final_refs.phi_d, t_ref,
                                     kAngleBand);
    out.summary.theta = summarize_axis(out.telemetry, Axis::Theta, final_refs.theta_d,
                                       t_ref, kAngleBand);
    out.summary.psi = summarize_axis(out.telemetry, Axis::Psi, final_refs.psi_d, t_ref,
                                     kAngleBand);
    out.summary.r_steady = out.telemetry.back().state.r;
    // Steady yaw spin: |dr/dt| below 1e-3 rad/s^2 held over the last second.
    long window = std::min<long>(spec.controller_hz, (long)out.telemetry.size() - 1);
    bool steady = window > 0;
    for (long i = (long)out.telemetry.size() - window; steady && i < (long)out.telemetry.size(); ++i) {
      double drdt = (out.telemetry[i].state.r - out.telemetry[i - 1].state.r) / dt;
      if (std::abs(drdt) >= 1e-3) steady = false;
    }
    out.summary.r_converged = steady;
  }
  return out;
}

std::string telemetry_to_csv(const std::vector<TelemetryRecord>& records) {
  std::ostringstream out;
  out << "t,phi_deg,theta_deg,psi_deg,p,q,r,x,y,z,vx,vy,vz,"
         "phi_f_deg,theta_f_deg,psi_f_deg,f1,f2,f3,f4,"
         "u_z,u_phi,u_theta,u_psi,cmd1,cmd2,cmd3,cmd4\n";
  for (const auto& rec : records) {
    const State& s = rec.state;
    out << fmt(rec.t) << ',' << fmt(s.phi / kDeg) << ',' << fmt(s.theta / kDeg) << ','
        << fmt(s.psi / kDeg) << ',' << fmt(s.p) << ',' << fmt(s.q) << ',' << fmt(s.r)
        << ',' << fmt(s.x) << ',' << fmt(s.y) << ',' << fmt(s.z) << ',' << fmt(s.vx)
        << ',' << fmt(s.vy) << ',' << fmt(s.vz) << ',' << fmt(rec.phi_f / kDeg) << ','
        << fmt(rec.theta_f / kDeg) << ',' << fmt(rec.psi_f / kDeg) << ','
        << fmt(rec.thrusts[0]) << ',' << fmt(rec.thrusts[1]) << ','
        << fmt(rec.thrusts[2]) << ',' << fmt(rec.thrusts[3]) << ','
        << fmt(rec.outputs.u_z) << ',' << fmt(rec.outputs.u_phi) << ','
        << fmt(rec.outputs.u_theta) << ',' << fmt(rec.outputs.u_psi) << ','
        << rec.commands[0] << ',' << rec.commands[1] << ',' << rec.commands[2] << ','
        << rec.commands[3] << '\n';
  }
  return out.str();
}

void write_telemetry(const std::string& path, const std::vector<TelemetryRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << telemetry_to_csv(records);
}

std::vector<TracePoint> extract_axis_trace(const std::vector<TelemetryRecord>& telemetry,
                                           Axis axis) {
  std::vector<TracePoint> trace;
  trace.reserve(telemetry.size());
  for (const auto& rec : telemetry) {
    double y = 0;
    switch (axis) {
      case Axis::Z: y = rec.state.z; break;
      case Axis::Phi: y = rec.state.phi; break;
      case Axis::Theta: y = rec.state.theta; break;
      case Axis::Psi: y = rec.state.psi; break;
    }
    trace.push_back({rec.t, y});
  }
  return trace;
}

StepSimulator make_step_simulator(Axis axis, double magnitude, double duration,
                                  const GainSet& base_gains,
                                  const QuadcopterParams& params,
                                  const PropellerModel& prop) {
  return [=](const PidGains& axis_gains) {
    GainSet gains = base_gains;
    switch (axis) {
      case Axis::Z: gains.z = axis_gains; break;
      case Axis::Phi: gains.phi = axis_gains; break;
      case Axis::Theta: gains.theta = axis_gains; break;
      case Axis::Psi: gains.psi = axis_gains; break;
    }
    ScenarioSpec sp;
    sp.duration = duration;
    ScheduleEntry entry;
    switch (axis) {
      case Axis::Z: entry.refs.z_d = magnitude; break;
      case Axis::Phi: entry.refs.phi_d = magnitude; break;
      case Axis::Theta: entry.refs.theta_d = magnitude; break;
      case Axis::Psi: entry.refs.psi_d = magnitude; break;
    }
    sp.schedule.push_back(entry);
    RunResult result = run_scenario(sp, params, gains, prop);
    if (result.diverged) {
      // A divergent candidate is maximally oscillatory as far as the
      // tuner is concerned; return what we have.
      if (result.telemetry.empty()) {
        throw std::runtime_error("step simulation diverged immediately: " + result.message);
      }
    }
    return extract_axis_trace(result.telemetry, axis);
  };
}

std::vector<std::pair<double, double>> yaw_spin_steady_states(
    const std::vector<double>& torques, const QuadcopterParams& params,
    const PropellerModel& prop, double duration) {
  std::vector<std::pair<double, double>> points;
  GainSet no_gains;
  for (double tau : torques) {
    ScenarioSpec sp;
    sp.mode = ScenarioMode::FixedTorque;
    sp.fixed_torque = tau;
    sp.bearing = true;
    sp.duration = duration;
    sp.enabled = {true, false, true, false};
    RunResult result = run_scenario(sp, params, no_gains, prop);
    if (result.diverged) {
      throw std::runtime_error("yaw-spin scenario diverged: " + result.message);
    }
    if (!result.summary.r_converged) {
      throw std::runtime_error("yaw-spin scenario did not reach steady state");
    }
    points.emplace_back(2.0 * tau, result.summary.r_steady);
  }
  return points;
}

}  // namespace quadsim
