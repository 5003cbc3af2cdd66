#include "quadsim/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "quadsim/key_value.hpp"

namespace quadsim {

GainSet gains_from_kv(const KeyValueFile& kv) {
  GainSet g;
  g.z = {kv.get_double("kp_z"), kv.get_double("kd_z"), kv.get_double("ki_z", 0.0)};
  g.phi = {kv.get_double("kp_phi"), kv.get_double("kd_phi"), kv.get_double("ki_phi", 0.0)};
  g.theta = {kv.get_double("kp_theta"), kv.get_double("kd_theta"),
             kv.get_double("ki_theta", 0.0)};
  g.psi = {kv.get_double("kp_psi"), kv.get_double("kd_psi"), kv.get_double("ki_psi", 0.0)};
  return g;
}

double pid_step(const PidGains& gains, PidState& state, double y_d, double y,
                double t, double integral_limit) {
  double error = y_d - y;
  double derivative = 0.0;
  if (state.has_prev) {
    double dt = t - state.prev_t;
    if (!(dt > 0.0)) throw std::invalid_argument("PID timestamp must strictly increase");
    derivative = (y - state.prev_y) / dt;
    state.integral += error * dt;
  }
  if (integral_limit > 0.0 && gains.ki > 0.0) {
    double cap = integral_limit / gains.ki;
    state.integral = std::clamp(state.integral, -cap, cap);
  }
  state.prev_y = y;
  state.prev_t = t;
  state.has_prev = true;
  return gains.kp * error - gains.kd * derivative + gains.ki * state.integral;
}

std::array<double, 4> mixer(double B, const ControlOutputs& u, double phi,
                            double theta) {
  if (std::abs(phi) >= M_PI / 2.0 || std::abs(theta) >= M_PI / 2.0) {
    throw std::domain_error("mixer undefined at 90 degree tilt");
  }
  double u_z = u.u_z / (std::cos(phi) * std::cos(theta));
  std::array<double, 4> f = {
      B + u_z - u.u_theta + u.u_psi,
      B + u_z + u.u_phi - u.u_psi,
      B + u_z + u.u_theta + u.u_psi,
      B + u_z - u.u_phi - u.u_psi,
  };
  for (double& fi : f) fi = std::clamp(fi, 0.0, 2.0 * B);
  return f;
}

Controller::Controller(const GainSet& gains, const QuadcopterParams& params,
                       const PropellerModel& prop, int altitude_decimation,
                       bool quantize, bool clamp_integral)
    : gains_(gains),
      params_(params),
      prop_(prop),
      altitude_decimation_(altitude_decimation),
      quantize_(quantize),
      clamp_integral_(clamp_integral),
      base_(base_weight(params)) {
  if (altitude_decimation_ < 1) throw std::invalid_argument("altitude decimation must be >= 1");
}

void Controller::reset() {
  tick_count_ = 0;
  held_u_z_ = 0;
  pid_z_ = {};
  pid_phi_ = {};
  pid_theta_ = {};
  pid_psi_ = {};
}

ControllerResult Controller::tick(const References& ref,
                                  const AttitudeMeasurement& meas, double t) {
  double integral_limit = clamp_integral_ ? base_ : 0.0;
  if (tick_count_ % altitude_decimation_ == 0) {
    held_u_z_ = pid_step(gains_.z, pid_z_, ref.z_d, meas.z, t, integral_limit);
  }
  ++tick_count_;

  ControlOutputs u;
  u.u_z = held_u_z_;
  u.u_phi = pid_step(gains_.phi, pid_phi_, ref.phi_d, meas.phi, t, integral_limit);
  u.u_theta = pid_step(gains_.theta, pid_theta_, ref.theta_d, meas.theta, t, integral_limit);
  u.u_psi = pid_step(gains_.psi, pid_psi_, ref.psi_d, meas.psi, t, integral_limit);

  u.u_z = std::clamp(u.u_z, -base_, base_);
  u.u_phi = std::clamp(u.u_phi, -base_, base_);
  u.u_theta = std::clamp(u.u_theta, -base_, base_);
  u.u_psi = std::clamp(u.u_psi, -base_, base_);

  ControllerResult res;
  res.outputs = u;
  res.thrusts = mixer(base_, u, meas.phi, meas.theta);
  for (int i = 0; i < 4; ++i) {
    PwmResult pwm = thrust_to_pwm(res.thrusts[i], prop_);
    res.any_saturated = res.any_saturated || pwm.saturated;
    if (quantize_) {
      res.commands[i] = quantize_command(pwm.pwm);
      res.actuated[i] = command_to_thrust(res.commands[i], prop_);
    } else {
      res.commands[i].raw = pwm.pwm;
      res.commands[i].scaled = static_cast<int>(std::lround(pwm.pwm * kScaledMax / kCommandMax));
      res.actuated[i] = pwm_to_thrust(pwm.pwm, prop_);
    }
  }
  return res;
}

int count_oscillations(const std::vector<TracePoint>& trace, double deadband) {
  if (trace.empty()) throw std::invalid_argument("empty trace");
  double y_final = trace.back().y;
  int sign_changes = 0;
  int last_sign = 0;
  for (const auto& pt : trace) {
    double e = pt.y - y_final;
    if (std::abs(e) <= deadband) continue;  // inside the deadband: no crossing
    int s = e > 0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++sign_changes;
    last_sign = s;
  }
  return (sign_changes + 1) / 2;
}

double settling_time(const std::vector<TracePoint>& trace, double reference,
                     double tolerance) {
  if (trace.empty()) throw std::invalid_argument("empty trace");
  if (std::abs(trace.back().y - reference) > tolerance) {
    return std::numeric_limits<double>::infinity();
  }
  double last_out = 0.0;
  bool any_out = false;
  for (const auto& pt : trace) {
    if (std::abs(pt.y - reference) > tolerance) {
      last_out = pt.t;
      any_out = true;
    }
  }
  return any_out ? last_out : 0.0;
}

namespace {

int evaluate(const StepSimulator& simulate, const PidGains& g, const TuneSpec& spec,
             double* steady_error) {
  std::vector<TracePoint> trace = simulate(g);
  if (steady_error) *steady_error = std::abs(trace.back().y - spec.reference);
  return count_oscillations(trace, spec.tolerance);
}

}  // namespace

PidGains auto_tune_axis(const StepSimulator& simulate, const TuneSpec& spec) {
  PidGains g{spec.kp_init, 0.0, 0.0};

  // kp phase: strengthen the proportional action until the step response
  // oscillates the desired number of times, then bisect down to the
  // smallest such kp.
  if (spec.target_oscillations > 0) {
    double lo = 0.0;
    double steady = 0.0;
    int count = evaluate(simulate, g, spec, &steady);
    while (count < spec.target_oscillations) {
      lo = g.kp;
      g.kp *= 1.5;
      if (g.kp > spec.kp_max) {
        throw std::runtime_error("kp search exhausted: oscillation target " +
                                 std::to_string(spec.target_oscillations) +
                                 " not reachable below kp_max");
      }
      count = evaluate(simulate, g, spec, &steady);
    }
    if (lo > 0.0) {
      double hi = g.kp;
      for (int i = 0; i < spec.bisection_iters; ++i) {
        double mid = 0.5 * (lo + hi);
        PidGains gm{mid, 0.0, 0.0};
        if (evaluate(simulate, gm, spec, nullptr) >= spec.target_oscillations) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      g.kp = hi;
    }
  } else {
    // Target of zero oscillations: grow kp only as far as the steady
    // error demands, never past the first overshoot.
    double steady = 0.0;
    int count = evaluate(simulate, g, spec, &steady);
    while (steady > spec.tolerance && count == 0) {
      double next = g.kp * 1.5;
      if (next > spec.kp_max) break;
      PidGains gn{next, 0.0, 0.0};
      double steady_n = 0.0;
      int count_n = evaluate(simulate, gn, spec, &steady_n);
      if (count_n > 0) break;
      g.kp = next;
      steady = steady_n;
      count = count_n;
    }
  }

  // kd phase: damp until no oscillation remains.
  if (evaluate(simulate, g, spec, nullptr) > 0) {
    double lo = 0.0;
    g.kd = spec.kd_init;
    while (evaluate(simulate, g, spec, nullptr) > 0) {
      lo = g.kd;
      g.kd *= 1.5;
      if (g.kd > spec.kd_max) {
        throw std::runtime_error("kd search exhausted: oscillations persist up to kd_max");
      }
    }
    double hi = g.kd;
    for (int i = 0; i < spec.bisection_iters; ++i) {
      double mid = 0.5 * (lo + hi);
      PidGains gm{g.kp, mid, 0.0};
      if (evaluate(simulate, gm, spec, nullptr) == 0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    g.kd = hi;
  }

  double steady = 0.0;
  int count = evaluate(simulate, g, spec, &steady);
  if (count > spec.target_oscillations || steady > spec.tolerance) {
    throw std::runtime_error("tuned gains fail re-check: oscillations=" +
                             std::to_string(count) +
                             " steady_error=" + std::to_string(steady));
  }
  return g;
}

}  // namespace quadsim
