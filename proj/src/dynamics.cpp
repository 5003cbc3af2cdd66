#include "quadsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadsim {

namespace {

inline double sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double drag_torque(double r, const QuadcopterParams& p, bool bearing) {
  double gamma2_eff = bearing ? p.gamma2 : 0.0;
  return (p.gamma1 * r * r + gamma2_eff) * sgn(r);
}

Eigen::Vector3d rotational_derivative(const State& s, const BodyTorques& t,
                                      double omega_sum, const QuadcopterParams& p,
                                      const DynamicsOptions& opts) {
  double tau_d = drag_torque(s.r, p, opts.bearing);
  double gyro_q_sign = opts.flip_pitch_gyro_sign ? 1.0 : -1.0;
  Eigen::Vector3d out;
  out(0) = t.tau_phi / p.Jxx
           - (p.Jzz - p.Jyy) / p.Jxx * s.q * s.r
           - p.Jp / p.Jxx * s.q * omega_sum;
  out(1) = t.tau_theta / p.Jyy
           - (p.Jxx - p.Jzz) / p.Jyy * s.p * s.r
           + gyro_q_sign * p.Jp / p.Jyy * s.p * omega_sum;
  out(2) = t.tau_psi / p.Jzz
           - (p.Jyy - p.Jxx) / p.Jzz * s.p * s.q
           - tau_d / p.Jzz;
  return out;
}

Eigen::Matrix3d rotation_body_to_inertial(double phi, double theta, double psi) {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  Eigen::Matrix3d R;
  R = AngleAxisd(psi, Vector3d::UnitZ()) *
      AngleAxisd(theta, Vector3d::UnitY()) *
      AngleAxisd(phi, Vector3d::UnitX());
  return R;
}

Eigen::Vector3d translational_derivative(const State& s, double total_thrust,
                                         const QuadcopterParams& p) {
  Eigen::Matrix3d R = rotation_body_to_inertial(s.phi, s.theta, s.psi);
  Eigen::Vector3d accel = R * Eigen::Vector3d(0, 0, total_thrust / p.M);
  accel(2) -= p.g;
  return accel;
}

Eigen::Vector3d body_rates_to_euler_rates(const State& s) {
  if (std::abs(s.theta) >= M_PI / 2.0 - 1e-6) {
    throw std::domain_error("Euler-rate transform singular near theta = pi/2");
  }
  double sphi = std::sin(s.phi), cphi = std::cos(s.phi);
  double ttheta = std::tan(s.theta), ctheta = std::cos(s.theta);
  Eigen::Vector3d out;
  out(0) = s.p + s.q * sphi * ttheta + s.r * cphi * ttheta;
  out(1) = s.q * cphi - s.r * sphi;
  out(2) = (s.q * sphi + s.r * cphi) / ctheta;
  return out;
}

BodyTorques torques_from_thrusts(const Thrusts& f, const QuadcopterParams& p,
                                 const PropellerModel& pm) {
  BodyTorques t;
  t.tau_phi = p.l * (f[1] - f[3]);
  t.tau_theta = p.l * (f[2] - f[0]);
  t.tau_psi = thrust_to_torque(f[0], pm) - thrust_to_torque(f[1], pm) +
              thrust_to_torque(f[2], pm) - thrust_to_torque(f[3], pm);
  return t;
}

State::Vec state_derivative(const State& s, const Thrusts& f,
                            const QuadcopterParams& p, const PropellerModel& pm,
                            const DynamicsOptions& opts) {
  BodyTorques t = torques_from_thrusts(f, p, pm);
  double omega_sum = signed_omega_sum(
      thrust_to_omega(f[0], pm), thrust_to_omega(f[1], pm),
      thrust_to_omega(f[2], pm), thrust_to_omega(f[3], pm));
  Eigen::Vector3d euler_rates = body_rates_to_euler_rates(s);
  Eigen::Vector3d rate_dot = rotational_derivative(s, t, omega_sum, p, opts);
  double total_thrust = f[0] + f[1] + f[2] + f[3];
  Eigen::Vector3d vel_dot = translational_derivative(s, total_thrust, p);

  State::Vec d;
  d.segment<3>(0) = euler_rates;
  d.segment<3>(3) = rate_dot;
  d(6) = s.vx;
  d(7) = s.vy;
  d(8) = s.vz;
  d.segment<3>(9) = vel_dot;
  return d;
}

State step_rk4(const State& s, const Thrusts& f, double dt,
               const QuadcopterParams& p, const PropellerModel& pm,
               const DynamicsOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  auto deriv = [&](const State::Vec& v) {
    return state_derivative(State::from_vec(v), f, p, pm, opts);
  };
  State::Vec y = s.to_vec();
  State::Vec k1 = deriv(y);
  State::Vec k2 = deriv(y + 0.5 * dt * k1);
  State::Vec k3 = deriv(y + 0.5 * dt * k2);
  State::Vec k4 = deriv(y + dt * k3);
  State::Vec out = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) throw std::runtime_error("RK4 step produced non-finite state");
  return State::from_vec(out);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

std::vector<TrajectoryPoint> integrate_adaptive(const State& s0, const Thrusts& f,
                                                double t0, double t1,
                                                const QuadcopterParams& p,
                                                const PropellerModel& pm,
                                                const DynamicsOptions& opts,
                                                double rtol, double atol) {
  if (!(rtol > 0.0 && atol > 0.0)) throw std::invalid_argument("rtol/atol must be positive");
  if (!(t1 > t0)) throw std::invalid_argument("t1 must exceed t0");

  auto deriv = [&](const State::Vec& v) {
    return state_derivative(State::from_vec(v), f, p, pm, opts);
  };

  std::vector<TrajectoryPoint> traj;
  double t = t0;
  State::Vec y = s0.to_vec();
  traj.push_back({t, s0});

  double h = std::min(1e-3, t1 - t0);
  const double h_min = (t1 - t0) * 1e-14;
  State::Vec k1 = deriv(y);  // FSAL

  while (t < t1) {
    h = std::min(h, t1 - t);
    State::Vec k2 = deriv(y + h * (a21 * k1));
    State::Vec k3 = deriv(y + h * (a31 * k1 + a32 * k2));
    State::Vec k4 = deriv(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    State::Vec k5 = deriv(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    State::Vec k6 = deriv(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    State::Vec y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    State::Vec k7 = deriv(y5);
    State::Vec err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (int i = 0; i < 12; ++i) {
      double scale = atol + rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
      double r = err_vec(i) / scale;
      err += r * r;
    }
    err = std::sqrt(err / 12.0);

    if (err <= 1.0) {
      t += h;
      y = y5;
      k1 = k7;
      if (!y.allFinite()) throw std::runtime_error("adaptive step produced non-finite state");
      traj.push_back({t, State::from_vec(y)});
    }
    double factor = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(factor, 0.2, 5.0);
    if (h < h_min) throw std::runtime_error("adaptive integrator step-size underflow");
  }
  return traj;
}

State integrate_adaptive_to(const State& s0, const Thrusts& f, double t0, double t1,
                            const QuadcopterParams& p, const PropellerModel& pm,
                            const DynamicsOptions& opts, double rtol, double atol) {
  return integrate_adaptive(s0, f, t0, t1, p, pm, opts, rtol, atol).back().state;
}

}  // namespace quadsim
