#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "quadsim/model.hpp"
#include "quadsim/propeller.hpp"

namespace quadsim {

struct BodyTorques {
  double tau_phi = 0, tau_theta = 0, tau_psi = 0;  // N m
};

struct DynamicsOptions {
  bool bearing = false;              // include the gamma2 friction offset
  bool flip_pitch_gyro_sign = false; // sensitivity switch for the q-row gyroscopic term
};

using Thrusts = std::array<double, 4>;  // per-propeller thrust (N)

/// Yaw drag torque (gamma1 r^2 + gamma2_eff) sgn(r) with sgn(0) = 0.
/// gamma2 participates only when the quadcopter is tied to the bearing.
double drag_torque(double r, const QuadcopterParams& p, bool bearing);

/// Rigid-body angular accelerations (pdot, qdot, rdot) including the
/// inertia-coupling, propeller-gyroscopic, and yaw-drag terms.
Eigen::Vector3d rotational_derivative(const State& s, const BodyTorques& t,
                                      double omega_sum, const QuadcopterParams& p,
                                      const DynamicsOptions& opts);

/// Flat-Earth translational accelerations: total thrust along the body z
/// axis rotated into the inertial frame (ZYX Euler), minus gravity.
Eigen::Vector3d translational_derivative(const State& s, double total_thrust,
                                         const QuadcopterParams& p);

/// Kinematic transform from body rates (p, q, r) to Euler angle rates.
/// Throws std::domain_error within 1e-6 of the theta = pi/2 singularity.
Eigen::Vector3d body_rates_to_euler_rates(const State& s);

/// ZYX body-to-inertial rotation matrix.
Eigen::Matrix3d rotation_body_to_inertial(double phi, double theta, double psi);

/// Body torques produced by the four thrusts in cross configuration:
/// tau_phi = l (f2 - f4), tau_theta = l (f3 - f1), tau_psi from the
/// per-propeller reaction torques with propellers 1 and 3 positive.
BodyTorques torques_from_thrusts(const Thrusts& f, const QuadcopterParams& p,
                                 const PropellerModel& pm);

/// Full 12-state time derivative for constant per-propeller thrusts.
State::Vec state_derivative(const State& s, const Thrusts& f,
                            const QuadcopterParams& p, const PropellerModel& pm,
                            const DynamicsOptions& opts);

/// One classical RK4 step with thrusts held constant.
/// Throws std::runtime_error if the result is non-finite.
State step_rk4(const State& s, const Thrusts& f, double dt,
               const QuadcopterParams& p, const PropellerModel& pm,
               const DynamicsOptions& opts);

struct TrajectoryPoint {
  double t;
  State state;
};

/// Dormand-Prince 4(5) embedded pair with adaptive step control;
/// thrusts held constant over [t0, t1]. Returns accepted steps plus the
/// exact endpoint. Throws std::runtime_error on step-size underflow.
std::vector<TrajectoryPoint> integrate_adaptive(const State& s0, const Thrusts& f,
                                                double t0, double t1,
                                                const QuadcopterParams& p,
                                                const PropellerModel& pm,
                                                const DynamicsOptions& opts,
                                                double rtol = 1e-6,
                                                double atol = 1e-9);

/// Endpoint-only convenience wrapper around integrate_adaptive.
State integrate_adaptive_to(const State& s0, const Thrusts& f, double t0, double t1,
                            const QuadcopterParams& p, const PropellerModel& pm,
                            const DynamicsOptions& opts, double rtol = 1e-6,
                            double atol = 1e-9);

/// Rotational kinetic energy (Jxx p^2 + Jyy q^2 + Jzz r^2) / 2.
inline double rotational_energy(const State& s, const QuadcopterParams& p) {
  return 0.5 * (p.Jxx * s.p * s.p + p.Jyy * s.q * s.q + p.Jzz * s.r * s.r);
}

}  // namespace quadsim
