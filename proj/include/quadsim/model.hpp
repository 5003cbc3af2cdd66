#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace quadsim {

/// Physical constants of the airframe. Inertia is stored as the three
/// diagonal terms only; the body is symmetric enough that the products
/// of inertia vanish.
struct QuadcopterParams {
  double M;       ///< total mass (kg)
  double l;       ///< arm length, COM to motor axis (m)
  double g;       ///< gravitational acceleration (m/s^2)
  double Jxx;     ///< roll axis moment of inertia (kg m^2)
  double Jyy;     ///< pitch axis moment of inertia (kg m^2)
  double Jzz;     ///< yaw axis moment of inertia (kg m^2)
  double Jp;      ///< propeller axial moment of inertia (kg m^2)
  double gamma1;  ///< quadratic yaw drag coefficient (N m / (rad/s)^2)
  double gamma2;  ///< bearing kinetic-friction offset (N m)
};

/// Fitted propeller coefficients: thrust vs PWM command, thrust vs
/// angular speed, and reaction torque vs thrust.
struct PropellerModel {
  double h1;  ///< thrust per squared command count (N/count^2)
  double h2;  ///< command dead-zone offset (counts)
  double c1;  ///< thrust per squared angular speed (N/(rad/s)^2)
  double g1;  ///< torque per thrust slope (N m / N)
  double g2;  ///< torque offset (N m)
};

/// 12-dimensional flight state. Angles in radians, positions in meters,
/// velocities are inertial-frame.
struct State {
  double phi = 0, theta = 0, psi = 0;  // Euler angles (rad)
  double p = 0, q = 0, r = 0;          // body angular rates (rad/s)
  double x = 0, y = 0, z = 0;          // inertial position (m)
  double vx = 0, vy = 0, vz = 0;       // inertial velocity (m/s)

  using Vec = Eigen::Matrix<double, 12, 1>;

  Vec to_vec() const {
    Vec v;
    v << phi, theta, psi, p, q, r, x, y, z, vx, vy, vz;
    return v;
  }
  static State from_vec(const Vec& v) {
    State s;
    s.phi = v(0); s.theta = v(1); s.psi = v(2);
    s.p = v(3); s.q = v(4); s.r = v(5);
    s.x = v(6); s.y = v(7); s.z = v(8);
    s.vx = v(9); s.vy = v(10); s.vz = v(11);
    return s;
  }
  bool finite() const { return to_vec().allFinite(); }
};

enum class ValidationLevel { Pass, Warn, Fail };

struct ValidationReport {
  ValidationLevel level = ValidationLevel::Pass;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
  bool ok() const { return level != ValidationLevel::Fail; }
};

/// Checks positivity of masses/lengths/inertias. The planar-body bound
/// Jzz <= Jxx + Jyy is only a warning: measured inertia sets can violate
/// it slightly.
ValidationReport validate_params(const QuadcopterParams& p);

ValidationReport validate_propeller(const PropellerModel& m);

/// Per-motor hover thrust share B = M g / 4.
inline double base_weight(const QuadcopterParams& p) { return p.M * p.g / 4.0; }

}  // namespace quadsim
