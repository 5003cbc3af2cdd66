#include "quadsim/propeller.hpp"

#include <cmath>
#include <stdexcept>

namespace quadsim {

double pwm_to_thrust(double pwm, const PropellerModel& m) {
  if (!(pwm >= 0.0 && pwm <= kCommandMax)) {
    throw std::domain_error("PWM command outside [0, 255]");
  }
  if (pwm < m.h2) return 0.0;  // ESC idles below the dead zone
  double d = pwm - m.h2;
  return m.h1 * d * d;
}

PwmResult thrust_to_pwm(double thrust, const PropellerModel& m) {
  if (!(thrust >= 0.0)) throw std::domain_error("thrust must be non-negative");
  PwmResult res;
  res.pwm = m.h2 + std::sqrt(thrust / m.h1);
  if (res.pwm > kCommandMax) {
    res.pwm = kCommandMax;
    res.saturated = true;
  }
  return res;
}

double omega_to_thrust(double omega, const PropellerModel& m) {
  if (!(omega >= 0.0)) throw std::domain_error("omega must be non-negative");
  return m.c1 * omega * omega;
}

double thrust_to_omega(double thrust, const PropellerModel& m) {
  if (!(thrust >= 0.0)) throw std::domain_error("thrust must be non-negative");
  return std::sqrt(thrust / m.c1);
}

double thrust_to_torque(double thrust, const PropellerModel& m) {
  if (!(thrust >= 0.0)) throw std::domain_error("thrust must be non-negative");
  if (thrust == 0.0) return 0.0;  // sgn(0) = 0
  return m.g1 * thrust + m.g2;
}

double signed_omega_sum(double w1, double w2, double w3, double w4) {
  return -w1 + w2 - w3 + w4;
}

MotorCommand quantize_command(double raw) {
  MotorCommand c;
  c.raw = raw;
  if (raw < 0.0) {
    c.raw = 0.0;
    c.clamped = true;
  } else if (raw > kCommandMax) {
    c.raw = kCommandMax;
    c.clamped = true;
  }
  c.scaled = static_cast<int>(std::lround(c.raw * kScaledMax / kCommandMax));
  return c;
}

}  // namespace quadsim
