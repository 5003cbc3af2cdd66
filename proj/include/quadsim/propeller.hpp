#pragma once

#include "quadsim/model.hpp"

namespace quadsim {

/// Motor command on the native 0-255 scale and its 0-40000 quantization.
struct MotorCommand {
  double raw = 0;   // counts, real-valued pre-quantization
  int scaled = 0;   // round(raw * 40000 / 255)
  bool clamped = false;
};

inline constexpr double kCommandMax = 255.0;
inline constexpr int kScaledMax = 40000;

struct PwmResult {
  double pwm = 0;        // counts on the 0-255 scale
  bool saturated = false;
};

/// f = h1 (P - h2)^2 above the dead zone, zero below it.
/// Throws std::domain_error for P outside [0, 255].
double pwm_to_thrust(double pwm, const PropellerModel& m);

/// Inverse of pwm_to_thrust on [h2, 255]: P = h2 + sqrt(f / h1).
/// Demands above the 255-count ceiling clamp and set the saturated flag.
PwmResult thrust_to_pwm(double thrust, const PropellerModel& m);

/// f = c1 w^2 and its inverse.
double omega_to_thrust(double omega, const PropellerModel& m);
double thrust_to_omega(double thrust, const PropellerModel& m);

/// tau = (g1 f + g2) sgn(f), with sgn(0) = 0.
double thrust_to_torque(double thrust, const PropellerModel& m);

/// Net propeller speed Omega = -w1 + w2 - w3 + w4 (propellers 1 and 3
/// spin opposite to 2 and 4).
double signed_omega_sum(double w1, double w2, double w3, double w4);

/// Quantizes a 0-255 command onto the 0-40000 microcontroller scale.
/// Out-of-range input is clamped and flagged, not rejected.
MotorCommand quantize_command(double raw);

/// Thrust actually delivered for a quantized command.
inline double command_to_thrust(const MotorCommand& c, const PropellerModel& m) {
  return pwm_to_thrust(c.scaled * kCommandMax / kScaledMax, m);
}

}  // namespace quadsim
