#pragma once

#include <array>
#include <functional>
#include <vector>

#include "quadsim/model.hpp"
#include "quadsim/propeller.hpp"

namespace quadsim {

struct PidGains {
  double kp = 0, kd = 0, ki = 0;
};

/// One gain triple per controlled variable.
struct GainSet {
  PidGains z, phi, theta, psi;
};

GainSet gains_from_kv(const struct KeyValueFile& kv);

/// Discrete PID memory: running error integral plus the previous
/// measurement for the derivative-on-measurement term.
struct PidState {
  double integral = 0;
  double prev_y = 0;
  double prev_t = 0;
  bool has_prev = false;
};

/// One step of the discretized PID law. The derivative acts on the
/// measurement only, so reference steps produce no derivative kick.
/// integral_limit, when positive, clamps ki * integral to that magnitude.
/// Throws std::invalid_argument on a non-increasing timestamp.
double pid_step(const PidGains& gains, PidState& state, double y_d, double y,
                double t, double integral_limit = 0.0);

struct ControlOutputs {
  double u_z = 0, u_phi = 0, u_theta = 0, u_psi = 0;  // N
};

/// Thrust allocation about the base weight B with tilt compensation on
/// the collective term. Each thrust is clamped to [0, 2B].
/// Throws std::domain_error when the tilt reaches 90 degrees.
std::array<double, 4> mixer(double B, const ControlOutputs& u, double phi,
                            double theta);

struct References {
  double z_d = 0, phi_d = 0, theta_d = 0, psi_d = 0;
};

struct AttitudeMeasurement {
  double phi = 0, theta = 0, psi = 0, z = 0;
};

struct ControllerResult {
  ControlOutputs outputs;                // clamped axis efforts
  std::array<double, 4> thrusts{};       // commanded thrusts after clamping (N)
  std::array<MotorCommand, 4> commands{}; // quantized motor commands
  std::array<double, 4> actuated{};      // thrusts after quantization round-trip (N)
  bool any_saturated = false;
};

/// Four-axis flight controller: PID per axis, Table-3 output clamps,
/// mixer, thrust-to-command conversion with quantization. The altitude
/// loop recomputes only every `altitude_decimation` ticks and holds its
/// output in between.
class Controller {
 public:
  Controller(const GainSet& gains, const QuadcopterParams& params,
             const PropellerModel& prop, int altitude_decimation = 10,
             bool quantize = true, bool clamp_integral = false);

  ControllerResult tick(const References& ref, const AttitudeMeasurement& meas,
                        double t);

  void reset();

 private:
  GainSet gains_;
  QuadcopterParams params_;
  PropellerModel prop_;
  int altitude_decimation_;
  bool quantize_;
  bool clamp_integral_;
  double base_;
  long tick_count_ = 0;
  double held_u_z_ = 0;
  PidState pid_z_, pid_phi_, pid_theta_, pid_psi_;
};

struct TracePoint {
  double t;
  double y;
};

/// Number of full oscillations of a settling trace: deadband-qualified
/// sign changes of (y - y_final), two sign changes per full cycle,
/// rounded up.
int count_oscillations(const std::vector<TracePoint>& trace, double deadband);

/// Last time the trace leaves the +/- tolerance band around the
/// reference; 0 if it never leaves. Infinity if it ends outside.
double settling_time(const std::vector<TracePoint>& trace, double reference,
                     double tolerance);

struct TuneSpec {
  int target_oscillations = 1;
  double reference = 1.0;        // step magnitude the simulator applies
  double settling_window = 3.0;  // trace is evaluated over this window (s)
  double tolerance = 0.01;       // deadband / allowable steady error
  double kp_init = 0.05;
  double kp_max = 1e4;
  double kd_init = 0.01;
  double kd_max = 1e4;
  int bisection_iters = 24;
};

/// Closed-loop step-response generator supplied by the caller: given a
/// gain triple for the axis under tuning, return the axis trace.
using StepSimulator = std::function<std::vector<TracePoint>(const PidGains&)>;

/// Reproduces the manual tuning recipe: grow kp until the step response
/// shows the target oscillation count, then grow kd until no oscillation
/// remains; ki stays zero. Throws std::runtime_error with diagnostics if
/// a search exhausts its bounds.
PidGains auto_tune_axis(const StepSimulator& simulate, const TuneSpec& spec);

}  // namespace quadsim
