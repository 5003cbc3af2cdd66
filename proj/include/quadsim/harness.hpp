#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "quadsim/control.hpp"
#include "quadsim/dynamics.hpp"
#include "quadsim/model.hpp"
#include "quadsim/sensing.hpp"

namespace quadsim {

struct ScheduleEntry {
  double t_start = 0;
  References refs;  // radians internally
};

enum class ScenarioMode { ClosedLoop, FixedTorque };
enum class IntegratorKind { Adaptive, Rk4 };

/// Everything needed to reproduce one closed-loop run.
struct ScenarioSpec {
  double duration = 5.0;
  int controller_hz = 450;
  int altitude_decimation = 10;
  ScenarioMode mode = ScenarioMode::ClosedLoop;
  double fixed_torque = 0.0;  // per-propeller reaction torque in FixedTorque mode (N m)
  std::vector<ScheduleEntry> schedule;
  State initial;
  SensorConfig sensors;
  double alt_sigma = 0.0;
  FilterConfig filter;  // dt is filled from controller_hz
  bool bearing = false;
  bool quantize = true;
  std::array<bool, 4> enabled = {true, true, true, true};
  unsigned long long seed = 0;
  IntegratorKind integrator = IntegratorKind::Adaptive;
  double rtol = 1e-6;
  double atol = 1e-9;
  int rk4_substeps = 4;
  DynamicsOptions dynamics;  // bearing flag mirrored in here at run time
  // divergence bounds
  double angle_limit = 85.0 * M_PI / 180.0;
  double z_limit = 100.0;
  double rate_limit = 100.0;

  References references_at(double t) const;
};

struct TelemetryRecord {
  double t = 0;
  State state;
  double phi_f = 0, theta_f = 0, psi_f = 0;  // filtered attitude (rad)
  std::array<double, 4> thrusts{};            // N
  ControlOutputs outputs;
  std::array<int, 4> commands{};              // scaled counts
};

struct AxisSummary {
  double settling_time = 0;  // s, from the last reference change
  double overshoot = 0;      // peak excursion past the reference
  int oscillations = 0;
  double steady_error = 0;
};

struct RunSummary {
  AxisSummary z, phi, theta, psi;
  double r_steady = 0;       // final yaw rate (rad/s)
  bool r_converged = false;  // |dr/dt| < 1e-3 rad/s^2 held for 1 s
};

struct RunResult {
  std::vector<TelemetryRecord> telemetry;
  RunSummary summary;
  bool diverged = false;
  std::string message;
};

RunResult run_scenario(const ScenarioSpec& spec, const QuadcopterParams& params,
                       const GainSet& gains, const PropellerModel& prop);

/// `key = value` scenario file with a [schedule] section of
/// `t, z_d, phi_d_deg, theta_d_deg, psi_d_deg` rows. When the file does
/// not set a seed, the QUADSIM_SEED environment variable is consulted.
ScenarioSpec load_scenario(const std::string& path);
ScenarioSpec scenario_from_kv(const struct KeyValueFile& kv);
void save_scenario(const std::string& path, const ScenarioSpec& spec);

/// Fixed-header CSV, one row per controller tick. Angles are written in
/// degrees; rates and positions stay in SI units.
void write_telemetry(const std::string& path, const std::vector<TelemetryRecord>& records);
std::string telemetry_to_csv(const std::vector<TelemetryRecord>& records);

/// Axis selector for tuning and trace extraction.
enum class Axis { Z, Phi, Theta, Psi };

std::vector<TracePoint> extract_axis_trace(const std::vector<TelemetryRecord>& telemetry,
                                           Axis axis);

/// Builds the closed-loop step-response simulator the tuner drives:
/// a step of `magnitude` on `axis` at t = 0, with the other axes held by
/// `base_gains` (zero gains disable an axis).
StepSimulator make_step_simulator(Axis axis, double magnitude, double duration,
                                  const GainSet& base_gains,
                                  const QuadcopterParams& params,
                                  const PropellerModel& prop);

/// Runs FixedTorque yaw-spin scenarios at each torque level and returns
/// (2 * per-propeller torque, steady-state yaw rate) pairs.
std::vector<std::pair<double, double>> yaw_spin_steady_states(
    const std::vector<double>& torques, const QuadcopterParams& params,
    const PropellerModel& prop, double duration = 25.0);

}  // namespace quadsim
