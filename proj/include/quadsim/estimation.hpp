#pragma once

#include <string>
#include <vector>

#include "quadsim/model.hpp"

namespace quadsim {

/// One propeller bench measurement: command, thrust, speed, supply power.
struct BenchSample {
  double P = 0;  // command counts
  double f = 0;  // thrust (N)
  double w = 0;  // angular speed (rad/s)
  double V = 0;  // supply voltage (V)
  double I = 0;  // supply current (A)
};

/// One point of the yaw drag characterization: applied torque and the
/// steady-state yaw rate it sustains.
struct YawSteadyState {
  double tau_applied = 0;  // N m
  double r_ss = 0;         // rad/s
};

/// Steady-state reaction torque inferred from electrical power: V I / w.
/// Throws std::domain_error at w = 0.
double electrical_reaction_torque(double V, double I, double w);

struct PendulumMoi {
  double J_pivot;   // about the pivot axis
  double J_com;     // about the parallel axis through the COM
};

/// Pendulum identification: J_P = M g r (T / 2 pi)^2, then the parallel
/// axis theorem gives J_C = J_P - M r^2.
/// Throws std::domain_error if the measurement implies J_C <= 0.
PendulumMoi moi_from_pendulum(double M, double g, double r, double T);

/// Mean swing interval over several filmed trials. Each trial is a
/// monotone list of swing-completion timestamps.
double period_from_swings(const std::vector<std::vector<double>>& trials);

inline double disk_moi(double m_b, double r_b) { return 0.5 * m_b * r_b * r_b; }
inline double cylinder_moi(double m_m, double r_m) { return 0.5 * m_m * r_m * r_m; }

/// Blade-disk plus motor-cylinder axial MOI for one propeller unit.
inline double propeller_axial_moi(double m_b, double r_b, double m_m, double r_m) {
  return disk_moi(m_b, r_b) + cylinder_moi(m_m, r_m);
}

/// Mean axial MOI over a set of nominally identical propeller units.
double average_propeller_moi(const std::vector<double>& per_unit_moi);

struct FitResiduals {
  double rms = 0;
  double max_abs = 0;
};

struct ThrustPwmFit {
  double h1;
  double h2;
  FitResiduals residuals;  // in thrust space
};

/// Fits f = h1 (P - h2)^2 by linear regression of sqrt(f) on P.
/// Requires >= 3 samples with distinct commands and positive thrust.
ThrustPwmFit fit_thrust_pwm(const std::vector<BenchSample>& samples);

/// Fits f = c1 w^2 through the origin.
double fit_thrust_omega(const std::vector<BenchSample>& samples);

struct TorqueThrustFit {
  double g1;
  double g2;
};

/// Ordinary least squares of tau (from electrical_reaction_torque) on f.
TorqueThrustFit fit_torque_thrust(const std::vector<BenchSample>& samples);

struct DragFit {
  double gamma1;
  double gamma2;
  bool gamma2_clamped = false;  // negative intercept clamped to zero
};

/// Least squares of |tau_applied| on r_ss^2 with intercept.
DragFit fit_drag_coefficients(const std::vector<YawSteadyState>& points);

struct LoopTiming {
  double period;     // s
  double frequency;  // Hz
};

/// Average period of a main loop of execution time T1 interrupted every
/// t0 by a handler of execution time T2.
/// Throws std::domain_error when T1 + T2 >= t0 (interrupt starvation).
LoopTiming average_loop_time(double t0, double T1, double T2);

/// CSV ingestion: header `P,f,w,V,I` for bench data, `tau,r` for yaw data.
std::vector<BenchSample> load_bench_csv(const std::string& path);
std::vector<YawSteadyState> load_yaw_csv(const std::string& path);

}  // namespace quadsim
