#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "quadsim/model.hpp"

namespace quadsim {

struct ImuReading {
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();  // specific force, body frame (m/s^2)
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();   // body rates (rad/s)
  Eigen::Vector3d mag = Eigen::Vector3d::Zero();    // field direction, body frame
  double t = 0;
};

struct SensorConfig {
  double accel_sigma = 0;  // m/s^2
  double gyro_sigma = 0;   // rad/s
  double mag_sigma = 0;
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d field = Eigen::Vector3d(1, 0, 0);  // inertial magnetic field direction
  double gravity = 9.80665;
};

/// Synthesizes a quasi-static IMU reading from the true state: gravity
/// and the magnetic field rotated into the body frame, gyro from the
/// body rates, plus per-channel bias and white Gaussian noise drawn
/// from the supplied generator.
ImuReading simulate_imu(const State& s, const SensorConfig& cfg,
                        std::mt19937_64& rng, double t = 0);

/// Tilt from the accelerometer: phi = atan2(ay, az),
/// theta = arctan(-ax / sqrt(ay^2 + az^2)).
/// Throws std::domain_error on a zero accelerometer vector.
std::pair<double, double> accel_to_roll_pitch(const ImuReading& reading);

/// Tilt-compensated heading from the magnetometer.
/// Throws std::domain_error when both atan2 arguments vanish.
double mag_to_yaw(const ImuReading& reading, double phi, double theta);

/// Weighted blend of the absolute (accel/mag) estimate with the
/// gyro-propagated one: (1 - alpha) * absolute + alpha * propagated.
double complementary_fuse(double absolute, double gyro_propagated, double alpha);

/// Like complementary_fuse but blends across the shortest angular
/// difference, for the wrapping yaw axis.
double complementary_fuse_wrapped(double absolute, double gyro_propagated,
                                  double alpha);

/// First-order recursive low-pass: alpha * sample + (1 - alpha) * previous.
inline double ema_step(double previous, double sample, double alpha_ema) {
  return alpha_ema * sample + (1.0 - alpha_ema) * previous;
}

/// alpha_ema = 1 - exp(-dt / tau_ema).
double ema_alpha_from_tau(double tau_ema, double dt);

/// Complementary weight from its time constant: alpha = tau / (tau + dt).
double comp_alpha_from_tau(double tau, double dt);

/// Inverse of comp_alpha_from_tau: tau = alpha dt / (1 - alpha).
double comp_tau_from_alpha(double alpha, double dt);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

struct FilterConfig {
  double alpha_phi = 0, alpha_theta = 0, alpha_psi = 0;  // complementary weights
  double alpha_ema_p = 1, alpha_ema_q = 1, alpha_ema_r = 1;
  double dt = 1.0 / 450.0;
  bool euler_rate_transform = true;  // false: small-angle passthrough of body rates
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();
  double phi_bias = 0, theta_bias = 0;  // accel-derived angle biases
};

struct AttitudeEstimate {
  double phi = 0, theta = 0, psi = 0;
  Eigen::Vector3d filtered_gyro = Eigen::Vector3d::Zero();
};

/// EMA-smoothed gyro feeding a per-axis complementary filter. The first
/// sample initializes the fused angles from the absolute estimates.
class AttitudeFilter {
 public:
  explicit AttitudeFilter(const FilterConfig& cfg) : cfg_(cfg) {}

  AttitudeEstimate step(const ImuReading& reading);
  void reset();

 private:
  FilterConfig cfg_;
  bool initialized_ = false;
  Eigen::Vector3d ema_gyro_ = Eigen::Vector3d::Zero();
  double phi_ = 0, theta_ = 0, psi_ = 0;
};

struct BiasEstimate {
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();
  double phi_bias = 0;
  double theta_bias = 0;
};

/// Stationary calibration: per-axis gyro means plus mean accel-derived
/// roll/pitch over the window. Throws std::invalid_argument on an empty
/// window.
BiasEstimate calibrate_biases(const std::vector<ImuReading>& stationary);

FilterConfig filter_config_from_kv(const struct KeyValueFile& kv, double dt);

}  // namespace quadsim
