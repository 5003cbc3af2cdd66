#include "quadsim/sensing.hpp"

#include <cmath>
#include <stdexcept>

#include "quadsim/dynamics.hpp"
#include "quadsim/key_value.hpp"

namespace quadsim {

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

ImuReading simulate_imu(const State& s, const SensorConfig& cfg,
                        std::mt19937_64& rng, double t) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Matrix3d R_ib =
      rotation_body_to_inertial(s.phi, s.theta, s.psi).transpose();

  ImuReading out;
  out.t = t;
  // Quasi-static accelerometer: the specific force at rest is gravity
  // reacted upward, which reads (0, 0, +g) at level attitude.
  out.accel = R_ib * Eigen::Vector3d(0, 0, cfg.gravity) + cfg.accel_bias;
  out.gyro = Eigen::Vector3d(s.p, s.q, s.r) + cfg.gyro_bias;
  out.mag = R_ib * cfg.field;
  if (cfg.accel_sigma > 0) {
    for (int i = 0; i < 3; ++i) out.accel(i) += cfg.accel_sigma * gauss(rng);
  }
  if (cfg.gyro_sigma > 0) {
    for (int i = 0; i < 3; ++i) out.gyro(i) += cfg.gyro_sigma * gauss(rng);
  }
  if (cfg.mag_sigma > 0) {
    for (int i = 0; i < 3; ++i) out.mag(i) += cfg.mag_sigma * gauss(rng);
  }
  return out;
}

std::pair<double, double> accel_to_roll_pitch(const ImuReading& reading) {
  const auto& a = reading.accel;
  if (a.norm() == 0.0) throw std::domain_error("zero accelerometer vector");
  double phi = std::atan2(a.y(), a.z());
  double theta = std::atan(-a.x() / std::sqrt(a.y() * a.y() + a.z() * a.z()));
  return {phi, theta};
}

double mag_to_yaw(const ImuReading& reading, double phi, double theta) {
  const auto& m = reading.mag;
  double sphi = std::sin(phi), cphi = std::cos(phi);
  double stheta = std::sin(theta), ctheta = std::cos(theta);
  double num = m.z() * sphi - m.y() * cphi;
  double den = m.x() * ctheta + m.y() * stheta * sphi + m.z() * stheta * cphi;
  if (num == 0.0 && den == 0.0) {
    throw std::domain_error("degenerate magnetometer geometry");
  }
  return std::atan2(num, den);
}

double complementary_fuse(double absolute, double gyro_propagated, double alpha) {
  return (1.0 - alpha) * absolute + alpha * gyro_propagated;
}

double complementary_fuse_wrapped(double absolute, double gyro_propagated,
                                  double alpha) {
  double diff = wrap_angle(absolute - gyro_propagated);
  return wrap_angle(gyro_propagated + (1.0 - alpha) * diff);
}

double ema_alpha_from_tau(double tau_ema, double dt) {
  if (!(tau_ema > 0 && dt > 0)) throw std::invalid_argument("tau and dt must be positive");
  return 1.0 - std::exp(-dt / tau_ema);
}

double comp_alpha_from_tau(double tau, double dt) {
  if (!(tau > 0 && dt > 0)) throw std::invalid_argument("tau and dt must be positive");
  return tau / (tau + dt);
}

double comp_tau_from_alpha(double alpha, double dt) {
  if (!(alpha >= 0 && alpha < 1 && dt > 0)) {
    throw std::invalid_argument("alpha must lie in [0, 1)");
  }
  return alpha * dt / (1.0 - alpha);
}

void AttitudeFilter::reset() {
  initialized_ = false;
  ema_gyro_.setZero();
  phi_ = theta_ = psi_ = 0;
}

AttitudeEstimate AttitudeFilter::step(const ImuReading& reading) {
  Eigen::Vector3d gyro = reading.gyro - cfg_.gyro_bias;
  if (initialized_) {
    ema_gyro_(0) = ema_step(ema_gyro_(0), gyro(0), cfg_.alpha_ema_p);
    ema_gyro_(1) = ema_step(ema_gyro_(1), gyro(1), cfg_.alpha_ema_q);
    ema_gyro_(2) = ema_step(ema_gyro_(2), gyro(2), cfg_.alpha_ema_r);
  } else {
    ema_gyro_ = gyro;
  }

  auto [phi_abs, theta_abs] = accel_to_roll_pitch(reading);
  phi_abs -= cfg_.phi_bias;
  theta_abs -= cfg_.theta_bias;
  double psi_abs = mag_to_yaw(reading, phi_abs, theta_abs);

  if (!initialized_) {
    phi_ = phi_abs;
    theta_ = theta_abs;
    psi_ = psi_abs;
    initialized_ = true;
  } else {
    Eigen::Vector3d rates;
    if (cfg_.euler_rate_transform) {
      State s;
      s.phi = phi_;
      s.theta = theta_;
      s.p = ema_gyro_(0);
      s.q = ema_gyro_(1);
      s.r = ema_gyro_(2);
      rates = body_rates_to_euler_rates(s);
    } else {
      rates = ema_gyro_;  // small-angle passthrough
    }
    double phi_gyro = phi_ + rates(0) * cfg_.dt;
    double theta_gyro = theta_ + rates(1) * cfg_.dt;
    double psi_gyro = psi_ + rates(2) * cfg_.dt;
    phi_ = complementary_fuse(phi_abs, phi_gyro, cfg_.alpha_phi);
    theta_ = complementary_fuse(theta_abs, theta_gyro, cfg_.alpha_theta);
    psi_ = complementary_fuse_wrapped(psi_abs, psi_gyro, cfg_.alpha_psi);
  }

  AttitudeEstimate est;
  est.phi = phi_;
  est.theta = theta_;
  est.psi = psi_;
  est.filtered_gyro = ema_gyro_;
  return est;
}

BiasEstimate calibrate_biases(const std::vector<ImuReading>& stationary) {
  if (stationary.empty()) throw std::invalid_argument("empty calibration window");
  BiasEstimate bias;
  for (const auto& reading : stationary) {
    bias.gyro_bias += reading.gyro;
    auto [phi, theta] = accel_to_roll_pitch(reading);
    bias.phi_bias += phi;
    bias.theta_bias += theta;
  }
  double n = static_cast<double>(stationary.size());
  bias.gyro_bias /= n;
  bias.phi_bias /= n;
  bias.theta_bias /= n;
  return bias;
}

FilterConfig filter_config_from_kv(const KeyValueFile& kv, double dt) {
  FilterConfig cfg;
  cfg.dt = dt;
  cfg.alpha_phi = kv.get_double("alpha_phi", 0.0);
  cfg.alpha_theta = kv.get_double("alpha_theta", 0.0);
  cfg.alpha_psi = kv.get_double("alpha_psi", 0.0);
  cfg.alpha_ema_p = kv.get_double("alpha_ema_p", 1.0);
  cfg.alpha_ema_q = kv.get_double("alpha_ema_q", 1.0);
  cfg.alpha_ema_r = kv.get_double("alpha_ema_r", 1.0);
  return cfg;
}

}  // namespace quadsim
