#include <doctest.h>

#include <cmath>
#include <random>

#include "quadsim/sensing.hpp"
#include "test_util.hpp"

using namespace quadsim;

namespace {
constexpr double kG = 9.80665;
constexpr double kDt = 1.0 / 450.0;

double deg(double d) { return d * M_PI / 180.0; }
}  // namespace

TEST_CASE("simulate imu") {
  SensorConfig cfg;
  std::mt19937_64 rng(1);

  SUBCASE("level and static") {
    auto r = simulate_imu(State{}, cfg, rng);
    CHECK(r.accel(0) == 0.0);
    CHECK(r.accel(1) == 0.0);
    CHECK(r.accel(2) == doctest::Approx(kG));
    CHECK(r.gyro.norm() == 0.0);
    CHECK(r.mag(0) == doctest::Approx(1.0));
  }
  SUBCASE("45 degree roll splits gravity between y and z") {
    State s;
    s.phi = deg(45.0);
    auto r = simulate_imu(s, cfg, rng);
    CHECK(r.accel(1) / r.accel(2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.accel.norm() == doctest::Approx(kG).epsilon(1e-12));
  }
  SUBCASE("gyro reports the body rates") {
    State s;
    s.p = 0.3;
    s.q = -0.2;
    s.r = 0.1;
    auto r = simulate_imu(s, cfg, rng);
    CHECK(r.gyro(0) == doctest::Approx(0.3));
    CHECK(r.gyro(1) == doctest::Approx(-0.2));
    CHECK(r.gyro(2) == doctest::Approx(0.1));
  }
  SUBCASE("same seed gives identical noisy readings") {
    SensorConfig noisy;
    noisy.accel_sigma = 0.1;
    noisy.gyro_sigma = 0.01;
    noisy.mag_sigma = 0.01;
    std::mt19937_64 a(42), b(42);
    auto ra = simulate_imu(State{}, noisy, a);
    auto rb = simulate_imu(State{}, noisy, b);
    CHECK(ra.accel == rb.accel);
    CHECK(ra.gyro == rb.gyro);
    CHECK(ra.mag == rb.mag);
  }
}

TEST_CASE("accelerometer tilt extraction") {
  ImuReading r;

  r.accel = {0, 0, kG};
  auto [phi0, theta0] = accel_to_roll_pitch(r);
  CHECK(phi0 == 0.0);
  CHECK(theta0 == 0.0);

  r.accel = {0, kG / std::sqrt(2.0), kG / std::sqrt(2.0)};
  auto [phi45, theta_z] = accel_to_roll_pitch(r);
  CHECK(phi45 == doctest::Approx(deg(45.0)));
  CHECK(theta_z == doctest::Approx(0.0));

  r.accel = {-kG / std::sqrt(2.0), 0, kG / std::sqrt(2.0)};
  auto [phi_z, theta45] = accel_to_roll_pitch(r);
  CHECK(phi_z == doctest::Approx(0.0));
  CHECK(theta45 == doctest::Approx(deg(45.0)));

  r.accel = {0, 0, 0};
  CHECK_THROWS_AS(accel_to_roll_pitch(r), std::domain_error);
}

TEST_CASE("magnetometer heading") {
  ImuReading r;
  r.mag = {1, 0, 0.3};
  CHECK(mag_to_yaw(r, 0.0, 0.0) == doctest::Approx(0.0));

  r.mag = {0, -1, 0};
  CHECK(mag_to_yaw(r, 0.0, 0.0) == doctest::Approx(deg(90.0)));

  r.mag = {0, 0, 0};
  CHECK_THROWS_AS(mag_to_yaw(r, 0.0, 0.0), std::domain_error);
}

TEST_CASE("heading round trip through the simulated magnetometer") {
  SensorConfig cfg;
  std::mt19937_64 rng(2);
  State s;
  s.psi = deg(30.0);
  auto r = simulate_imu(s, cfg, rng);
  auto [phi, theta] = accel_to_roll_pitch(r);
  CHECK(mag_to_yaw(r, phi, theta) == doctest::Approx(deg(30.0)).epsilon(1e-12));
}

TEST_CASE("noise-free attitude round trip over random attitudes") {
  SensorConfig cfg;
  std::mt19937_64 rng(5);
  std::mt19937 att_rng(9);
  std::uniform_real_distribution<double> tilt(-deg(60.0) + 1e-6, deg(60.0) - 1e-6);
  std::uniform_real_distribution<double> heading(-M_PI + 1e-6, M_PI - 1e-6);
  for (int i = 0; i < 100; ++i) {
    State s;
    s.phi = tilt(att_rng);
    s.theta = tilt(att_rng);
    s.psi = heading(att_rng);
    auto r = simulate_imu(s, cfg, rng);
    auto [phi, theta] = accel_to_roll_pitch(r);
    double psi = mag_to_yaw(r, phi, theta);
    CHECK(std::abs(phi - s.phi) < 1e-9);
    CHECK(std::abs(theta - s.theta) < 1e-9);
    CHECK(std::abs(wrap_angle(psi - s.psi)) < 1e-9);
  }
}

TEST_CASE("complementary fusion") {
  CHECK(complementary_fuse(0.7, 0.7, 0.3) == doctest::Approx(0.7));
  CHECK(complementary_fuse(0.7, 0.7, 0.99) == doctest::Approx(0.7));
  CHECK(complementary_fuse(1.0, 2.0, 0.0) == 1.0);
  CHECK(complementary_fuse(1.0, 2.0, 0.75) == doctest::Approx(1.75));

  // wrapped blend across the pi seam takes the short way around
  double fused = complementary_fuse_wrapped(M_PI - 0.01, -M_PI + 0.01, 0.5);
  CHECK(std::abs(wrap_angle(fused - M_PI)) < 1e-9);
}

TEST_CASE("complementary filter suppresses absolute-channel noise") {
  double alpha = 128.0 / 129.0;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, deg(2.0));
  double truth = deg(10.0);
  double fused = 0.0;
  std::vector<double> tail;
  int n = static_cast<int>(10.0 * 483.0);
  for (int i = 0; i < n; ++i) {
    double absolute = truth + noise(rng);
    double propagated = fused;  // true rate is zero
    fused = complementary_fuse(absolute, propagated, alpha);
    if (i > n / 2) tail.push_back(fused);
  }
  double mean = 0.0;
  for (double v : tail) mean += v;
  mean /= tail.size();
  double var = 0.0;
  for (double v : tail) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / tail.size());
  CHECK(sd < deg(0.3));
  CHECK(std::abs(mean - truth) < deg(0.3));
}

TEST_CASE("ema step") {
  CHECK(ema_step(0.4, 1.3, 1.0) == 1.3);
  CHECK(ema_step(0.0, 1.0, 0.007782062) == doctest::Approx(0.007782062));

  double y = 0.0;
  for (int i = 0; i < 4000; ++i) y = ema_step(y, 5.0, 0.01);
  CHECK(y == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("ema output stays within the input range") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-3.0, 7.0);
  double y = u(rng);
  double lo = y, hi = y;
  for (int i = 0; i < 500; ++i) {
    double sample = u(rng);
    lo = std::min(lo, sample);
    hi = std::max(hi, sample);
    y = ema_step(y, sample, 0.2);
    CHECK(y >= lo);
    CHECK(y <= hi);
  }
}

TEST_CASE("filter constants match the power-of-two tuning rule") {
  CHECK(comp_alpha_from_tau(128.0 * kDt, kDt) ==
        doctest::Approx(0.992248062).epsilon(1e-9));
  CHECK(comp_alpha_from_tau(64.0 * kDt, kDt) ==
        doctest::Approx(0.984615385).epsilon(1e-9));
  CHECK(ema_alpha_from_tau(128.0 * kDt, kDt) ==
        doctest::Approx(0.007782062).epsilon(1e-8));
}

TEST_CASE("alpha and tau conversions are mutual inverses") {
  for (double tau : {0.01, 0.1, 0.2844, 1.0}) {
    double alpha = comp_alpha_from_tau(tau, kDt);
    CHECK(comp_tau_from_alpha(alpha, kDt) == doctest::Approx(tau).epsilon(1e-12));
  }
}

TEST_CASE("ema unit step reaches 63.2% at its time constant") {
  double tau = 64.0 * kDt;
  double alpha = ema_alpha_from_tau(tau, kDt);
  double y = 0.0;
  int steps = 0;
  while (y < 1.0 - std::exp(-1.0)) {
    y = ema_step(y, 1.0, alpha);
    ++steps;
  }
  CHECK(std::abs(steps * kDt - tau) <= kDt + 1e-12);
}

TEST_CASE("attitude filter tracks a constant attitude exactly") {
  SensorConfig cfg;
  std::mt19937_64 rng(3);
  State s;
  s.phi = 0.2;
  s.theta = -0.1;
  s.psi = 0.5;

  FilterConfig fc;
  fc.alpha_phi = fc.alpha_theta = 128.0 / 129.0;
  fc.alpha_psi = 64.0 / 65.0;
  fc.alpha_ema_p = fc.alpha_ema_q = fc.alpha_ema_r = 0.007782062;
  AttitudeFilter filter(fc);

  for (int i = 0; i < 200; ++i) {
    auto est = filter.step(simulate_imu(s, cfg, rng, i * kDt));
    CHECK(est.phi == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(est.theta == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(est.psi == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("bias calibration") {
  SUBCASE("noise-free zero bias") {
    std::vector<ImuReading> window(10);
    for (auto& r : window) r.accel = {0, 0, kG};
    auto est = calibrate_biases(window);
    CHECK(est.gyro_bias.norm() == 0.0);
    CHECK(est.phi_bias == 0.0);
    CHECK(est.theta_bias == 0.0);
  }
  SUBCASE("constant gyro bias recovered exactly") {
    SensorConfig cfg;
    cfg.gyro_bias = {0.01, -0.02, 0.005};
    std::mt19937_64 rng(4);
    std::vector<ImuReading> window;
    for (int i = 0; i < 100; ++i) window.push_back(simulate_imu(State{}, cfg, rng));
    auto est = calibrate_biases(window);
    CHECK(est.gyro_bias(0) == doctest::Approx(0.01));
    CHECK(est.gyro_bias(1) == doctest::Approx(-0.02));
    CHECK(est.gyro_bias(2) == doctest::Approx(0.005));
  }
  SUBCASE("noisy bias recovered within the standard error") {
    SensorConfig cfg;
    cfg.gyro_sigma = 0.05;
    cfg.gyro_bias = {0.01, -0.02, 0.005};
    std::mt19937_64 rng(6);
    std::vector<ImuReading> window;
    int n = static_cast<int>(60.0 * 483.0);
    for (int i = 0; i < n; ++i) window.push_back(simulate_imu(State{}, cfg, rng));
    auto est = calibrate_biases(window);
    double bound = 3.0 * 0.05 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(est.gyro_bias(0) - 0.01) < bound);
    CHECK(std::abs(est.gyro_bias(1) + 0.02) < bound);
    CHECK(std::abs(est.gyro_bias(2) - 0.005) < bound);
  }
  SUBCASE("empty window rejected") {
    CHECK_THROWS_AS(calibrate_biases({}), std::invalid_argument);
  }
}
