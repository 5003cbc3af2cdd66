#include <doctest.h>

#include <cmath>

#include "quadsim/dynamics.hpp"
#include "test_util.hpp"

using namespace quadsim;
using testing::canonical_prop;
using testing::measured_params;

namespace {
const DynamicsOptions kFree{};                 // free flight, no bearing
const DynamicsOptions kBearing{true, false};
}  // namespace

TEST_CASE("drag torque") {
  auto p = measured_params();
  CHECK(drag_torque(0.0, p, true) == 0.0);
  CHECK(drag_torque(20.0, p, true) == doctest::Approx(0.19574598).epsilon(1e-9));
  // gamma2 participates only on the bearing rig
  CHECK(drag_torque(20.0, p, false) == doctest::Approx(4.86291e-4 * 400.0));
  for (double r = -30.0; r <= 30.0; r += 1.7) {
    CHECK(drag_torque(-r, p, true) == -drag_torque(r, p, true));
  }
}

TEST_CASE("rotational derivative matches hand-evaluated cases") {
  auto p = measured_params();
  State s;

  SUBCASE("equilibrium") {
    auto d = rotational_derivative(s, {}, 0.0, p, kFree);
    CHECK(d.norm() == 0.0);
  }
  SUBCASE("pure roll torque") {
    auto d = rotational_derivative(s, {0.1, 0, 0}, 0.0, p, kFree);
    CHECK(d(0) == doctest::Approx(7.14145).epsilon(1e-5));
    CHECK(d(1) == 0.0);
    CHECK(d(2) == 0.0);
  }
  SUBCASE("gyroscopic coupling from net propeller momentum") {
    s.q = 1.0;
    auto d = rotational_derivative(s, {}, 100.0, p, kFree);
    CHECK(d(0) == doctest::Approx(-1.90561).epsilon(1e-5));
  }
  SUBCASE("pitch gyroscopic sign flip option") {
    s.p = 1.0;
    auto d0 = rotational_derivative(s, {}, 100.0, p, kFree);
    auto d1 = rotational_derivative(s, {}, 100.0, p, {false, true});
    CHECK(d0(1) == doctest::Approx(-d1(1)));
  }
}

TEST_CASE("translational derivative") {
  auto p = measured_params();
  State s;
  double hover = p.M * p.g;

  SUBCASE("hover force balance") {
    auto a = translational_derivative(s, hover, p);
    CHECK(a.norm() == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("double thrust accelerates up at g") {
    auto a = translational_derivative(s, 2.0 * hover, p);
    CHECK(a(2) == doctest::Approx(p.g));
  }
  SUBCASE("pitched thrust tilts forward") {
    s.theta = 0.1;
    auto a = translational_derivative(s, hover, p);
    CHECK(a(0) == doctest::Approx(p.g * std::sin(0.1)).epsilon(1e-9));
    CHECK(a(1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(a(2) == doctest::Approx(p.g * (std::cos(0.1) - 1.0)).epsilon(1e-9));
  }
}

TEST_CASE("body rates to Euler rates") {
  State s;
  s.p = 0.3;
  s.q = -0.2;
  s.r = 0.1;
  auto rates = body_rates_to_euler_rates(s);
  CHECK(rates(0) == doctest::Approx(0.3));
  CHECK(rates(1) == doctest::Approx(-0.2));
  CHECK(rates(2) == doctest::Approx(0.1));

  State tilted;
  tilted.phi = M_PI / 2.0;
  tilted.r = 1.0;
  auto r2 = body_rates_to_euler_rates(tilted);
  CHECK(r2(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r2(1) == doctest::Approx(-1.0));
  CHECK(r2(2) == doctest::Approx(0.0).epsilon(1e-12));

  State singular;
  singular.theta = M_PI / 2.0;
  CHECK_THROWS_AS(body_rates_to_euler_rates(singular), std::domain_error);
}

TEST_CASE("hover is an exact fixed point of the full derivative") {
  auto p = measured_params();
  auto pm = canonical_prop();
  double B = base_weight(p);
  State s;
  auto d = state_derivative(s, {B, B, B, B}, p, pm, kFree);
  CHECK(d.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("thrust differentials map onto the expected torques") {
  auto p = measured_params();
  auto pm = canonical_prop();
  double B = base_weight(p);

  SUBCASE("propeller 2 excess rolls positive") {
    double delta = 0.3;
    Thrusts f = {B, B + delta, B, B};
    auto tq = torques_from_thrusts(f, p, pm);
    CHECK(tq.tau_phi == doctest::Approx(p.l * delta));
    CHECK(tq.tau_theta == 0.0);
    auto d = state_derivative(State{}, f, p, pm, kFree);
    CHECK(d(3) > 0.0);  // positive roll acceleration
  }
  SUBCASE("propellers 1 and 3 alone spin positive yaw") {
    Thrusts f = {2.0, 0.0, 2.0, 0.0};
    auto tq = torques_from_thrusts(f, p, pm);
    CHECK(tq.tau_psi > 0.0);
    auto d = state_derivative(State{}, f, p, pm, kBearing);
    CHECK(d(5) > 0.0);
  }
}

TEST_CASE("rk4 free fall") {
  auto p = measured_params();
  auto pm = canonical_prop();
  State s;
  State next = step_rk4(s, {0, 0, 0, 0}, 0.1, p, pm, kFree);
  CHECK(next.vz == doctest::Approx(-0.980665).epsilon(1e-12));

  State zero = step_rk4(State{}, {base_weight(p), base_weight(p), base_weight(p),
                                  base_weight(p)},
                        0.05, p, pm, kFree);
  CHECK(zero.to_vec().cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("rk4 exhibits fourth-order convergence") {
  auto p = measured_params();
  auto pm = canonical_prop();
  double B = base_weight(p);
  State s;
  s.p = 0.4;
  s.q = -0.3;
  s.r = 0.2;
  s.phi = 0.05;
  Thrusts f = {B, 1.05 * B, 0.95 * B, B};

  auto integrate = [&](double dt) {
    State cur = s;
    long n = std::lround(1.0 / dt);
    for (long i = 0; i < n; ++i) cur = step_rk4(cur, f, dt, p, pm, kFree);
    return cur.to_vec();
  };
  State::Vec ref = integrate(1.0 / 25600);
  double err_h = (integrate(1.0 / 200) - ref).norm();
  double err_h2 = (integrate(1.0 / 400) - ref).norm();
  CHECK(err_h / err_h2 >= 14.0);
}

TEST_CASE("adaptive integrator agrees with brute-force small-step rk4") {
  auto p = measured_params();
  auto pm = canonical_prop();
  double B = base_weight(p);
  State s;
  s.phi = 0.02;
  s.q = 0.1;
  Thrusts f = {B, 1.02 * B, B, 0.98 * B};

  State brute = s;
  const double dt = 1e-4;
  for (int i = 0; i < 10000; ++i) brute = step_rk4(brute, f, dt, p, pm, kFree);
  State adaptive = integrate_adaptive_to(s, f, 0.0, 1.0, p, pm, kFree, 1e-9, 1e-12);
  CHECK((adaptive.to_vec() - brute.to_vec()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("torque-free spin holds its rate without drag") {
  auto p = measured_params();
  p.gamma1 = 0.0;
  p.gamma2 = 0.0;
  auto pm = canonical_prop();
  State s;
  s.r = 5.0;
  State end = integrate_adaptive_to(s, {0, 0, 0, 0}, 0.0, 2.0, p, pm, kFree);
  CHECK(end.r == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("free fall drop over one second") {
  auto p = measured_params();
  auto pm = canonical_prop();
  State end = integrate_adaptive_to(State{}, {0, 0, 0, 0}, 0.0, 1.0, p, pm, kFree);
  CHECK(end.z == doctest::Approx(-4.903325).epsilon(1e-9));
}

TEST_CASE("rotational kinetic energy is conserved in torque-free tumbling") {
  auto p = measured_params();
  p.gamma1 = 0.0;  // no yaw drag
  p.gamma2 = 0.0;
  auto pm = canonical_prop();
  State s;
  s.p = 2.0;
  s.q = -1.5;
  s.r = 1.0;
  double e0 = rotational_energy(s, p);
  auto traj = integrate_adaptive(s, {0, 0, 0, 0}, 0.0, 10.0, p, pm, kFree, 1e-8, 1e-11);
  for (const auto& pt : traj) {
    CHECK(std::abs(rotational_energy(pt.state, p) - e0) / e0 < 1e-6);
  }
}

TEST_CASE("yaw spin settles on the drag balance") {
  auto p = measured_params();
  auto pm = canonical_prop();
  double f = 3.0;
  double tau_total = 2.0 * thrust_to_torque(f, pm);
  double r_expect = std::sqrt((tau_total - p.gamma2) / p.gamma1);
  State s;
  State end = integrate_adaptive_to(s, {f, 0, f, 0}, 0.0, 60.0, p, pm, kBearing);
  CHECK(end.r == doctest::Approx(r_expect).epsilon(1e-6));
}
