#include "snakesim/actuation.hpp"

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "snakesim/simulator.hpp"

using namespace snakesim;

TEST_SUITE_BEGIN("actuation");

TEST_CASE("oscillator reference values") {
  const RobotModel m = test::default_model();
  const GaitParams g = load_gait(test::fixture("gait_050hz.json"), m.joint_count);

  const VecX y0 = cpg_reference(0.0, g);
  CHECK(y0[0] == doctest::Approx(0.0).epsilon(1e-15));                      // joint 1, phase 0
  CHECK(y0[2] == doctest::Approx(0.24434609527920614).epsilon(1e-12));     // joint 3, 14 deg
  // Joint 2 (yaw, 60 deg, phase 0) peaks a quarter period in.
  const VecX yq = cpg_reference(0.5, g);
  CHECK(yq[1] == doctest::Approx(60.0 * kPi / 180.0).epsilon(1e-12));
}

TEST_CASE("oscillator is periodic and bounded") {
  const RobotModel m = test::default_model();
  const GaitParams g = load_gait(test::fixture("gait_035hz.json"), m.joint_count);
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const double t = rng.uniform(0.0, 20.0);
    const VecX a = cpg_reference(t, g);
    const VecX b = cpg_reference(t + 1.0 / g.frequency_hz, g);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    for (int j = 0; j < m.joint_count; ++j) CHECK(std::abs(a[j]) <= g.amplitudes_rad[j] + 1e-15);
  }
}

TEST_CASE("shipped gait files carry the sidewinding phase pattern") {
  const RobotModel m = test::default_model();
  for (const char* name : {"gait_035hz.json", "gait_050hz.json", "gait_065hz.json"}) {
    const GaitParams g = load_gait(test::fixture(name), m.joint_count);
    const double q = kPi / 2.0;
    const double expected[11] = {0, 0, q, q, 2 * q, 2 * q, 3 * q, 3 * q, 0, 0, q};
    for (int j = 0; j < 11; ++j) CHECK(g.phases_rad[j] == doctest::Approx(expected[j]).epsilon(1e-15));
    for (int j = 0; j < 11; ++j) {
      const double amp_deg = g.amplitudes_rad[j] * 180.0 / kPi;
      CHECK(amp_deg == doctest::Approx(j % 2 == 0 ? 14.0 : 60.0).epsilon(1e-12));
    }
  }
  CHECK(load_gait(test::fixture("gait_035hz.json"), 11).frequency_hz == 0.35);
  CHECK(load_gait(test::fixture("gait_050hz.json"), 11).frequency_hz == 0.5);
  CHECK(load_gait(test::fixture("gait_065hz.json"), 11).frequency_hz == 0.65);
}

TEST_CASE("actuator torque is zero at perfect rest tracking") {
  const RobotModel m = test::default_model();
  const ActuatorParams a{0.002, 0.02, 0.3};
  const ActuatorOutput out = actuator_torque(0.7, 0.7, 0.0, 0.0, 1e-3, a, m);
  CHECK(out.torque == 0.0);
  CHECK(out.voltage == 0.0);
}

TEST_CASE("dead motor leaves only the passive reaction terms") {
  const RobotModel m = test::default_model();
  const ActuatorParams a{0.002, 0.02, 0.0};
  // rate 0.5 rad/s, previous rotor rate 0.3 -> fd accel (0.5-0.3)/dt
  const double dt = 1e-3;
  const ActuatorOutput out = actuator_torque(1.0, 0.0, 0.5, 0.3, dt, a, m);
  const double expected = -0.002 * (0.5 - 0.3) / dt - 0.02 * 0.5;
  CHECK(out.torque == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("internal damping never injects energy") {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double rate = rng.uniform(-20.0, 20.0);
    const double damping = rng.uniform(0.0, 0.2);
    CHECK(-damping * rate * rate <= 0.0);  // power of the damping torque
  }
}

TEST_CASE("motor torque saturates at the limit") {
  const RobotModel m = test::default_model();
  const ActuatorParams a{0.002, 0.02, 0.3};
  CHECK(motor_torque(1000.0, a, m.torque_limit) == m.torque_limit);
  CHECK(motor_torque(-1000.0, a, m.torque_limit) == -m.torque_limit);
}

TEST_CASE("single-joint rig step response matches the closed-form LTI solution") {
  // Rotor inertia reflected onto the joint makes the closed loop
  //   (J_L + J_t) qdd + (b + Km*Kd) qd + Km*Kp q = Km*Kp r.
  const RobotModel m = test::default_model();
  const ActuatorParams a{0.002, 0.02, 0.3};
  const double load_inertia = 0.01;
  const double r = 0.05;  // small step, far from saturation

  const double inertia = load_inertia + a.transmission_inertia;
  const double stiffness = a.motor_constant * m.servo_kp;
  const double damping = a.internal_damping + a.motor_constant * m.servo_kd;
  const double wn = std::sqrt(stiffness / inertia);
  const double zeta = damping / (2.0 * std::sqrt(stiffness * inertia));
  REQUIRE(zeta < 1.0);
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);

  double q = 0.0, qd = 0.0;
  const double dt = 1e-5;
  for (int i = 1; i <= 100000; ++i) {
    const double v = servo_voltage(r, q, qd, m);
    const double torque = motor_torque(v, a, m.torque_limit) - a.internal_damping * qd;
    const double qdd = torque / inertia;  // J_t on the inertia side, as in the simulator
    qd += qdd * dt;
    q += qd * dt;
    if (i % 10000 == 0) {
      const double t = i * dt;
      const double exact =
          r * (1.0 - std::exp(-zeta * wn * t) *
                         (std::cos(wd * t) + zeta * wn / wd * std::sin(wd * t)));
      CHECK(q == doctest::Approx(exact).epsilon(1e-3 / std::max(std::abs(exact), 1e-3)));
      CHECK(std::abs(q - exact) < 1e-3);
    }
  }
}

TEST_CASE("ground-truth params track the 0.5 Hz gait under 2 deg RMS") {
  const RobotModel m = test::default_model();
  TunableParams truth = test::nominal_params(m);
  for (auto& a : truth.actuators) {
    a.transmission_inertia *= 1.5;
    a.internal_damping *= 1.5;
    a.motor_constant *= 1.5;
  }
  truth.stribeck.mu_c *= 0.5;
  truth.stribeck.mu_s *= 1.5;
  truth.stribeck.mu_v *= 0.5;

  const GaitParams gait = sidewinding_gait(m, 0.5);
  RolloutConfig cfg;
  cfg.duration = 8.0;
  cfg.dt = 1e-3;
  const Trajectory traj = rollout(m, truth, gait, cfg);

  double sq = 0.0;
  int count = 0;
  for (int k = 0; k < traj.samples(); ++k)
    for (int j = 0; j < traj.joints(); ++j) {
      const double e = traj.joint_angles(k, j) - traj.joint_refs(k, j);
      sq += e * e;
      ++count;
    }
  const double rms_deg = std::sqrt(sq / count) * 180.0 / kPi;
  CHECK(rms_deg < 2.0);
}

TEST_SUITE_END();
