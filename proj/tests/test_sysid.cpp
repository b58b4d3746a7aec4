#include "snakesim/sysid.hpp"

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

using namespace snakesim;

namespace {

// Synthetic trajectory whose desired signals are exact oscillator outputs and
// whose achieved angles are exact oscillator outputs of (possibly different)
// parameters.
Trajectory synthetic(const GaitParams& desired, const GaitParams& achieved, double duration,
                     const Vec3& final_pos = Vec3::Zero()) {
  const double dt = 0.01;
  const int n = static_cast<int>(duration / dt) + 1;
  Trajectory t;
  t.sample_dt = dt;
  const int joints = static_cast<int>(desired.amplitudes_rad.size());
  t.joint_angles.resize(n, joints);
  t.joint_refs.resize(n, joints);
  for (int k = 0; k < n; ++k) {
    const double tk = k * dt;
    t.time.push_back(tk);
    t.head_pos.push_back(k + 1 == n ? final_pos : Vec3(0.01 * k, 0, 0));
    t.head_quat.push_back(Quat::Identity());
    t.joint_refs.row(k) = cpg_reference(tk, desired).transpose();
    t.joint_angles.row(k) = cpg_reference(tk, achieved).transpose();
  }
  return t;
}

}  // namespace

TEST_SUITE_BEGIN("sysid");

TEST_CASE("external reward is zero for identical endpoints and -5 for a 3-4-5 offset") {
  const RobotModel m = test::default_model();
  const GaitParams g = sidewinding_gait(m, 0.5);
  const Trajectory a = synthetic(g, g, 4.0, Vec3(0, 0, 0));
  CHECK(reward_external(a, a) == 0.0);

  const Trajectory b = synthetic(g, g, 4.0, Vec3(3.0, 4.0, 0.7));  // z ignored
  CHECK(reward_external(a, b) == doctest::Approx(-5.0).epsilon(1e-12));
}

TEST_CASE("internal reward is zero when the candidate tracks perfectly") {
  const RobotModel m = test::default_model();
  const GaitParams g = sidewinding_gait(m, 0.5);
  const Trajectory ref = synthetic(g, g, 6.0);
  CHECK(std::abs(reward_internal(ref, ref)) < 1e-10);
}

TEST_CASE("one degree of amplitude error on one pitch joint costs its square") {
  const RobotModel m = test::default_model();
  const GaitParams g = sidewinding_gait(m, 0.5);
  GaitParams off = g;
  off.amplitudes_rad[0] = 13.0 * kPi / 180.0;  // desired is 14 deg
  const Trajectory ref = synthetic(g, g, 6.0);
  const Trajectory cand = synthetic(g, off, 6.0);
  CHECK(reward_internal(ref, cand) ==
        doctest::Approx(-3.0461741978670857e-4).epsilon(1e-6));
}

TEST_CASE("phase differences are wrapped") {
  const RobotModel m = test::default_model();
  const GaitParams g = sidewinding_gait(m, 0.5);
  GaitParams shifted = g;
  // +2*pi on one joint is no phase difference at all.
  shifted.phases_rad[3] += 2.0 * kPi;
  const Trajectory ref = synthetic(g, g, 6.0);
  const Trajectory cand = synthetic(g, shifted, 6.0);
  CHECK(std::abs(reward_internal(ref, cand)) < 1e-9);
}

TEST_CASE("flat candidate joints hit the reward floor") {
  const RobotModel m = test::default_model();
  const GaitParams g = sidewinding_gait(m, 0.5);
  GaitParams dead = g;
  dead.amplitudes_rad.setZero();
  const Trajectory ref = synthetic(g, g, 6.0);
  const Trajectory cand = synthetic(g, dead, 6.0);
  CHECK(reward_internal(ref, cand) == kRewardFloor);
}

TEST_CASE("trajectory-l2 reward variant is zero iff angles coincide") {
  const RobotModel m = test::default_model();
  const GaitParams g = sidewinding_gait(m, 0.5);
  GaitParams off = g;
  off.amplitudes_rad *= 0.9;
  const Trajectory ref = synthetic(g, g, 6.0);
  CHECK(reward_internal(ref, ref, InternalRewardKind::kTrajectoryL2) == 0.0);
  CHECK(reward_internal(ref, synthetic(g, off, 6.0), InternalRewardKind::kTrajectoryL2) < 0.0);
}

TEST_CASE("length mismatch is an error") {
  const RobotModel m = test::default_model();
  const GaitParams g = sidewinding_gait(m, 0.5);
  const Trajectory a = synthetic(g, g, 6.0);
  const Trajectory b = synthetic(g, g, 5.0);
  CHECK_THROWS_AS(reward_external(a, b), ConfigError);
  CHECK_THROWS_AS(reward_internal(a, b), ConfigError);
}

TEST_CASE("untuned rollout scores strictly negative against a perturbed-truth reference") {
  const RobotModel m = test::default_model();
  const TunableParams nominal = test::nominal_params(m);
  TunableParams truth = nominal;
  for (auto& a : truth.actuators) a.motor_constant *= 1.5;
  truth.stribeck.mu_c *= 0.5;

  RolloutConfig cfg;
  cfg.duration = 6.0;
  cfg.dt = 1e-3;
  const GaitParams g = sidewinding_gait(m, 0.5);
  const Trajectory ref = rollout(m, truth, g, cfg);
  const Trajectory cand = rollout(m, nominal, g, cfg);

  const double r_ext = reward_external(ref, cand);
  const double r_int = reward_internal(ref, cand);
  CHECK(r_ext < -1e-3);
  CHECK(r_int < -1e-6);
  CHECK(r_int > kRewardFloor);
}

TEST_CASE("identify with truth at nominal stays at nominal") {
  const RobotModel m = test::default_model();
  const TunableParams nominal = test::nominal_params(m);

  RolloutConfig cfg;
  cfg.duration = 4.0;
  cfg.dt = 1e-3;
  const GaitParams g = sidewinding_gait(m, 0.5);

  ReferenceSet refs;
  refs.gaits.push_back(g);
  refs.trajectories.push_back(rollout(m, nominal, g, cfg));
  refs.names.push_back("g050");

  IdentifyOptions opt;
  opt.phase = Phase::kBoth;
  opt.rollout = cfg;
  opt.ppo.max_iterations = 3;
  opt.ppo.episodes_per_iteration = 4;
  opt.ppo.horizon = 4;
  opt.ppo.seed = 11;
  opt.ppo.jobs = 2;

  const IdentifyResult res = identify(m, refs, nominal, opt);
  // The start scores exactly zero, nothing can beat it, so the best never moves.
  CHECK(res.params.actuators[0].motor_constant ==
        doctest::Approx(nominal.actuators[0].motor_constant).epsilon(0.05));
  CHECK(res.params.stribeck.mu_c == doctest::Approx(nominal.stribeck.mu_c).epsilon(0.05));
  for (const auto& phase : res.phases) {
    CHECK(phase.train.best_reward >= phase.train.history.front().mean_reward);
    CHECK(phase.train.best_reward == 0.0);
  }
}

TEST_CASE("identify is seed-deterministic") {
  const RobotModel m = test::default_model();
  const TunableParams nominal = test::nominal_params(m);
  TunableParams truth = nominal;
  truth.stribeck.mu_c *= 0.7;

  RolloutConfig cfg;
  cfg.duration = 4.0;
  cfg.dt = 1e-3;
  const GaitParams g = sidewinding_gait(m, 0.35);

  ReferenceSet refs;
  refs.gaits.push_back(g);
  refs.trajectories.push_back(rollout(m, truth, g, cfg));
  refs.names.push_back("g035");

  IdentifyOptions opt;
  opt.phase = Phase::kExternal;
  opt.rollout = cfg;
  opt.ppo.max_iterations = 2;
  opt.ppo.episodes_per_iteration = 4;
  opt.ppo.horizon = 4;
  opt.ppo.seed = 21;
  opt.ppo.jobs = 2;

  const IdentifyResult a = identify(m, refs, nominal, opt);
  const IdentifyResult b = identify(m, refs, nominal, opt);
  CHECK(a.params.stribeck.mu_c == b.params.stribeck.mu_c);
  CHECK(a.params.stribeck.mu_s == b.params.stribeck.mu_s);
  CHECK(a.phases[0].train.best_reward == b.phases[0].train.best_reward);
  REQUIRE(a.phases[0].train.history.size() == b.phases[0].train.history.size());
  for (size_t i = 0; i < a.phases[0].train.history.size(); ++i)
    CHECK(a.phases[0].train.history[i].mean_reward == b.phases[0].train.history[i].mean_reward);
}

TEST_SUITE_END();
