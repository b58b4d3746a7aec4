#pragma once

#include <functional>
#include <string>
#include <vector>

#include "snakesim/metrics.hpp"
#include "snakesim/model.hpp"
#include "snakesim/ppo.hpp"
#include "snakesim/simulator.hpp"

namespace snakesim {

// Reward assigned when a candidate rollout blows up or a sinusoid fit
// degenerates; far below any physical reward so it never becomes the best.
inline constexpr double kRewardFloor = -1.0e3;

// Head-position reward: negated xy distance between the final samples.
// Zero iff the endpoints coincide.
double reward_external(const Trajectory& reference, const Trajectory& candidate);

enum class InternalRewardKind { kCpgFit, kTrajectoryL2 };

// Joint-signal reward. kCpgFit fits per-joint sinusoids to the achieved
// joint angles of both trajectories and penalizes the squared
// amplitude/frequency/phase mismatches (phase differences wrapped to
// (-pi, pi]); zero iff the two robots moved their joints identically in the
// fitted statistics. kTrajectoryL2 is the negated RMS of the pointwise joint
// angle differences.
double reward_internal(const Trajectory& reference, const Trajectory& candidate,
                       InternalRewardKind kind = InternalRewardKind::kCpgFit);

enum class Phase { kInternal, kExternal, kBoth };

struct ReferenceSet {
  std::vector<std::string> names;
  std::vector<Trajectory> trajectories;
  std::vector<GaitParams> gaits;

  int size() const { return static_cast<int>(trajectories.size()); }
};

struct IdentifyOptions {
  Phase phase = Phase::kBoth;
  bool per_joint_actuators = false;
  InternalRewardKind internal_reward = InternalRewardKind::kCpgFit;
  PpoConfig ppo;
  RolloutConfig rollout;  // dt/settle/initial pose; duration and rate follow each reference
  double bound_lower_mult = 0.25;
  double bound_upper_mult = 4.0;
};

struct PhaseLog {
  std::string phase;
  TrainResult train;
  TunableParams params_after;
};

struct IdentifyResult {
  TunableParams params;  // best-seen by evaluation reward
  std::vector<PhaseLog> phases;
};

// Per-iteration streaming hook: (phase name, record, params snapshot).
using IdentifyCallback =
    std::function<void(const std::string&, const IterationRecord&, const TunableParams&)>;

// PPO search over normalized parameter coordinates. Episode steps apply a
// bounded delta, rerun one rollout per reference gait, and score the summed
// phase reward. Rollout blow-ups score kRewardFloor and training continues.
IdentifyResult identify(const RobotModel& model, const ReferenceSet& refs,
                        const TunableParams& start, const IdentifyOptions& options,
                        const IdentifyCallback& on_iteration = {});

}  // namespace snakesim
