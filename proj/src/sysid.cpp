#include "snakesim/sysid.hpp"

#include <cmath>

#include "snakesim/errors.hpp"

namespace snakesim {

namespace {

void check_aligned(const Trajectory& a, const Trajectory& b) {
  if (a.samples() != b.samples() || a.joints() != b.joints())
    throw ConfigError("trajectory length mismatch between reference and candidate");
  if (std::abs(a.sample_dt - b.sample_dt) > 1e-9)
    throw ConfigError("trajectory sample rate mismatch");
}

// The recorded desired signals are clean sinusoids; bootstrap the frequency
// from zero crossings of the widest-swinging one, then let the fit refine it.
double estimate_frequency(const Trajectory& traj) {
  int best_col = 0;
  double best_span = -1.0;
  for (int j = 0; j < traj.joints(); ++j) {
    const double span = traj.joint_refs.col(j).maxCoeff() - traj.joint_refs.col(j).minCoeff();
    if (span > best_span) {
      best_span = span;
      best_col = j;
    }
  }
  if (best_span <= 0.0) throw ConfigError("reference trajectory has flat desired signals");
  // Half-periods between the first and last sign change; immune to partial
  // cycles at the record boundaries.
  int crossings = 0;
  double first = 0.0, last = 0.0;
  for (int k = 1; k < traj.samples(); ++k) {
    const double a = traj.joint_refs(k - 1, best_col);
    const double b = traj.joint_refs(k, best_col);
    if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) {
      if (crossings == 0) first = traj.time[k];
      last = traj.time[k];
      ++crossings;
    }
  }
  if (crossings < 2 || !(last > first))
    throw ConfigError("could not estimate gait frequency from reference");
  return (crossings - 1) / (2.0 * (last - first));
}

}  // namespace

double reward_external(const Trajectory& reference, const Trajectory& candidate) {
  check_aligned(reference, candidate);
  const int last = reference.samples() - 1;
  const double dx = reference.head_pos[last].x() - candidate.head_pos[last].x();
  const double dy = reference.head_pos[last].y() - candidate.head_pos[last].y();
  return -std::sqrt(dx * dx + dy * dy);
}

double reward_internal(const Trajectory& reference, const Trajectory& candidate,
                       InternalRewardKind kind) {
  check_aligned(reference, candidate);
  const int n = reference.samples();
  const int joints = reference.joints();

  if (kind == InternalRewardKind::kTrajectoryL2) {
    double sq = 0.0;
    for (int j = 0; j < joints; ++j)
      sq += (reference.joint_angles.col(j) - candidate.joint_angles.col(j)).squaredNorm();
    return -std::sqrt(sq / (static_cast<double>(n) * joints));
  }

  // CPG variables of the reference robot's achieved joint motion vs the
  // candidate's; the recorded desired signals only seed the frequency.
  const double f0 = estimate_frequency(reference);
  std::vector<double> des(n), act(n);
  double reward = 0.0;
  for (int j = 0; j < joints; ++j) {
    for (int k = 0; k < n; ++k) {
      des[k] = reference.joint_angles(k, j);
      act[k] = candidate.joint_angles(k, j);
    }
    const SinusoidFit fit_des = fit_sinusoid(reference.time, des, f0);
    const SinusoidFit fit_act = fit_sinusoid(reference.time, act, f0);
    if (fit_des.degenerate && fit_act.degenerate) continue;
    if (fit_act.degenerate || fit_des.degenerate) return kRewardFloor;
    const double dphi = wrap_angle(fit_des.phase - fit_act.phase);
    const double domega = fit_des.omega - fit_act.omega;
    const double damp = fit_des.amplitude - fit_act.amplitude;
    reward -= dphi * dphi + domega * domega + damp * damp;
  }
  return reward;
}

IdentifyResult identify(const RobotModel& model, const ReferenceSet& refs,
                        const TunableParams& start, const IdentifyOptions& options,
                        const IdentifyCallback& on_iteration) {
  if (refs.size() < 1) throw ConfigError("identify needs at least one reference trajectory");
  if (static_cast<int>(refs.gaits.size()) != refs.size())
    throw ConfigError("identify needs one gait per reference");
  start.validate();
  options.ppo.validate();

  std::vector<Phase> schedule;
  if (options.phase == Phase::kBoth)
    schedule = {Phase::kInternal, Phase::kExternal};
  else
    schedule = {options.phase};

  IdentifyResult result;
  result.params = start;

  for (size_t stage = 0; stage < schedule.size(); ++stage) {
    const Phase phase = schedule[stage];
    const bool internal = phase == Phase::kInternal;
    const ParamSubset subset = internal ? ParamSubset::kInternal : ParamSubset::kExternal;
    const ParamSpace space =
        ParamSpace::make(result.params, model.joint_count, subset,
                         internal && options.per_joint_actuators, options.bound_lower_mult,
                         options.bound_upper_mult);

    const TunableParams base = result.params;
    const VecX anchor_x = space.normalize(base);
    auto evaluate = [&, base, anchor_x](const VecX& x) -> double {
      TunableParams candidate_params;
      try {
        candidate_params = space.denormalize_anchored(x, anchor_x, base);
      } catch (const ConfigError&) {
        return kRewardFloor;
      }
      double reward = 0.0;
      for (int r = 0; r < refs.size(); ++r) {
        RolloutConfig cfg = options.rollout;
        const Trajectory& ref = refs.trajectories[r];
        cfg.duration = ref.time.back() - ref.time.front();
        cfg.record_hz = 1.0 / ref.sample_dt;
        try {
          const Trajectory cand = rollout(model, candidate_params, refs.gaits[r], cfg);
          reward += internal ? reward_internal(ref, cand, options.internal_reward)
                             : reward_external(ref, cand);
        } catch (const SimulationError&) {
          return kRewardFloor;
        }
      }
      return reward;
    };

    ParamEnv env;
    env.dim = space.dim();
    env.start = anchor_x;
    env.evaluate = evaluate;

    PpoConfig ppo = options.ppo;
    ppo.seed = split_seed(options.ppo.seed, internal ? 101 : 202);

    const std::string phase_name = internal ? "internal" : "external";
    auto stream = [&](const IterationRecord& record) {
      if (on_iteration)
        on_iteration(phase_name, record,
                     space.denormalize_anchored(record.best_state, anchor_x, base));
    };
    TrainResult train = ppo_train(env, ppo, stream);

    result.params = space.denormalize_anchored(train.best_state, anchor_x, base);
    result.phases.push_back({phase_name, std::move(train), result.params});
  }
  return result;
}

}  // namespace snakesim
