#pragma once

#include <string>
#include <vector>

#include "snakesim/actuation.hpp"
#include "snakesim/contact.hpp"
#include "snakesim/dynamics.hpp"
#include "snakesim/math.hpp"
#include "snakesim/model.hpp"

namespace snakesim {

// Uniformly sampled head pose + joint angle record. Immutable interchange
// format between reference generation, identification, and metrics.
struct Trajectory {
  double sample_dt = 0.0;
  std::vector<double> time;
  std::vector<Vec3> head_pos;
  std::vector<Quat> head_quat;
  MatX joint_angles;  // n_samples x joint_count
  MatX joint_refs;    // n_samples x joint_count

  int samples() const { return static_cast<int>(time.size()); }
  int joints() const { return static_cast<int>(joint_angles.cols()); }
};

// CSV columns: t,x,y,z,qw,qx,qy,qz,q1..qN,r1..rN (SI units, radians).
void save_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory load_trajectory_csv(const std::string& path);

struct RolloutConfig {
  double duration = 10.0;   // recorded span, settle excluded
  double dt = 1e-4;
  double record_hz = 100.0;
  double settle_time = 0.5; // references held at their t=0 values
  double initial_x = 0.0;   // head start offset
  double initial_y = 0.0;
  double initial_heading = 0.0;  // about +z
  uint64_t seed = 0;
  double blowup_limit = 1e6;
  bool clamp_normal_force = true;

  void validate() const;
  int steps_per_record() const;
};

// Additive zero-mean Gaussian measurement noise applied to the recorded
// samples (not the physics).
struct NoiseSpec {
  double head_pos_std = 0.0;  // m
  double joint_std = 0.0;     // rad

  bool enabled() const { return head_pos_std > 0.0 || joint_std > 0.0; }
};

// Deterministic full rollout: settle the chain on the ground, then drive the
// oscillator gait through the servo/actuator model, the contact model, and
// the integrator, recording at record_hz. Throws SimulationError if any
// state magnitude exceeds blowup_limit.
Trajectory rollout(const RobotModel& model, const TunableParams& tunables,
                   const GaitParams& gait, const RolloutConfig& config);

// Synthesizes a stand-in hardware recording from hidden ground-truth
// parameters, optionally with measurement noise. The caller is responsible
// for keeping `truth` sealed away from identification.
Trajectory make_reference(const RobotModel& model, const TunableParams& truth,
                          const GaitParams& gait, const RolloutConfig& config,
                          const NoiseSpec& noise);

// Straight chain heading +x resting on the plane (before settling).
SimState initial_state(const RobotModel& model, const RolloutConfig& config);

}  // namespace snakesim
