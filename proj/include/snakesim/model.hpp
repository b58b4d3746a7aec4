#pragma once

#include <string>
#include <vector>

#include "snakesim/errors.hpp"
#include "snakesim/math.hpp"

namespace snakesim {

enum class JointAxis { kPitch, kYaw };

// Kinematic/inertial description of the articulated chain plus the fixed
// ground and servo constants. Immutable after construction; share freely
// across concurrent rollouts.
struct RobotModel {
  int module_count = 0;  // links, head included
  int joint_count = 0;   // module_count - 1

  std::vector<double> link_mass_kg;          // per link
  std::vector<Vec3> link_inertia_kgm2;       // principal, per link
  std::vector<double> link_length_m;         // per link
  std::vector<JointAxis> joint_axis_pattern; // pitch at joint 1, then alternating

  double contact_point_offset_m = 0.0;  // contact point sits this far below each link center
  double ground_spring_k1 = 0.0;        // N/m
  double ground_damper_k2 = 0.0;        // N*s/m
  double gravity = 9.81;                // m/s^2

  // Servo position loop; fixed, not identification targets.
  double servo_kp = 0.0;       // V/rad
  double servo_kd = 0.0;       // V*s/rad
  double torque_limit = 8.0;   // N*m

  double total_mass() const;
  void validate() const;  // throws ConfigError naming the offending field
};

RobotModel load_model(const std::string& path);
void save_model(const std::string& path, const RobotModel& model);

struct ActuatorParams {
  double transmission_inertia = 0.0;  // kg*m^2
  double internal_damping = 0.0;      // N*m*s/rad
  double motor_constant = 0.0;        // N*m/V
};

struct StribeckParams {
  double mu_c = 0.0;  // Coulomb
  double mu_s = 0.0;  // static, >= mu_c
  double mu_v = 0.0;  // viscous, N*s/m
  double v_s = 0.0;   // Stribeck velocity, m/s
};

// The identification target. Actuator entries are per joint; identical
// entries are the shared (default) configuration.
struct TunableParams {
  std::vector<ActuatorParams> actuators;
  StribeckParams stribeck;

  bool uniform_actuators() const;
  void validate() const;  // throws ConfigError; mu_s >= mu_c is not repaired
};

TunableParams load_params(const std::string& path, int joint_count);
void save_params(const std::string& path, const TunableParams& params);

// Floating-base head pose/twist plus joint coordinates. Angular velocity is
// expressed in the head body frame; linear velocity in the world frame.
struct SimState {
  Vec3 head_position = Vec3::Zero();
  Quat head_orientation = Quat::Identity();
  Vec3 head_linear_velocity = Vec3::Zero();
  Vec3 head_angular_velocity = Vec3::Zero();
  VecX joint_angles;
  VecX joint_rates;
  VecX actuator_rotor_rates;
  double time = 0.0;

  static SimState zero(int joint_count);
  void validate(int joint_count) const;
};

struct ScalarRange {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  double nominal = 0.0;
};

enum class ParamSubset { kInternal, kExternal, kFull };

// Affine bijection between the box [lower, upper]^n of free tunable scalars
// and normalized coordinates in [-1, 1]^n. The static friction coefficient is
// carried as delta = mu_s - mu_c so every point of the box is a valid
// parameter set (mu_s >= mu_c by construction).
class ParamSpace {
 public:
  static ParamSpace make(const TunableParams& nominal, int joint_count,
                         ParamSubset subset, bool per_joint_actuators = false,
                         double lower_mult = 0.25, double upper_mult = 4.0);

  int dim() const { return static_cast<int>(dims_.size()); }
  const std::vector<ScalarRange>& dims() const { return dims_; }

  // Throws ConfigError if any free scalar lies outside its bounds.
  VecX normalize(const TunableParams& params) const;

  // Writes the free scalars onto `base`; the rest pass through unchanged.
  // Throws ConfigError if any coordinate lies outside [-1, 1] (tolerance 1e-9).
  TunableParams denormalize(const VecX& normalized, const TunableParams& base) const;

  // Same map expressed relative to an anchor point: value = anchor_value +
  // (x - anchor_x) * halfwidth. At x == anchor_x this reproduces `anchor`
  // bitwise, which keeps a search's start point exactly on its baseline
  // (frictional contact is chaotic enough to turn one ulp of parameter
  // difference into millimeters of trajectory).
  TunableParams denormalize_anchored(const VecX& normalized, const VecX& anchor_x,
                                     const TunableParams& anchor) const;

  VecX nominal_normalized() const;

 private:
  std::vector<ScalarRange> dims_;
  ParamSubset subset_ = ParamSubset::kFull;
  bool per_joint_ = false;
  int joint_count_ = 0;

  std::vector<double> extract(const TunableParams& params) const;
  void inject(const std::vector<double>& values, TunableParams* out) const;
};

}  // namespace snakesim
