#pragma once

#include <vector>

#include "snakesim/math.hpp"
#include "snakesim/model.hpp"

namespace snakesim {

// Generalized velocity layout (nv = 6 + joint_count):
//   [0:3)  world-frame linear velocity of the head center of mass
//   [3:6)  body-frame angular velocity of the head
//   [6:nv) joint rates
//
// Link frames sit at the link centers of mass, x-axis along the link toward
// the head. Joint j couples link j-1 to link j at the tail of link j-1;
// pitch joints rotate about body y, yaw joints about body z.

// Position/velocity kinematics of every link, joint, and contact point,
// evaluated once per step.
struct Kinematics {
  int n_links = 0;
  int nv = 0;

  std::vector<Mat3> rot;        // world rotation per link
  std::vector<Mat3> inertia_world;  // R * I_principal * R^T per link
  std::vector<Vec3> com;        // world CoM position per link
  std::vector<Vec3> omega;      // world angular velocity per link
  std::vector<Vec3> vel;        // world CoM velocity per link
  std::vector<Vec3> bias_ang;   // angular acceleration with zero generalized accel
  std::vector<Vec3> bias_lin;   // CoM acceleration with zero generalized accel
  std::vector<Vec3> joint_pos;  // world joint position, per joint
  std::vector<Vec3> joint_axis; // world joint axis, per joint
  std::vector<Vec3> contact_pos;
  std::vector<Vec3> contact_vel;

  void resize(const RobotModel& model);
};

void compute_kinematics(const RobotModel& model, const SimState& state, Kinematics* kin);

// Adds the generalized force of a wrench (force f, pure torque n) applied at
// world point p on link i.
void apply_wrench(const Kinematics& kin, int link, const Vec3& point, const Vec3& force,
                  const Vec3& torque, VecX* out);

// Partitioned terms of the equations of motion
//   D(q) qdd + H(q, qd) = [0; B_a u] + J^T F_grf.
struct DynamicsTerms {
  MatX D;  // (6+n) x (6+n), symmetric positive definite
  VecX H;  // Coriolis/centrifugal + gravity

  auto D_H() const { return D.topLeftCorner(6, 6); }
  auto D_Ha() const { return D.topRightCorner(6, D.cols() - 6); }
  auto D_aH() const { return D.bottomLeftCorner(D.rows() - 6, 6); }
  auto D_a() const { return D.bottomRightCorner(D.rows() - 6, D.cols() - 6); }
  auto H_H() const { return H.head(6); }
  auto H_a() const { return H.tail(H.size() - 6); }
};

MatX compute_mass_matrix(const RobotModel& model, const SimState& state);
VecX compute_bias(const RobotModel& model, const SimState& state);
DynamicsTerms compute_dynamics_terms(const RobotModel& model, const SimState& state);

struct ContactData {
  std::vector<Vec3> pos;
  std::vector<Vec3> vel;
  std::vector<MatX> jac;  // 3 x nv per contact point, world-frame point velocity map
};

ContactData contact_jacobians(const RobotModel& model, const SimState& state);

// Scratch space reused across steps of one rollout. Not shared across threads.
struct StepWorkspace {
  Kinematics kin;
  MatX D;
  VecX H;
  VecX rhs;
  VecX udot;
  MatX jac_scratch;
  MatX rank_scratch;
  Eigen::LDLT<MatX> ldlt;

  void resize(const RobotModel& model);
};

// Kinematics for `state`, including contact point positions/velocities the
// caller needs to evaluate ground forces before finishing the step.
void prepare_step(const RobotModel& model, const SimState& state, StepWorkspace* ws);

// One semi-implicit Euler step using the kinematics already in `ws` (which
// must correspond to `state`). Transmission inertia is reflected onto the
// joint diagonal, so the rotor reaction torque is implicit and exact.
// joint_torques excludes the rotor reaction terms. Throws SimulationError on
// a singular mass matrix.
SimState finish_step(const RobotModel& model, const TunableParams& tunables,
                     const SimState& state, const VecX& joint_torques,
                     const std::vector<Vec3>& contact_forces, double dt, StepWorkspace* ws);

SimState step(const RobotModel& model, const TunableParams& tunables, const SimState& state,
              const VecX& joint_torques, const std::vector<Vec3>& contact_forces, double dt,
              StepWorkspace* ws);

// Last solved generalized acceleration (valid after finish_step).
inline const VecX& last_acceleration(const StepWorkspace& ws) { return ws.udot; }

double kinetic_energy(const RobotModel& model, const SimState& state);
double potential_energy(const RobotModel& model, const SimState& state);
Vec3 linear_momentum(const RobotModel& model, const SimState& state);

}  // namespace snakesim
