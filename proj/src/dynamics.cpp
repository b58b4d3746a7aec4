#include "snakesim/dynamics.hpp"

#include <cmath>

#include "snakesim/errors.hpp"

namespace snakesim {

void Kinematics::resize(const RobotModel& model) {
  n_links = model.module_count;
  nv = 6 + model.joint_count;
  rot.resize(n_links);
  inertia_world.resize(n_links);
  com.resize(n_links);
  omega.resize(n_links);
  vel.resize(n_links);
  bias_ang.resize(n_links);
  bias_lin.resize(n_links);
  joint_pos.resize(model.joint_count);
  joint_axis.resize(model.joint_count);
  contact_pos.resize(n_links);
  contact_vel.resize(n_links);
}

void compute_kinematics(const RobotModel& model, const SimState& state, Kinematics* kin) {
  if (kin->n_links != model.module_count) kin->resize(model);

  kin->rot[0] = state.head_orientation.toRotationMatrix();
  kin->com[0] = state.head_position;
  kin->omega[0] = kin->rot[0] * state.head_angular_velocity;
  kin->vel[0] = state.head_linear_velocity;
  kin->bias_ang[0].setZero();
  kin->bias_lin[0].setZero();

  for (int j = 0; j < model.joint_count; ++j) {
    const int parent = j;      // link index
    const int child = j + 1;
    const Vec3 axis_local =
        model.joint_axis_pattern[j] == JointAxis::kPitch ? Vec3::UnitY() : Vec3::UnitZ();

    const Vec3 tail = kin->rot[parent] * Vec3(-0.5 * model.link_length_m[parent], 0, 0);
    const Vec3 g = kin->com[parent] + tail;
    kin->joint_pos[j] = g;

    const Vec3 axis = kin->rot[parent] * axis_local;
    kin->joint_axis[j] = axis;
    kin->rot[child] =
        kin->rot[parent] * Eigen::AngleAxisd(state.joint_angles[j], axis_local).toRotationMatrix();
    const Vec3 arm = kin->rot[child] * Vec3(-0.5 * model.link_length_m[child], 0, 0);
    kin->com[child] = g + arm;

    const double qd = state.joint_rates[j];
    kin->omega[child] = kin->omega[parent] + axis * qd;
    const Vec3 v_joint = kin->vel[parent] + kin->omega[parent].cross(tail);
    kin->vel[child] = v_joint + kin->omega[child].cross(arm);

    // Bias (zero generalized acceleration) terms.
    kin->bias_ang[child] = kin->bias_ang[parent] + kin->omega[parent].cross(axis) * qd;
    const Vec3 a_joint = kin->bias_lin[parent] + kin->bias_ang[parent].cross(tail) +
                         kin->omega[parent].cross(kin->omega[parent].cross(tail));
    kin->bias_lin[child] = a_joint + kin->bias_ang[child].cross(arm) +
                           kin->omega[child].cross(kin->omega[child].cross(arm));
  }

  for (int i = 0; i < kin->n_links; ++i) {
    const Vec3 offset = kin->rot[i] * Vec3(0, 0, -model.contact_point_offset_m);
    kin->contact_pos[i] = kin->com[i] + offset;
    kin->contact_vel[i] = kin->vel[i] + kin->omega[i].cross(offset);
    kin->inertia_world[i].noalias() =
        kin->rot[i] * model.link_inertia_kgm2[i].asDiagonal() * kin->rot[i].transpose();
  }
}

void apply_wrench(const Kinematics& kin, int link, const Vec3& point, const Vec3& force,
                  const Vec3& torque, VecX* out) {
  out->head<3>() += force;
  const Vec3 m_base = torque + (point - kin.com[0]).cross(force);
  out->segment<3>(3) += kin.rot[0].transpose() * m_base;
  for (int j = 0; j < link; ++j) {
    const Vec3 m_joint = torque + (point - kin.joint_pos[j]).cross(force);
    (*out)[6 + j] += kin.joint_axis[j].dot(m_joint);
  }
}

namespace {

// Fills the 6 x nv twist Jacobian of a point fixed to `link`: rows 0..2 are
// the angular velocity map, rows 3..5 the point velocity map. Writes only
// the leading 6 + link columns; later columns are untouched (the joints past
// `link` cannot move the point).
void point_jacobian(const Kinematics& kin, int link, const Vec3& point,
                    Eigen::Ref<MatX> jac) {
  jac.leftCols(6 + link).setZero();
  jac.block<3, 3>(3, 0).setIdentity();
  for (int k = 0; k < 3; ++k) {
    const Vec3 w = kin.rot[0].col(k);
    jac.block<3, 1>(0, 3 + k) = w;
    jac.block<3, 1>(3, 3 + k) = w.cross(point - kin.com[0]);
  }
  for (int j = 0; j < link; ++j) {
    const Vec3& a = kin.joint_axis[j];
    jac.block<3, 1>(0, 6 + j) = a;
    jac.block<3, 1>(3, 6 + j) = a.cross(point - kin.joint_pos[j]);
  }
}

void mass_matrix_from_kinematics(const RobotModel& model, const Kinematics& kin, MatX& D,
                                 MatX& jac_scratch, MatX& rank_scratch) {
  const int nv = kin.nv;
  D.setZero(nv, nv);
  if (jac_scratch.rows() != 6 || jac_scratch.cols() != nv) jac_scratch.resize(6, nv);
  if (rank_scratch.rows() != nv || rank_scratch.cols() != 3) rank_scratch.resize(nv, 3);

  for (int i = 0; i < kin.n_links; ++i) {
    const int nc = 6 + i;
    point_jacobian(kin, i, kin.com[i], jac_scratch);
    const auto ang = jac_scratch.topLeftCorner(3, nc);
    const auto lin = jac_scratch.bottomLeftCorner(3, nc);
    auto weighted = rank_scratch.topRows(nc);
    weighted.noalias() = ang.transpose() * kin.inertia_world[i];
    D.topLeftCorner(nc, nc).noalias() += weighted * ang;
    D.topLeftCorner(nc, nc).noalias() += model.link_mass_kg[i] * lin.transpose() * lin;
  }
  // Mirror the lower triangle so the partition identity D_aH = D_Ha^T holds
  // exactly, not just to rounding.
  D.triangularView<Eigen::StrictlyUpper>() = D.transpose().triangularView<Eigen::StrictlyUpper>();
}

void bias_from_kinematics(const RobotModel& model, const Kinematics& kin, VecX& H) {
  H.setZero(kin.nv);
  const Vec3 gravity_accel(0, 0, -model.gravity);
  for (int i = 0; i < kin.n_links; ++i) {
    const Vec3 torque = kin.inertia_world[i] * kin.bias_ang[i] +
                        kin.omega[i].cross(kin.inertia_world[i] * kin.omega[i]);
    const Vec3 force = model.link_mass_kg[i] * (kin.bias_lin[i] - gravity_accel);
    apply_wrench(kin, i, kin.com[i], force, torque, &H);
  }
}

}  // namespace

MatX compute_mass_matrix(const RobotModel& model, const SimState& state) {
  Kinematics kin;
  compute_kinematics(model, state, &kin);
  MatX D, scratch, rank;
  mass_matrix_from_kinematics(model, kin, D, scratch, rank);
  return D;
}

VecX compute_bias(const RobotModel& model, const SimState& state) {
  Kinematics kin;
  compute_kinematics(model, state, &kin);
  VecX H;
  bias_from_kinematics(model, kin, H);
  return H;
}

DynamicsTerms compute_dynamics_terms(const RobotModel& model, const SimState& state) {
  Kinematics kin;
  compute_kinematics(model, state, &kin);
  DynamicsTerms terms;
  MatX scratch, rank;
  mass_matrix_from_kinematics(model, kin, terms.D, scratch, rank);
  bias_from_kinematics(model, kin, terms.H);
  return terms;
}

ContactData contact_jacobians(const RobotModel& model, const SimState& state) {
  Kinematics kin;
  compute_kinematics(model, state, &kin);
  ContactData data;
  data.pos = kin.contact_pos;
  data.vel = kin.contact_vel;
  MatX jac(6, kin.nv);
  for (int i = 0; i < kin.n_links; ++i) {
    jac.setZero();
    point_jacobian(kin, i, kin.contact_pos[i], jac);
    data.jac.push_back(jac.bottomRows(3));
  }
  return data;
}

void StepWorkspace::resize(const RobotModel& model) {
  kin.resize(model);
  const int nv = kin.nv;
  D.resize(nv, nv);
  H.resize(nv);
  rhs.resize(nv);
  udot.resize(nv);
  jac_scratch.resize(6, nv);
  rank_scratch.resize(nv, 3);
  ldlt = Eigen::LDLT<MatX>(nv);
}

void prepare_step(const RobotModel& model, const SimState& state, StepWorkspace* ws) {
  if (ws->kin.nv != 6 + model.joint_count) ws->resize(model);
  compute_kinematics(model, state, &ws->kin);
}

SimState finish_step(const RobotModel& model, const TunableParams& tunables,
                     const SimState& state, const VecX& joint_torques,
                     const std::vector<Vec3>& contact_forces, double dt, StepWorkspace* ws) {
  const int n = model.joint_count;
  if (joint_torques.size() != n) throw SimulationError("joint torque vector length mismatch");
  if (!(dt > 0.0)) throw SimulationError("dt must be > 0");

  mass_matrix_from_kinematics(model, ws->kin, ws->D, ws->jac_scratch, ws->rank_scratch);
  for (int j = 0; j < n; ++j)
    ws->D(6 + j, 6 + j) += tunables.actuators[j].transmission_inertia;

  bias_from_kinematics(model, ws->kin, ws->H);
  ws->rhs = -ws->H;
  ws->rhs.tail(n) += joint_torques;
  if (!contact_forces.empty()) {
    for (int i = 0; i < ws->kin.n_links; ++i) {
      if (contact_forces[i].isZero()) continue;
      apply_wrench(ws->kin, i, ws->kin.contact_pos[i], contact_forces[i], Vec3::Zero(),
                   &ws->rhs);
    }
  }

  ws->ldlt.compute(ws->D);
  ws->udot = ws->ldlt.solve(ws->rhs);
  if (!ws->udot.allFinite())
    throw SimulationError("singular mass matrix at t = " + std::to_string(state.time));

  SimState next = state;
  next.head_linear_velocity += dt * ws->udot.head<3>();
  next.head_angular_velocity += dt * ws->udot.segment<3>(3);
  next.joint_rates += dt * ws->udot.tail(n);

  next.head_position += dt * next.head_linear_velocity;
  next.head_orientation =
      (state.head_orientation * quat_exp(dt * next.head_angular_velocity)).normalized();
  next.joint_angles += dt * next.joint_rates;
  next.actuator_rotor_rates = next.joint_rates;  // unit gear ratio
  next.time = state.time + dt;
  return next;
}

SimState step(const RobotModel& model, const TunableParams& tunables, const SimState& state,
              const VecX& joint_torques, const std::vector<Vec3>& contact_forces, double dt,
              StepWorkspace* ws) {
  prepare_step(model, state, ws);
  return finish_step(model, tunables, state, joint_torques, contact_forces, dt, ws);
}

double kinetic_energy(const RobotModel& model, const SimState& state) {
  Kinematics kin;
  compute_kinematics(model, state, &kin);
  double ke = 0.0;
  for (int i = 0; i < kin.n_links; ++i) {
    ke += 0.5 * model.link_mass_kg[i] * kin.vel[i].squaredNorm();
    ke += 0.5 * kin.omega[i].dot(kin.inertia_world[i] * kin.omega[i]);
  }
  return ke;
}

double potential_energy(const RobotModel& model, const SimState& state) {
  Kinematics kin;
  compute_kinematics(model, state, &kin);
  double pe = 0.0;
  for (int i = 0; i < kin.n_links; ++i)
    pe += model.link_mass_kg[i] * model.gravity * kin.com[i].z();
  return pe;
}

Vec3 linear_momentum(const RobotModel& model, const SimState& state) {
  Kinematics kin;
  compute_kinematics(model, state, &kin);
  Vec3 p = Vec3::Zero();
  for (int i = 0; i < kin.n_links; ++i) p += model.link_mass_kg[i] * kin.vel[i];
  return p;
}

}  // namespace snakesim
