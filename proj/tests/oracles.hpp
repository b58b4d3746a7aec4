#pragma once

// Test-only oracles, independent of the library's dynamics assembly. The
// kinematics here are recomputed from scratch with quaternion recursions; the
// bias oracle differentiates scalar energies in a local exponential chart
// where the chart rates coincide with the generalized velocities.

#include <vector>

#include "snakesim/math.hpp"
#include "snakesim/model.hpp"

namespace snakesim::test {

struct LinkTwist {
  Vec3 omega;
  Vec3 vel;
  Quat orient;
  Vec3 com;
};

inline std::vector<LinkTwist> oracle_link_twists(const RobotModel& model, const SimState& s) {
  std::vector<LinkTwist> links(model.module_count);
  links[0].orient = s.head_orientation;
  links[0].com = s.head_position;
  links[0].omega = s.head_orientation * s.head_angular_velocity;  // to world frame
  links[0].vel = s.head_linear_velocity;
  for (int j = 0; j < model.joint_count; ++j) {
    const LinkTwist& p = links[j];
    LinkTwist& c = links[j + 1];
    const Vec3 axis_local =
        model.joint_axis_pattern[j] == JointAxis::kPitch ? Vec3::UnitY() : Vec3::UnitZ();
    const Vec3 axis = p.orient * axis_local;
    const Vec3 tail = p.orient * Vec3(-0.5 * model.link_length_m[j], 0, 0);
    const Vec3 joint = p.com + tail;
    c.orient = p.orient * Quat(Eigen::AngleAxisd(s.joint_angles[j], axis_local));
    const Vec3 arm = c.orient * Vec3(-0.5 * model.link_length_m[j + 1], 0, 0);
    c.com = joint + arm;
    c.omega = p.omega + axis * s.joint_rates[j];
    c.vel = p.vel + p.omega.cross(tail) + c.omega.cross(arm);
  }
  return links;
}

inline double oracle_kinetic_energy(const RobotModel& model, const SimState& s) {
  double ke = 0.0;
  const auto links = oracle_link_twists(model, s);
  for (int i = 0; i < model.module_count; ++i) {
    const Mat3 r = links[i].orient.toRotationMatrix();
    const Mat3 inertia = r * model.link_inertia_kgm2[i].asDiagonal() * r.transpose();
    ke += 0.5 * model.link_mass_kg[i] * links[i].vel.squaredNorm();
    ke += 0.5 * links[i].omega.dot(inertia * links[i].omega);
  }
  return ke;
}

inline double oracle_potential_energy(const RobotModel& model, const SimState& s) {
  double pe = 0.0;
  const auto links = oracle_link_twists(model, s);
  for (int i = 0; i < model.module_count; ++i)
    pe += model.link_mass_kg[i] * model.gravity * links[i].com.z();
  return pe;
}

// Closed-form directional derivative of the quaternion exponential, good to
// machine precision for small |phi|.
inline Quat quat_exp_dir(const Vec3& phi, const Vec3& phid) {
  const double theta = phi.norm();
  double a, b;  // e_v = a*phi ; derivative coefficients below
  if (theta < 1e-4) {
    a = 0.5 - theta * theta / 48.0;
    b = -1.0 / 24.0 + theta * theta / 960.0;  // A'(theta)/theta
  } else {
    a = std::sin(0.5 * theta) / theta;
    const double aprime = 0.5 * std::cos(0.5 * theta) / theta - std::sin(0.5 * theta) / (theta * theta);
    b = aprime / theta;
  }
  const double dot = phi.dot(phid);
  const double dw = -0.5 * a * dot;
  const Vec3 dv = b * dot * phi + a * phid;
  return Quat(dw, dv.x(), dv.y(), dv.z());  // not normalized: a tangent, not a rotation
}

// Body angular velocity of Q(t) = Q0 * exp(phi(t)) at phi with rate phid.
inline Vec3 chart_body_omega(const Vec3& phi, const Vec3& phid) {
  const Quat e = quat_exp(phi);
  const Quat de = quat_exp_dir(phi, phid);
  const Quat prod = e.conjugate() * de;
  return 2.0 * Vec3(prod.x(), prod.y(), prod.z());
}

// State displaced along the chart x = (dp, phi, dqa) with chart rates xd.
inline SimState chart_state(const RobotModel& model, const SimState& s0, const VecX& x,
                            const VecX& xd) {
  const int n = model.joint_count;
  SimState s = s0;
  s.head_position += x.head<3>();
  s.head_orientation = (s0.head_orientation * quat_exp(x.segment<3>(3))).normalized();
  s.joint_angles += x.tail(n);
  s.head_linear_velocity = xd.head<3>();
  s.head_angular_velocity = chart_body_omega(x.segment<3>(3), xd.segment<3>(3));
  s.joint_rates = xd.tail(n);
  return s;
}

// Bias vector by central differences of the Lagrangian in the chart:
//   H_k = sum_l d2T/dxd_k dx_l * xd_l - dT/dx_k + dV/dx_k.
// At the chart center the chart rates equal the generalized velocities and
// their first-order drift vanishes, so this matches the implementation's
// quasi-velocity bias directly.
inline VecX oracle_bias(const RobotModel& model, const SimState& s0) {
  const int nv = 6 + model.joint_count;
  VecX xd0(nv);
  xd0 << s0.head_linear_velocity, s0.head_angular_velocity, s0.joint_rates;

  auto ke = [&](const VecX& x, const VecX& xd) {
    return oracle_kinetic_energy(model, chart_state(model, s0, x, xd));
  };
  auto pe = [&](const VecX& x) {
    return oracle_potential_energy(model, chart_state(model, s0, x, VecX::Zero(nv)));
  };

  // KE is quadratic in the rates, so this gradient is exact up to roundoff.
  const double hv = 1e-3;
  auto grad_rate = [&](const VecX& x) {
    VecX g(nv);
    for (int k = 0; k < nv; ++k) {
      VecX p = xd0, m = xd0;
      p[k] += hv;
      m[k] -= hv;
      g[k] = (ke(x, p) - ke(x, m)) / (2.0 * hv);
    }
    return g;
  };

  const double rate_scale = std::max(1.0, xd0.norm());
  const double hs = 1e-4 / rate_scale;
  const VecX zero = VecX::Zero(nv);
  const VecX convective = (grad_rate(hs * xd0) - grad_rate(-hs * xd0)) / (2.0 * hs);

  const double hq = 1e-5;
  VecX h_out(nv);
  for (int k = 0; k < nv; ++k) {
    VecX p = zero, m = zero;
    p[k] += hq;
    m[k] -= hq;
    h_out[k] = convective[k] - (ke(p, xd0) - ke(m, xd0)) / (2.0 * hq) +
               (pe(p) - pe(m)) / (2.0 * hq);
  }
  return h_out;
}

inline SimState random_state(const RobotModel& model, Rng* rng, double angle_scale = 0.8,
                             double rate_scale = 1.0) {
  SimState s = SimState::zero(model.joint_count);
  for (int c = 0; c < 3; ++c) {
    s.head_position[c] = rng->uniform(-1.0, 1.0);
    s.head_linear_velocity[c] = rate_scale * rng->uniform(-1.0, 1.0);
    s.head_angular_velocity[c] = rate_scale * rng->uniform(-1.0, 1.0);
  }
  const Vec3 rotvec(rng->uniform(-2.0, 2.0), rng->uniform(-2.0, 2.0), rng->uniform(-2.0, 2.0));
  s.head_orientation = quat_exp(rotvec).normalized();
  for (int j = 0; j < model.joint_count; ++j) {
    s.joint_angles[j] = angle_scale * rng->uniform(-1.0, 1.0);
    s.joint_rates[j] = rate_scale * rng->uniform(-1.0, 1.0);
  }
  s.actuator_rotor_rates = s.joint_rates;
  return s;
}

}  // namespace snakesim::test
