#pragma once

#include "snakesim/math.hpp"
#include "snakesim/model.hpp"

namespace snakesim {

// Compliant ground: spring-damper normal force plus Stribeck/Coulomb/viscous
// tangential friction, evaluated pointwise on a flat plane at z = 0.
struct GroundParams {
  double k1 = 0.0;    // N/m
  double k2 = 0.0;    // N*s/m
  double mu_c = 0.0;
  double mu_s = 0.0;
  double mu_v = 0.0;  // N*s/m
  double v_s = 0.0;   // m/s
  // A compliant surface cannot pull; with the clamp off the damper term may
  // yield a downward normal force during fast separation (strict-model mode).
  bool clamp_normal = true;

  static GroundParams from(const RobotModel& model, const StribeckParams& stribeck,
                           bool clamp_normal = true);
};

// Velocity-dependent friction coefficient
//   s(v) = mu_c - (mu_c - mu_s) * exp(-v^2 / v_s^2).
double stribeck_coefficient(double velocity, const GroundParams& params);

// Ground reaction force at one contact point. Zero above the plane; below it,
//   F_z = -k1*p_z - k2*pdot_z
//   F_i = -s_i*F_z*sgn(pdot_i) - mu_v*pdot_i   (i = x, y)
// with sgn(0) = 0. The tangential force is discontinuous at zero slip
// velocity and (through the mu_v term) at contact onset while sliding; the
// integrator's small dt keeps the resulting chatter bounded.
Vec3 ground_reaction(const Vec3& contact_pos, const Vec3& contact_vel,
                     const GroundParams& params);

}  // namespace snakesim
