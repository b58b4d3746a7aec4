#include "snakesim/contact.hpp"

#include <cmath>

namespace snakesim {

GroundParams GroundParams::from(const RobotModel& model, const StribeckParams& stribeck,
                                bool clamp_normal) {
  GroundParams p;
  p.k1 = model.ground_spring_k1;
  p.k2 = model.ground_damper_k2;
  p.mu_c = stribeck.mu_c;
  p.mu_s = stribeck.mu_s;
  p.mu_v = stribeck.mu_v;
  p.v_s = stribeck.v_s;
  p.clamp_normal = clamp_normal;
  return p;
}

double stribeck_coefficient(double velocity, const GroundParams& params) {
  const double r = velocity / params.v_s;
  return params.mu_c - (params.mu_c - params.mu_s) * std::exp(-r * r);
}

namespace {
inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace

Vec3 ground_reaction(const Vec3& p, const Vec3& v, const GroundParams& params) {
  if (p.z() > 0.0) return Vec3::Zero();
  double fz = -params.k1 * p.z() - params.k2 * v.z();
  if (params.clamp_normal && fz < 0.0) fz = 0.0;
  Vec3 f;
  f.z() = fz;
  for (int i = 0; i < 2; ++i) {
    const double s = stribeck_coefficient(v[i], params);
    f[i] = -s * fz * sgn(v[i]) - params.mu_v * v[i];
  }
  return f;
}

}  // namespace snakesim
