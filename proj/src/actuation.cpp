#include "snakesim/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace snakesim {

using nlohmann::json;

void GaitParams::validate(int joint_count) const {
  if (amplitudes_rad.size() != joint_count || phases_rad.size() != joint_count)
    throw ConfigError("gait vectors must have one entry per joint");
  if (!(frequency_hz > 0.0)) throw ConfigError("frequency_hz must be > 0");
  for (int i = 0; i < joint_count; ++i)
    if (amplitudes_rad[i] < 0.0)
      throw ConfigError("amplitude must be >= 0 at joint " + std::to_string(i + 1));
}

GaitParams load_gait(const std::string& path, int joint_count) {
  std::ifstream in(path);
  if (!in) throw ConfigError("gait file not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("gait file " + path + " failed to parse: " + e.what());
  }
  GaitParams g;
  if (!j.contains("amplitudes_deg") || !j.contains("frequency_hz") || !j.contains("phases_rad"))
    throw ConfigError("gait file requires amplitudes_deg, frequency_hz, phases_rad");
  const auto& amps = j.at("amplitudes_deg");
  const auto& phases = j.at("phases_rad");
  if (static_cast<int>(amps.size()) != joint_count ||
      static_cast<int>(phases.size()) != joint_count)
    throw ConfigError("gait file vectors must have " + std::to_string(joint_count) + " entries");
  g.amplitudes_rad.resize(joint_count);
  g.phases_rad.resize(joint_count);
  for (int i = 0; i < joint_count; ++i) {
    g.amplitudes_rad[i] = amps[i].get<double>() * kPi / 180.0;
    g.phases_rad[i] = phases[i].get<double>();
  }
  g.frequency_hz = j.at("frequency_hz").get<double>();
  g.validate(joint_count);
  return g;
}

void save_gait(const std::string& path, const GaitParams& g) {
  json j;
  std::vector<double> amps, phases;
  for (int i = 0; i < g.amplitudes_rad.size(); ++i) {
    amps.push_back(g.amplitudes_rad[i] * 180.0 / kPi);
    phases.push_back(g.phases_rad[i]);
  }
  j["amplitudes_deg"] = amps;
  j["frequency_hz"] = g.frequency_hz;
  j["phases_rad"] = phases;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

GaitParams sidewinding_gait(const RobotModel& model, double frequency_hz) {
  GaitParams g;
  const int n = model.joint_count;
  g.amplitudes_rad.resize(n);
  g.phases_rad.resize(n);
  static const int phase_steps[11] = {0, 0, 1, 1, 2, 2, 3, 3, 0, 0, 1};
  for (int i = 0; i < n; ++i) {
    const bool pitch = model.joint_axis_pattern[i] == JointAxis::kPitch;
    g.amplitudes_rad[i] = (pitch ? 14.0 : 60.0) * kPi / 180.0;
    g.phases_rad[i] = (kPi / 2.0) * phase_steps[i % 11];
  }
  g.frequency_hz = frequency_hz;
  return g;
}

VecX cpg_reference(double t, const GaitParams& gait) {
  const double w = gait.omega();
  VecX y(gait.amplitudes_rad.size());
  for (int i = 0; i < y.size(); ++i)
    y[i] = gait.amplitudes_rad[i] * std::sin(w * t + gait.phases_rad[i]);
  return y;
}

VecX cpg_reference_rate(double t, const GaitParams& gait) {
  const double w = gait.omega();
  VecX y(gait.amplitudes_rad.size());
  for (int i = 0; i < y.size(); ++i)
    y[i] = gait.amplitudes_rad[i] * w * std::cos(w * t + gait.phases_rad[i]);
  return y;
}

ActuatorState ActuatorState::zero(int joint_count) {
  ActuatorState s;
  s.rotor_rates = VecX::Zero(joint_count);
  s.commanded_voltage = VecX::Zero(joint_count);
  return s;
}

double servo_voltage(double reference, double angle, double rate, const RobotModel& model) {
  return model.servo_kp * (reference - angle) - model.servo_kd * rate;
}

double motor_torque(double voltage, const ActuatorParams& params, double torque_limit) {
  return std::clamp(params.motor_constant * voltage, -torque_limit, torque_limit);
}

double delivered_torque(double voltage, double rotor_rate, double rotor_accel,
                        const ActuatorParams& params, double torque_limit) {
  return motor_torque(voltage, params, torque_limit) -
         params.transmission_inertia * rotor_accel - params.internal_damping * rotor_rate;
}

ActuatorOutput actuator_torque(double reference, double angle, double rate,
                               double prev_rotor_rate, double dt,
                               const ActuatorParams& params, const RobotModel& model) {
  ActuatorOutput out;
  out.voltage = servo_voltage(reference, angle, rate, model);
  out.rotor_rate = rate;  // unit gear ratio
  const double rotor_accel = (rate - prev_rotor_rate) / dt;
  out.torque = delivered_torque(out.voltage, out.rotor_rate, rotor_accel, params,
                                model.torque_limit);
  return out;
}

}  // namespace snakesim
