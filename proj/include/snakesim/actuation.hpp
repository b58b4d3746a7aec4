#pragma once

#include <string>

#include "snakesim/math.hpp"
#include "snakesim/model.hpp"

namespace snakesim {

// Oscillator gait: joint j tracks A_j * sin(2*pi*f*t + phi_j).
struct GaitParams {
  VecX amplitudes_rad;
  double frequency_hz = 0.0;
  VecX phases_rad;

  double omega() const { return 2.0 * kPi * frequency_hz; }
  void validate(int joint_count) const;
};

GaitParams load_gait(const std::string& path, int joint_count);
void save_gait(const std::string& path, const GaitParams& gait);

// Default sidewinding gait: 14 deg on pitch joints, 60 deg on yaw joints,
// phases (pi/2) * [0,0,1,1,2,2,3,3,0,0,1].
GaitParams sidewinding_gait(const RobotModel& model, double frequency_hz);

VecX cpg_reference(double t, const GaitParams& gait);
VecX cpg_reference_rate(double t, const GaitParams& gait);

struct ActuatorState {
  VecX rotor_rates;       // rad/s, kinematically tied to the joints
  VecX commanded_voltage; // V

  static ActuatorState zero(int joint_count);
};

// Servo position loop with fixed gains: V = Kp*(ref - angle) - Kd*rate.
double servo_voltage(double reference, double angle, double rate, const RobotModel& model);

// Motor torque with saturation. The motor cannot exceed the torque limit;
// the passive reaction terms of delivered_torque are unbounded.
double motor_torque(double voltage, const ActuatorParams& params, double torque_limit);

// Torque handed to the joint: motor torque minus the transmission-inertia and
// internal-damping reactions of the rotor (unit gear ratio).
double delivered_torque(double voltage, double rotor_rate, double rotor_accel,
                        const ActuatorParams& params, double torque_limit);

struct ActuatorOutput {
  double torque = 0.0;
  double rotor_rate = 0.0;
  double voltage = 0.0;
};

// One-joint convenience wrapper: rotor acceleration is estimated from the
// previous rotor rate over dt. The simulator instead couples the rotor
// implicitly by reflecting its inertia into the joint-space mass matrix;
// both routes evaluate the same model.
ActuatorOutput actuator_torque(double reference, double angle, double rate,
                               double prev_rotor_rate, double dt,
                               const ActuatorParams& params, const RobotModel& model);

}  // namespace snakesim
