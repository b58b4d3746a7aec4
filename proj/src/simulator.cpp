#include "snakesim/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "snakesim/errors.hpp"

namespace snakesim {

void RolloutConfig::validate() const {
  if (!(duration > 0.0)) throw ConfigError("rollout duration must be > 0");
  if (!(dt > 0.0)) throw ConfigError("rollout dt must be > 0");
  if (!(record_hz > 0.0)) throw ConfigError("record_hz must be > 0");
  if (record_hz > 1.0 / dt + 1e-9) throw ConfigError("record_hz must be <= 1/dt");
  if (settle_time < 0.0) throw ConfigError("settle_time must be >= 0");
  const double spr = 1.0 / (record_hz * dt);
  if (std::abs(spr - std::lround(spr)) > 1e-6)
    throw ConfigError("1/(record_hz*dt) must be an integer number of steps");
}

int RolloutConfig::steps_per_record() const {
  return static_cast<int>(std::lround(1.0 / (record_hz * dt)));
}

SimState initial_state(const RobotModel& model, const RolloutConfig& config) {
  SimState s = SimState::zero(model.joint_count);
  s.head_position = Vec3(config.initial_x, config.initial_y, model.contact_point_offset_m);
  s.head_orientation = Quat(Eigen::AngleAxisd(config.initial_heading, Vec3::UnitZ()));
  return s;
}

namespace {

void check_state(const SimState& state, double limit) {
  const bool finite = state.head_position.allFinite() && state.head_linear_velocity.allFinite() &&
                      state.head_angular_velocity.allFinite() && state.joint_angles.allFinite() &&
                      state.joint_rates.allFinite();
  const double mag =
      std::max({state.head_position.cwiseAbs().maxCoeff(),
                state.head_linear_velocity.cwiseAbs().maxCoeff(),
                state.head_angular_velocity.cwiseAbs().maxCoeff(),
                state.joint_angles.size() ? state.joint_angles.cwiseAbs().maxCoeff() : 0.0,
                state.joint_rates.size() ? state.joint_rates.cwiseAbs().maxCoeff() : 0.0});
  if (!finite || mag > limit)
    throw SimulationError("simulation blew up at t = " + std::to_string(state.time) +
                          " (max state magnitude " + std::to_string(mag) + ")");
}

// One physics step: servo voltages from the references, ground forces from
// the current contact kinematics, then the integrator.
void substep(const RobotModel& model, const TunableParams& tunables, const GroundParams& ground,
             const VecX& refs, SimState* state, VecX* torques, std::vector<Vec3>* forces,
             double dt, StepWorkspace* ws) {
  prepare_step(model, *state, ws);
  for (int j = 0; j < model.joint_count; ++j) {
    const double v = servo_voltage(refs[j], state->joint_angles[j], state->joint_rates[j], model);
    (*torques)[j] = motor_torque(v, tunables.actuators[j], model.torque_limit) -
                    tunables.actuators[j].internal_damping * state->joint_rates[j];
  }
  for (int i = 0; i < model.module_count; ++i)
    (*forces)[i] = ground_reaction(ws->kin.contact_pos[i], ws->kin.contact_vel[i], ground);
  *state = finish_step(model, tunables, *state, *torques, *forces, dt, ws);
}

}  // namespace

Trajectory rollout(const RobotModel& model, const TunableParams& tunables,
                   const GaitParams& gait, const RolloutConfig& config) {
  config.validate();
  gait.validate(model.joint_count);
  if (static_cast<int>(tunables.actuators.size()) != model.joint_count)
    throw ConfigError("tunable actuator list does not match joint_count");

  const GroundParams ground =
      GroundParams::from(model, tunables.stribeck, config.clamp_normal_force);
  SimState state = initial_state(model, config);
  StepWorkspace ws;
  ws.resize(model);
  VecX torques(model.joint_count);
  std::vector<Vec3> forces(model.module_count);

  // Settle onto the plane with the gait's t=0 posture held as reference.
  const VecX settle_refs = cpg_reference(0.0, gait);
  const int settle_steps = static_cast<int>(std::lround(config.settle_time / config.dt));
  for (int i = 0; i < settle_steps; ++i) {
    substep(model, tunables, ground, settle_refs, &state, &torques, &forces, config.dt, &ws);
    check_state(state, config.blowup_limit);
  }
  state.time = 0.0;  // gait clock starts after settling

  const int n_steps = static_cast<int>(std::lround(config.duration / config.dt));
  const int spr = config.steps_per_record();
  const int n_records = n_steps / spr + 1;

  Trajectory traj;
  traj.sample_dt = spr * config.dt;
  traj.time.reserve(n_records);
  traj.head_pos.reserve(n_records);
  traj.head_quat.reserve(n_records);
  traj.joint_angles.resize(n_records, model.joint_count);
  traj.joint_refs.resize(n_records, model.joint_count);

  int rec = 0;
  for (int i = 0; i <= n_steps; ++i) {
    const double t = i * config.dt;
    if (i % spr == 0 && rec < n_records) {
      traj.time.push_back(t);
      traj.head_pos.push_back(state.head_position);
      traj.head_quat.push_back(state.head_orientation);
      traj.joint_angles.row(rec) = state.joint_angles.transpose();
      traj.joint_refs.row(rec) = cpg_reference(t, gait).transpose();
      ++rec;
    }
    if (i == n_steps) break;
    const VecX refs = cpg_reference(t, gait);
    substep(model, tunables, ground, refs, &state, &torques, &forces, config.dt, &ws);
    check_state(state, config.blowup_limit);
  }
  return traj;
}

Trajectory make_reference(const RobotModel& model, const TunableParams& truth,
                          const GaitParams& gait, const RolloutConfig& config,
                          const NoiseSpec& noise) {
  Trajectory traj = rollout(model, truth, gait, config);
  if (!noise.enabled()) return traj;

  Rng rng(split_seed(config.seed, 0x6e6f697365ull));  // measurement-noise stream
  for (int k = 0; k < traj.samples(); ++k) {
    if (noise.head_pos_std > 0.0)
      for (int c = 0; c < 3; ++c) traj.head_pos[k][c] += noise.head_pos_std * rng.normal();
    if (noise.joint_std > 0.0)
      for (int j = 0; j < traj.joints(); ++j)
        traj.joint_angles(k, j) += noise.joint_std * rng.normal();
  }
  return traj;
}

void save_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "t,x,y,z,qw,qx,qy,qz";
  for (int j = 1; j <= traj.joints(); ++j) out << ",q" << j;
  for (int j = 1; j <= traj.joints(); ++j) out << ",r" << j;
  out << "\n";
  char buf[32];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << sep;
  };
  for (int k = 0; k < traj.samples(); ++k) {
    put(traj.time[k], ',');
    put(traj.head_pos[k].x(), ',');
    put(traj.head_pos[k].y(), ',');
    put(traj.head_pos[k].z(), ',');
    put(traj.head_quat[k].w(), ',');
    put(traj.head_quat[k].x(), ',');
    put(traj.head_quat[k].y(), ',');
    put(traj.head_quat[k].z(), traj.joints() ? ',' : '\n');
    for (int j = 0; j < traj.joints(); ++j) put(traj.joint_angles(k, j), ',');
    for (int j = 0; j < traj.joints(); ++j)
      put(traj.joint_refs(k, j), j + 1 == traj.joints() ? '\n' : ',');
  }
}

Trajectory load_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("trajectory file not found: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty trajectory file: " + path);

  int n_cols = 1;
  for (char c : line) n_cols += (c == ',');
  const int n_joints = (n_cols - 8) / 2;
  if (n_cols != 8 + 2 * n_joints || n_joints < 0)
    throw ConfigError("unexpected trajectory header in " + path);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(n_cols);
    const char* p = line.c_str();
    char* end = nullptr;
    for (int c = 0; c < n_cols; ++c) {
      row.push_back(std::strtod(p, &end));
      if (end == p) throw ConfigError("bad number in " + path + " row " +
                                      std::to_string(rows.size() + 2));
      p = (*end == ',') ? end + 1 : end;
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw ConfigError("trajectory needs at least 2 samples: " + path);

  Trajectory traj;
  const int n = static_cast<int>(rows.size());
  traj.joint_angles.resize(n, n_joints);
  traj.joint_refs.resize(n, n_joints);
  for (int k = 0; k < n; ++k) {
    const auto& r = rows[k];
    traj.time.push_back(r[0]);
    traj.head_pos.emplace_back(r[1], r[2], r[3]);
    traj.head_quat.emplace_back(r[4], r[5], r[6], r[7]);
    for (int j = 0; j < n_joints; ++j) {
      traj.joint_angles(k, j) = r[8 + j];
      traj.joint_refs(k, j) = r[8 + n_joints + j];
    }
  }
  traj.sample_dt = traj.time[1] - traj.time[0];
  if (!(traj.sample_dt > 0.0)) throw ConfigError("timestamps must increase in " + path);
  for (int k = 1; k < n; ++k)
    if (std::abs(traj.time[k] - traj.time[k - 1] - traj.sample_dt) > 1e-9)
      throw ConfigError("non-uniform sampling in " + path);
  return traj;
}

}  // namespace snakesim
