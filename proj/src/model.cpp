#include "snakesim/model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace snakesim {

using nlohmann::json;

namespace {

json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string(what) + " file not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + " file " + path + " failed to parse: " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

// Accepts either a scalar (applied to every entry) or an array of length n.
std::vector<double> number_or_array(const json& j, const std::string& key, int n) {
  if (!j.contains(key)) throw ConfigError("missing field: " + key);
  const json& v = j.at(key);
  std::vector<double> out;
  if (v.is_number()) {
    out.assign(n, v.get<double>());
  } else if (v.is_array()) {
    if (static_cast<int>(v.size()) != n)
      throw ConfigError(key + " has " + std::to_string(v.size()) + " entries, expected " +
                        std::to_string(n));
    for (const auto& e : v) out.push_back(e.get<double>());
  } else {
    throw ConfigError(key + " must be a number or an array");
  }
  return out;
}

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing field: " + key);
  return j.at(key).get<double>();
}

}  // namespace

double RobotModel::total_mass() const {
  return std::accumulate(link_mass_kg.begin(), link_mass_kg.end(), 0.0);
}

void RobotModel::validate() const {
  if (module_count < 1) throw ConfigError("module_count must be >= 1");
  if (module_count != joint_count + 1)
    throw ConfigError("module_count (" + std::to_string(module_count) +
                      ") must equal joint_count + 1 (" + std::to_string(joint_count + 1) + ")");
  auto check_len = [&](size_t got, const char* field, int want) {
    if (static_cast<int>(got) != want)
      throw ConfigError(std::string(field) + " has " + std::to_string(got) +
                        " entries, expected " + std::to_string(want));
  };
  check_len(link_mass_kg.size(), "link_mass_kg", module_count);
  check_len(link_inertia_kgm2.size(), "link_inertia_kgm2", module_count);
  check_len(link_length_m.size(), "link_length_m", module_count);
  check_len(joint_axis_pattern.size(), "joint_axis_pattern", joint_count);
  for (int i = 0; i < module_count; ++i) {
    if (!(link_mass_kg[i] > 0.0))
      throw ConfigError("link_mass_kg must be positive, got " + std::to_string(link_mass_kg[i]) +
                        " at link " + std::to_string(i));
    if (!(link_length_m[i] > 0.0))
      throw ConfigError("link_length_m must be positive at link " + std::to_string(i));
    for (int k = 0; k < 3; ++k)
      if (!(link_inertia_kgm2[i][k] > 0.0))
        throw ConfigError("link_inertia_kgm2 must be positive at link " + std::to_string(i));
  }
  for (int j = 0; j < joint_count; ++j) {
    const JointAxis expect = (j % 2 == 0) ? JointAxis::kPitch : JointAxis::kYaw;
    if (joint_axis_pattern[j] != expect)
      throw ConfigError("joint_axis_pattern must alternate starting with pitch; joint " +
                        std::to_string(j + 1) + " is wrong");
  }
  if (!(contact_point_offset_m >= 0.0)) throw ConfigError("contact_point_offset_m must be >= 0");
  if (!(ground_spring_k1 > 0.0)) throw ConfigError("ground_spring_k1_N_per_m must be > 0");
  if (!(ground_damper_k2 >= 0.0)) throw ConfigError("ground_damper_k2_Ns_per_m must be >= 0");
  if (!(gravity >= 0.0)) throw ConfigError("gravity_m_per_s2 must be >= 0");
  if (!(servo_kp >= 0.0) || !(servo_kd >= 0.0))
    throw ConfigError("servo gains must be >= 0");
  if (!(torque_limit > 0.0)) throw ConfigError("torque_limit_Nm must be > 0");
}

RobotModel load_model(const std::string& path) {
  const json j = read_json_file(path, "model");
  RobotModel m;
  m.module_count = static_cast<int>(require_number(j, "module_count"));
  m.joint_count = static_cast<int>(require_number(j, "joint_count"));
  if (m.module_count < 1 || m.joint_count < 0)
    throw ConfigError("module_count/joint_count out of range");
  m.link_mass_kg = number_or_array(j, "link_mass_kg", m.module_count);
  m.link_length_m = number_or_array(j, "link_length_m", m.module_count);

  if (!j.contains("link_inertia_kgm2")) throw ConfigError("missing field: link_inertia_kgm2");
  const json& inert = j.at("link_inertia_kgm2");
  if (!inert.is_array() || inert.empty())
    throw ConfigError("link_inertia_kgm2 must be [ixx,iyy,izz] or one triple per link");
  if (inert[0].is_number()) {
    if (inert.size() != 3) throw ConfigError("link_inertia_kgm2 triple must have 3 entries");
    Vec3 v(inert[0].get<double>(), inert[1].get<double>(), inert[2].get<double>());
    m.link_inertia_kgm2.assign(m.module_count, v);
  } else {
    if (static_cast<int>(inert.size()) != m.module_count)
      throw ConfigError("link_inertia_kgm2 has " + std::to_string(inert.size()) +
                        " entries, expected " + std::to_string(m.module_count));
    for (const auto& e : inert) {
      if (!e.is_array() || e.size() != 3)
        throw ConfigError("link_inertia_kgm2 entries must be triples");
      m.link_inertia_kgm2.emplace_back(e[0].get<double>(), e[1].get<double>(), e[2].get<double>());
    }
  }

  if (!j.contains("joint_axis_pattern")) throw ConfigError("missing field: joint_axis_pattern");
  for (const auto& e : j.at("joint_axis_pattern")) {
    const std::string s = e.get<std::string>();
    if (s == "pitch")
      m.joint_axis_pattern.push_back(JointAxis::kPitch);
    else if (s == "yaw")
      m.joint_axis_pattern.push_back(JointAxis::kYaw);
    else
      throw ConfigError("joint_axis_pattern entries must be \"pitch\" or \"yaw\", got " + s);
  }

  m.contact_point_offset_m = require_number(j, "contact_point_offset_m");
  m.ground_spring_k1 = require_number(j, "ground_spring_k1_N_per_m");
  m.ground_damper_k2 = require_number(j, "ground_damper_k2_Ns_per_m");
  m.gravity = require_number(j, "gravity_m_per_s2");
  m.servo_kp = require_number(j, "servo_kp_V_per_rad");
  m.servo_kd = require_number(j, "servo_kd_Vs_per_rad");
  m.torque_limit = require_number(j, "torque_limit_Nm");
  m.validate();
  return m;
}

void save_model(const std::string& path, const RobotModel& m) {
  json j;
  j["module_count"] = m.module_count;
  j["joint_count"] = m.joint_count;
  j["link_mass_kg"] = m.link_mass_kg;
  json inert = json::array();
  for (const auto& v : m.link_inertia_kgm2) inert.push_back({v.x(), v.y(), v.z()});
  j["link_inertia_kgm2"] = inert;
  j["link_length_m"] = m.link_length_m;
  json axes = json::array();
  for (JointAxis a : m.joint_axis_pattern) axes.push_back(a == JointAxis::kPitch ? "pitch" : "yaw");
  j["joint_axis_pattern"] = axes;
  j["contact_point_offset_m"] = m.contact_point_offset_m;
  j["ground_spring_k1_N_per_m"] = m.ground_spring_k1;
  j["ground_damper_k2_Ns_per_m"] = m.ground_damper_k2;
  j["gravity_m_per_s2"] = m.gravity;
  j["servo_kp_V_per_rad"] = m.servo_kp;
  j["servo_kd_Vs_per_rad"] = m.servo_kd;
  j["torque_limit_Nm"] = m.torque_limit;
  write_json_file(path, j);
}

bool TunableParams::uniform_actuators() const {
  for (size_t i = 1; i < actuators.size(); ++i) {
    if (actuators[i].transmission_inertia != actuators[0].transmission_inertia ||
        actuators[i].internal_damping != actuators[0].internal_damping ||
        actuators[i].motor_constant != actuators[0].motor_constant)
      return false;
  }
  return true;
}

void TunableParams::validate() const {
  if (actuators.empty()) throw ConfigError("actuator parameter list is empty");
  for (size_t i = 0; i < actuators.size(); ++i) {
    const auto& a = actuators[i];
    if (!(a.transmission_inertia > 0.0))
      throw ConfigError("transmission_inertia_kgm2 must be > 0 at joint " + std::to_string(i + 1));
    if (!(a.internal_damping > 0.0))
      throw ConfigError("internal_damping_Nms_per_rad must be > 0 at joint " + std::to_string(i + 1));
    if (!(a.motor_constant > 0.0))
      throw ConfigError("motor_constant_Nm_per_V must be > 0 at joint " + std::to_string(i + 1));
  }
  if (!(stribeck.mu_c > 0.0)) throw ConfigError("mu_c must be > 0");
  if (!(stribeck.mu_s > 0.0)) throw ConfigError("mu_s must be > 0");
  if (stribeck.mu_s < stribeck.mu_c)
    throw ConfigError("mu_s (" + std::to_string(stribeck.mu_s) + ") must be >= mu_c (" +
                      std::to_string(stribeck.mu_c) + ")");
  if (!(stribeck.mu_v > 0.0)) throw ConfigError("mu_v_Ns_per_m must be > 0");
  if (!(stribeck.v_s > 0.0)) throw ConfigError("v_s_m_per_s must be > 0");
}

TunableParams load_params(const std::string& path, int joint_count) {
  const json j = read_json_file(path, "params");
  TunableParams p;
  const auto ti = number_or_array(j, "transmission_inertia_kgm2", joint_count);
  const auto di = number_or_array(j, "internal_damping_Nms_per_rad", joint_count);
  const auto km = number_or_array(j, "motor_constant_Nm_per_V", joint_count);
  p.actuators.resize(joint_count);
  for (int i = 0; i < joint_count; ++i)
    p.actuators[i] = {ti[i], di[i], km[i]};
  p.stribeck.mu_c = require_number(j, "mu_c");
  p.stribeck.mu_s = require_number(j, "mu_s");
  p.stribeck.mu_v = require_number(j, "mu_v_Ns_per_m");
  p.stribeck.v_s = require_number(j, "v_s_m_per_s");
  p.validate();
  return p;
}

void save_params(const std::string& path, const TunableParams& p) {
  json j;
  if (p.uniform_actuators()) {
    j["transmission_inertia_kgm2"] = p.actuators[0].transmission_inertia;
    j["internal_damping_Nms_per_rad"] = p.actuators[0].internal_damping;
    j["motor_constant_Nm_per_V"] = p.actuators[0].motor_constant;
  } else {
    std::vector<double> ti, di, km;
    for (const auto& a : p.actuators) {
      ti.push_back(a.transmission_inertia);
      di.push_back(a.internal_damping);
      km.push_back(a.motor_constant);
    }
    j["transmission_inertia_kgm2"] = ti;
    j["internal_damping_Nms_per_rad"] = di;
    j["motor_constant_Nm_per_V"] = km;
  }
  j["mu_c"] = p.stribeck.mu_c;
  j["mu_s"] = p.stribeck.mu_s;
  j["mu_v_Ns_per_m"] = p.stribeck.mu_v;
  j["v_s_m_per_s"] = p.stribeck.v_s;
  write_json_file(path, j);
}

SimState SimState::zero(int joint_count) {
  SimState s;
  s.joint_angles = VecX::Zero(joint_count);
  s.joint_rates = VecX::Zero(joint_count);
  s.actuator_rotor_rates = VecX::Zero(joint_count);
  return s;
}

void SimState::validate(int joint_count) const {
  if (std::abs(head_orientation.norm() - 1.0) > 1e-9)
    throw ConfigError("head_orientation quaternion is not unit norm");
  if (joint_angles.size() != joint_count || joint_rates.size() != joint_count ||
      actuator_rotor_rates.size() != joint_count)
    throw ConfigError("joint vector length does not match joint_count");
}

namespace {

ScalarRange make_range(const std::string& name, double nominal, double lo_mult, double hi_mult) {
  if (!(nominal > 0.0)) throw ConfigError("nominal for " + name + " must be > 0");
  return {name, lo_mult * nominal, hi_mult * nominal, nominal};
}

}  // namespace

ParamSpace ParamSpace::make(const TunableParams& nominal, int joint_count, ParamSubset subset,
                            bool per_joint_actuators, double lower_mult, double upper_mult) {
  nominal.validate();
  if (static_cast<int>(nominal.actuators.size()) != joint_count)
    throw ConfigError("nominal actuator list does not match joint_count");
  if (!(lower_mult > 0.0) || !(upper_mult > lower_mult))
    throw ConfigError("parameter bound multipliers must satisfy 0 < lower < upper");

  ParamSpace space;
  space.subset_ = subset;
  space.per_joint_ = per_joint_actuators;
  space.joint_count_ = joint_count;

  const bool want_internal = subset == ParamSubset::kInternal || subset == ParamSubset::kFull;
  const bool want_external = subset == ParamSubset::kExternal || subset == ParamSubset::kFull;

  if (want_internal) {
    if (per_joint_actuators) {
      for (int i = 0; i < joint_count; ++i) {
        const std::string suffix = "[" + std::to_string(i + 1) + "]";
        space.dims_.push_back(make_range("transmission_inertia" + suffix,
                                         nominal.actuators[i].transmission_inertia, lower_mult,
                                         upper_mult));
        space.dims_.push_back(make_range("internal_damping" + suffix,
                                         nominal.actuators[i].internal_damping, lower_mult,
                                         upper_mult));
        space.dims_.push_back(make_range("motor_constant" + suffix,
                                         nominal.actuators[i].motor_constant, lower_mult,
                                         upper_mult));
      }
    } else {
      if (!nominal.uniform_actuators())
        throw ConfigError("shared actuator space requires identical per-joint nominals");
      space.dims_.push_back(make_range("transmission_inertia",
                                       nominal.actuators[0].transmission_inertia, lower_mult,
                                       upper_mult));
      space.dims_.push_back(make_range("internal_damping", nominal.actuators[0].internal_damping,
                                       lower_mult, upper_mult));
      space.dims_.push_back(make_range("motor_constant", nominal.actuators[0].motor_constant,
                                       lower_mult, upper_mult));
    }
  }
  if (want_external) {
    const double delta = nominal.stribeck.mu_s - nominal.stribeck.mu_c;
    if (!(delta > 0.0))
      throw ConfigError("nominal mu_s must exceed mu_c to span the friction space");
    space.dims_.push_back(make_range("mu_c", nominal.stribeck.mu_c, lower_mult, upper_mult));
    space.dims_.push_back(make_range("mu_s_minus_mu_c", delta, lower_mult, upper_mult));
    space.dims_.push_back(make_range("mu_v", nominal.stribeck.mu_v, lower_mult, upper_mult));
    space.dims_.push_back(make_range("v_s", nominal.stribeck.v_s, lower_mult, upper_mult));
  }
  return space;
}

std::vector<double> ParamSpace::extract(const TunableParams& params) const {
  std::vector<double> out;
  const bool want_internal = subset_ == ParamSubset::kInternal || subset_ == ParamSubset::kFull;
  const bool want_external = subset_ == ParamSubset::kExternal || subset_ == ParamSubset::kFull;
  if (want_internal) {
    if (per_joint_) {
      for (int i = 0; i < joint_count_; ++i) {
        out.push_back(params.actuators[i].transmission_inertia);
        out.push_back(params.actuators[i].internal_damping);
        out.push_back(params.actuators[i].motor_constant);
      }
    } else {
      out.push_back(params.actuators[0].transmission_inertia);
      out.push_back(params.actuators[0].internal_damping);
      out.push_back(params.actuators[0].motor_constant);
    }
  }
  if (want_external) {
    out.push_back(params.stribeck.mu_c);
    out.push_back(params.stribeck.mu_s - params.stribeck.mu_c);
    out.push_back(params.stribeck.mu_v);
    out.push_back(params.stribeck.v_s);
  }
  return out;
}

void ParamSpace::inject(const std::vector<double>& values, TunableParams* out) const {
  const bool want_internal = subset_ == ParamSubset::kInternal || subset_ == ParamSubset::kFull;
  const bool want_external = subset_ == ParamSubset::kExternal || subset_ == ParamSubset::kFull;
  size_t k = 0;
  if (want_internal) {
    if (per_joint_) {
      for (int i = 0; i < joint_count_; ++i) {
        out->actuators[i].transmission_inertia = values[k++];
        out->actuators[i].internal_damping = values[k++];
        out->actuators[i].motor_constant = values[k++];
      }
    } else {
      const double ti = values[k++], di = values[k++], km = values[k++];
      for (auto& a : out->actuators) a = {ti, di, km};
    }
  }
  if (want_external) {
    out->stribeck.mu_c = values[k++];
    out->stribeck.mu_s = out->stribeck.mu_c + values[k++];
    out->stribeck.mu_v = values[k++];
    out->stribeck.v_s = values[k++];
  }
}

VecX ParamSpace::normalize(const TunableParams& params) const {
  const auto values = extract(params);
  VecX out(dim());
  for (int i = 0; i < dim(); ++i) {
    const auto& d = dims_[i];
    if (values[i] < d.lower || values[i] > d.upper)
      throw ConfigError(d.name + " = " + std::to_string(values[i]) + " outside [" +
                        std::to_string(d.lower) + ", " + std::to_string(d.upper) + "]");
    out[i] = 2.0 * (values[i] - d.lower) / (d.upper - d.lower) - 1.0;
  }
  return out;
}

TunableParams ParamSpace::denormalize(const VecX& normalized, const TunableParams& base) const {
  if (normalized.size() != dim()) throw ConfigError("normalized vector has wrong dimension");
  std::vector<double> values(dim());
  for (int i = 0; i < dim(); ++i) {
    const double x = normalized[i];
    if (x < -1.0 - 1e-9 || x > 1.0 + 1e-9)
      throw ConfigError(dims_[i].name + " normalized coordinate " + std::to_string(x) +
                        " outside [-1, 1]");
    const auto& d = dims_[i];
    values[i] = d.lower + 0.5 * (std::clamp(x, -1.0, 1.0) + 1.0) * (d.upper - d.lower);
  }
  TunableParams out = base;
  inject(values, &out);
  out.validate();
  return out;
}

TunableParams ParamSpace::denormalize_anchored(const VecX& normalized, const VecX& anchor_x,
                                               const TunableParams& anchor) const {
  if (normalized.size() != dim() || anchor_x.size() != dim())
    throw ConfigError("normalized vector has wrong dimension");
  const auto anchor_values = extract(anchor);
  std::vector<double> values(dim());
  for (int i = 0; i < dim(); ++i) {
    const double x = normalized[i];
    if (x < -1.0 - 1e-9 || x > 1.0 + 1e-9)
      throw ConfigError(dims_[i].name + " normalized coordinate " + std::to_string(x) +
                        " outside [-1, 1]");
    const auto& d = dims_[i];
    values[i] = std::clamp(anchor_values[i] + (x - anchor_x[i]) * 0.5 * (d.upper - d.lower),
                           d.lower, d.upper);
  }
  TunableParams out = anchor;
  inject(values, &out);
  out.validate();
  return out;
}

VecX ParamSpace::nominal_normalized() const {
  VecX out(dim());
  for (int i = 0; i < dim(); ++i) {
    const auto& d = dims_[i];
    out[i] = 2.0 * (d.nominal - d.lower) / (d.upper - d.lower) - 1.0;
  }
  return out;
}

}  // namespace snakesim
