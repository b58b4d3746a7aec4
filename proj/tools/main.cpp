// Command-line front end: reference generation, rollouts, identification,
// evaluation, and friction-curve export. Every command echoes its inputs into
// a manifest so a run can be reproduced from the manifest alone.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "snakesim/contact.hpp"
#include "snakesim/errors.hpp"
#include "snakesim/metrics.hpp"
#include "snakesim/simulator.hpp"
#include "snakesim/sysid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace snakesim;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

class Manifest {
 public:
  Manifest(std::string command, int argc, char** argv) {
    body_["command"] = std::move(command);
    body_["version"] = kVersion;
    std::vector<std::string> args(argv, argv + argc);
    body_["argv"] = args;
    body_["started_utc"] = utc_now();
  }

  void set(const std::string& key, const json& value) { body_[key] = value; }
  void add_output(const std::string& path) { outputs_.push_back(path); }

  // Atomic write: the manifest lists only outputs that exist by now.
  void write(const std::string& path) {
    for (const auto& out : outputs_)
      if (!fs::exists(out)) throw ConfigError("manifest lists missing output: " + out);
    body_["outputs"] = outputs_;
    body_["finished_utc"] = utc_now();
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp);
      if (!out) throw ConfigError("cannot write manifest: " + path);
      out << body_.dump(2) << "\n";
    }
    fs::rename(tmp, path);
  }

 private:
  json body_;
  std::vector<std::string> outputs_;
};

json params_to_json(const TunableParams& p) {
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
  return j;
}

struct SimFlags {
  double duration = 10.0;
  double dt = 1e-4;
  double record_hz = 100.0;
  double settle = 0.5;
  double initial_x = 0.0;
  double initial_y = 0.0;
  double initial_heading = 0.0;
  bool no_normal_clamp = false;

  void attach(CLI::App* cmd, bool with_duration = true) {
    if (with_duration) cmd->add_option("--duration", duration, "recorded span, s");
    cmd->add_option("--dt", dt, "physics step, s");
    cmd->add_option("--record-hz", record_hz, "trajectory sample rate");
    cmd->add_option("--settle", settle, "settling span excluded from the record, s");
    cmd->add_option("--initial-x", initial_x, "head start x offset, m");
    cmd->add_option("--initial-y", initial_y, "head start y offset, m");
    cmd->add_option("--initial-heading", initial_heading, "head start heading, rad");
    cmd->add_flag("--no-normal-clamp", no_normal_clamp,
                  "allow the compliant ground to pull during separation");
  }

  RolloutConfig config(uint64_t seed) const {
    RolloutConfig cfg;
    cfg.duration = duration;
    cfg.dt = dt;
    cfg.record_hz = record_hz;
    cfg.settle_time = settle;
    cfg.initial_x = initial_x;
    cfg.initial_y = initial_y;
    cfg.initial_heading = initial_heading;
    cfg.seed = seed;
    cfg.clamp_normal_force = !no_normal_clamp;
    return cfg;
  }

  json to_json() const {
    return {{"duration_s", duration},  {"dt_s", dt},
            {"record_hz", record_hz},  {"settle_s", settle},
            {"initial_x_m", initial_x}, {"initial_y_m", initial_y},
            {"initial_heading_rad", initial_heading},
            {"clamp_normal_force", !no_normal_clamp}};
  }
};

void write_gait_sidecar(const std::string& path, const GaitParams& gait, const SimFlags& sim) {
  json j;
  std::vector<double> amps, phases;
  for (int i = 0; i < gait.amplitudes_rad.size(); ++i) {
    amps.push_back(gait.amplitudes_rad[i] * 180.0 / kPi);
    phases.push_back(gait.phases_rad[i]);
  }
  j["amplitudes_deg"] = amps;
  j["frequency_hz"] = gait.frequency_hz;
  j["phases_rad"] = phases;
  j["rollout"] = sim.to_json();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write gait sidecar: " + path);
  out << j.dump(2) << "\n";
}

std::string sidecar_for(const std::string& csv_path) {
  fs::path p(csv_path);
  p.replace_extension();  // drop .csv
  return p.string() + ".gait.json";
}

// --- make-reference ---------------------------------------------------------

struct MakeReferenceArgs {
  std::string model_path, truth_path, out_dir;
  std::vector<std::string> gait_paths;
  SimFlags sim;
  double noise_pos_mm = 0.0;
  double noise_joint_deg = 0.0;
  uint64_t seed = 0;
};

int cmd_make_reference(const MakeReferenceArgs& a, Manifest* manifest) {
  const RobotModel model = load_model(a.model_path);
  const TunableParams truth = load_params(a.truth_path, model.joint_count);
  fs::create_directories(a.out_dir);

  NoiseSpec noise;
  noise.head_pos_std = a.noise_pos_mm * 1e-3;
  noise.joint_std = a.noise_joint_deg * kPi / 180.0;

  int stream = 0;
  for (const std::string& gait_path : a.gait_paths) {
    const GaitParams gait = load_gait(gait_path, model.joint_count);
    RolloutConfig cfg = a.sim.config(split_seed(a.seed, 7000 + stream));
    const Trajectory traj = make_reference(model, truth, gait, cfg, noise);
    const std::string stem = fs::path(gait_path).stem().string();
    const std::string csv = (fs::path(a.out_dir) / (stem + ".csv")).string();
    save_trajectory_csv(csv, traj);
    write_gait_sidecar(sidecar_for(csv), gait, a.sim);
    manifest->add_output(csv);
    manifest->add_output(sidecar_for(csv));
    ++stream;
  }

  // Kept apart from everything identification reads.
  const std::string sealed = (fs::path(a.out_dir) / "hidden.truth.json").string();
  save_params(sealed, truth);
  manifest->add_output(sealed);

  manifest->set("model", a.model_path);
  manifest->set("gaits", a.gait_paths);
  manifest->set("seed", a.seed);
  manifest->set("noise", {{"head_pos_std_m", noise.head_pos_std},
                          {"joint_std_rad", noise.joint_std}});
  manifest->set("rollout", a.sim.to_json());
  const std::string mpath = (fs::path(a.out_dir) / "manifest.json").string();
  manifest->write(mpath);
  std::printf("wrote %zu reference(s) + sealed truth under %s\n", a.gait_paths.size(),
              a.out_dir.c_str());
  return 0;
}

// --- rollout ----------------------------------------------------------------

struct RolloutArgs {
  std::string model_path, params_path, gait_path, out_csv;
  SimFlags sim;
  uint64_t seed = 0;
};

int cmd_rollout(const RolloutArgs& a, Manifest* manifest) {
  const RobotModel model = load_model(a.model_path);
  const TunableParams params = load_params(a.params_path, model.joint_count);
  const GaitParams gait = load_gait(a.gait_path, model.joint_count);
  const Trajectory traj = rollout(model, params, gait, a.sim.config(a.seed));
  if (const auto dir = fs::path(a.out_csv).parent_path(); !dir.empty())
    fs::create_directories(dir);
  save_trajectory_csv(a.out_csv, traj);
  manifest->add_output(a.out_csv);
  manifest->set("model", a.model_path);
  manifest->set("params", a.params_path);
  manifest->set("gait", a.gait_path);
  manifest->set("seed", a.seed);
  manifest->set("rollout", a.sim.to_json());
  manifest->write(a.out_csv + ".manifest.json");
  std::printf("wrote %s (%d samples)\n", a.out_csv.c_str(), traj.samples());
  return 0;
}

// --- identify ----------------------------------------------------------------

struct IdentifyArgs {
  std::string model_path, refs_dir, start_path, out_path, log_path;
  std::string phase = "both";
  std::string internal_reward = "cpg";
  bool per_joint = false;
  SimFlags sim;
  PpoConfig ppo;
  uint64_t seed = 0;
  int jobs = 1;
};

ReferenceSet load_reference_dir(const std::string& dir, const RobotModel& model,
                                SimFlags* sim) {
  ReferenceSet refs;
  std::vector<std::string> csvs;
  if (!fs::is_directory(dir)) throw ConfigError("reference directory not found: " + dir);
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".csv") csvs.push_back(entry.path().string());
  std::sort(csvs.begin(), csvs.end());
  if (csvs.empty()) throw ConfigError("no reference .csv files in " + dir);

  for (const std::string& csv : csvs) {
    const std::string sidecar = sidecar_for(csv);
    if (!fs::exists(sidecar))
      throw ConfigError("missing gait sidecar for " + csv + " (expected " + sidecar + ")");
    refs.trajectories.push_back(load_trajectory_csv(csv));
    refs.gaits.push_back(load_gait(sidecar, model.joint_count));
    refs.names.push_back(fs::path(csv).stem().string());

    // Mirror the generation-time physics settings unless overridden.
    std::ifstream in(sidecar);
    json j;
    in >> j;
    if (j.contains("rollout") && sim) {
      const json& r = j.at("rollout");
      sim->dt = r.value("dt_s", sim->dt);
      sim->settle = r.value("settle_s", sim->settle);
      sim->initial_x = r.value("initial_x_m", sim->initial_x);
      sim->initial_y = r.value("initial_y_m", sim->initial_y);
      sim->initial_heading = r.value("initial_heading_rad", sim->initial_heading);
    }
  }
  return refs;
}

int cmd_identify(const IdentifyArgs& args_in, Manifest* manifest, bool dt_overridden) {
  IdentifyArgs a = args_in;
  const RobotModel model = load_model(a.model_path);
  const TunableParams start = load_params(a.start_path, model.joint_count);

  SimFlags sim = a.sim;
  SimFlags* sidecar_sim = dt_overridden ? nullptr : &sim;
  ReferenceSet refs = load_reference_dir(a.refs_dir, model, sidecar_sim);

  IdentifyOptions opt;
  if (a.phase == "internal")
    opt.phase = Phase::kInternal;
  else if (a.phase == "external")
    opt.phase = Phase::kExternal;
  else if (a.phase == "both")
    opt.phase = Phase::kBoth;
  else
    throw ConfigError("phase must be internal, external, or both");
  opt.per_joint_actuators = a.per_joint;
  if (a.internal_reward == "cpg")
    opt.internal_reward = InternalRewardKind::kCpgFit;
  else if (a.internal_reward == "l2")
    opt.internal_reward = InternalRewardKind::kTrajectoryL2;
  else
    throw ConfigError("internal reward must be cpg or l2");
  opt.ppo = a.ppo;
  opt.ppo.seed = a.seed;
  opt.ppo.jobs = a.jobs;
  opt.rollout = sim.config(a.seed);

  std::vector<std::string> warnings;
  if (opt.phase == Phase::kExternal)
    warnings.push_back(
        "external phase alone: actuator parameters are taken from --start as-is; "
        "run the internal phase first if they are untuned");

  if (a.log_path.empty()) a.log_path = a.out_path + ".log.jsonl";
  if (const auto dir = fs::path(a.out_path).parent_path(); !dir.empty())
    fs::create_directories(dir);
  std::ofstream log(a.log_path);
  if (!log) throw ConfigError("cannot write training log: " + a.log_path);

  json header;
  header["type"] = "header";
  header["command"] = "identify";
  header["seed"] = a.seed;
  header["phase"] = a.phase;
  header["internal_reward"] = a.internal_reward;
  header["per_joint"] = a.per_joint;
  header["references"] = refs.names;
  header["start_params"] = params_to_json(start);
  header["rollout"] = sim.to_json();
  header["ppo"] = {{"clip_epsilon", opt.ppo.clip_epsilon},
                   {"discount", opt.ppo.discount},
                   {"gae_lambda", opt.ppo.gae_lambda},
                   {"learning_rate", opt.ppo.learning_rate},
                   {"epochs", opt.ppo.epochs},
                   {"minibatch_size", opt.ppo.minibatch_size},
                   {"episodes_per_iteration", opt.ppo.episodes_per_iteration},
                   {"horizon", opt.ppo.horizon},
                   {"entropy_coef", opt.ppo.entropy_coef},
                   {"max_iterations", opt.ppo.max_iterations},
                   {"convergence_tol", opt.ppo.convergence_tol},
                   {"convergence_patience", opt.ppo.convergence_patience},
                   {"action_clamp", opt.ppo.action_clamp},
                   {"hidden_units", opt.ppo.hidden_units},
                   {"init_action_std", opt.ppo.init_action_std}};
  header["warnings"] = warnings;
  log << header.dump() << "\n";
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  const IdentifyResult result = identify(
      model, refs, start, opt,
      [&](const std::string& phase, const IterationRecord& rec, const TunableParams& best) {
        json row;
        row["type"] = "iteration";
        row["phase"] = phase;
        row["iteration"] = rec.iteration;
        row["mean_reward"] = rec.mean_reward;
        row["best_reward"] = rec.best_reward;
        row["clip_fraction"] = rec.clip_fraction;
        row["mean_ratio"] = rec.mean_ratio;
        row["params_snapshot"] = params_to_json(best);
        log << row.dump() << "\n";
        std::printf("[%s] iteration %d  mean %.6g  best %.6g\n", phase.c_str(), rec.iteration,
                    rec.mean_reward, rec.best_reward);
        std::fflush(stdout);
      });

  for (const auto& phase : result.phases) {
    json row;
    row["type"] = "phase_end";
    row["phase"] = phase.phase;
    row["iterations"] = phase.train.iterations;
    row["converged"] = phase.train.converged;
    row["best_reward"] = phase.train.best_reward;
    row["params"] = params_to_json(phase.params_after);
    log << row.dump() << "\n";
  }
  log.close();

  save_params(a.out_path, result.params);
  manifest->add_output(a.out_path);
  manifest->add_output(a.log_path);
  manifest->set("model", a.model_path);
  manifest->set("refs", a.refs_dir);
  manifest->set("start", a.start_path);
  manifest->set("seed", a.seed);
  manifest->set("phase", a.phase);
  manifest->write(a.out_path + ".manifest.json");
  std::printf("identified parameters written to %s\n", a.out_path.c_str());
  return 0;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  std::string model_path, ref_csv, out_dir, gait_path;
  std::vector<std::string> params_paths;
  SimFlags sim;
  double window_periods = 1.0;
  uint64_t seed = 0;
};

void write_series_csv(const std::string& path, const ErrorSeries& s, const char* value_name) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "t," << value_name << "\n";
  char buf[64];
  for (size_t i = 0; i < s.values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", s.time[i], s.values[i]);
    out << buf;
  }
}

int cmd_evaluate(const EvaluateArgs& args_in, Manifest* manifest, bool dt_overridden) {
  EvaluateArgs a = args_in;
  const RobotModel model = load_model(a.model_path);
  const Trajectory ref = load_trajectory_csv(a.ref_csv);

  std::string gait_path = a.gait_path.empty() ? sidecar_for(a.ref_csv) : a.gait_path;
  if (!fs::exists(gait_path)) throw ConfigError("gait file not found: " + gait_path);
  const GaitParams gait = load_gait(gait_path, model.joint_count);

  if (!dt_overridden) {
    std::ifstream in(gait_path);
    json j;
    in >> j;
    if (j.contains("rollout")) {
      a.sim.dt = j["rollout"].value("dt_s", a.sim.dt);
      a.sim.settle = j["rollout"].value("settle_s", a.sim.settle);
    }
  }

  RolloutConfig cfg = a.sim.config(a.seed);
  cfg.duration = ref.time.back() - ref.time.front();
  cfg.record_hz = 1.0 / ref.sample_dt;

  const int window = std::max(
      3, static_cast<int>(std::lround(a.window_periods / (gait.frequency_hz * ref.sample_dt))));

  fs::create_directories(a.out_dir);
  json comparison = json::array();
  for (const std::string& params_path : a.params_paths) {
    const TunableParams params = load_params(params_path, model.joint_count);
    const Trajectory cand = rollout(model, params, gait, cfg);
    const ErrorSeries err = euclidean_error(ref, cand);
    const JointCorrelation corr = joint_correlation_summary(ref, cand, window);

    const std::string stem = fs::path(params_path).stem().string();
    const std::string err_csv = (fs::path(a.out_dir) / (stem + "_error.csv")).string();
    const std::string corr_csv = (fs::path(a.out_dir) / (stem + "_correlation.csv")).string();
    write_series_csv(err_csv, err, "euclidean_error_m");
    {
      std::ofstream out(corr_csv);
      out << "t,mean,min,max\n";
      char buf[128];
      for (size_t i = 0; i < corr.mean.values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", corr.mean.time[i],
                      corr.mean.values[i], corr.min.values[i], corr.max.values[i]);
        out << buf;
      }
    }
    json metrics;
    metrics["params"] = params_path;
    metrics["final_error_m"] = err.final;
    metrics["mean_error_m"] = err.mean;
    metrics["max_error_m"] = err.max;
    metrics["mean_correlation"] = corr.mean.mean;
    const std::string mpath = (fs::path(a.out_dir) / (stem + "_metrics.json")).string();
    {
      std::ofstream out(mpath);
      out << metrics.dump(2) << "\n";
    }
    comparison.push_back(metrics);
    manifest->add_output(err_csv);
    manifest->add_output(corr_csv);
    manifest->add_output(mpath);
    std::printf("%s: mean error %.4f m, final %.4f m, mean correlation %.4f\n", stem.c_str(),
                err.mean, err.final, corr.mean.mean);
  }

  std::sort(comparison.begin(), comparison.end(), [](const json& x, const json& y) {
    return x["mean_error_m"].get<double>() < y["mean_error_m"].get<double>();
  });
  json combined;
  combined["reference"] = a.ref_csv;
  combined["window_samples"] = window;
  combined["ranking"] = comparison;
  const std::string cpath = (fs::path(a.out_dir) / "comparison.json").string();
  {
    std::ofstream out(cpath);
    out << combined.dump(2) << "\n";
  }
  manifest->add_output(cpath);
  manifest->set("model", a.model_path);
  manifest->set("reference", a.ref_csv);
  manifest->set("params", a.params_paths);
  manifest->set("seed", a.seed);
  manifest->write((fs::path(a.out_dir) / "manifest.json").string());
  return 0;
}

// --- dump-friction-curve ------------------------------------------------------

struct FrictionCurveArgs {
  std::string params_path, model_path, out_csv;
  double v_max = 0.5;
  int steps = 500;
  double normal_force = 1.0;
};

int cmd_dump_friction_curve(const FrictionCurveArgs& a, Manifest* manifest) {
  GroundParams g;
  g.k1 = 1e4;
  g.k2 = 100.0;
  if (!a.model_path.empty()) {
    const RobotModel model = load_model(a.model_path);
    g.k1 = model.ground_spring_k1;
    g.k2 = model.ground_damper_k2;
  }
  // Only the Stribeck block of the params file is used here.
  std::ifstream in(a.params_path);
  if (!in) throw ConfigError("params file not found: " + a.params_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("params file failed to parse: ") + e.what());
  }
  g.mu_c = j.at("mu_c").get<double>();
  g.mu_s = j.at("mu_s").get<double>();
  g.mu_v = j.at("mu_v_Ns_per_m").get<double>();
  g.v_s = j.at("v_s_m_per_s").get<double>();

  std::ofstream out(a.out_csv);
  if (!out) throw ConfigError("cannot write " + a.out_csv);
  out << "v,s,Fx\n";
  char buf[96];
  for (int i = -a.steps; i <= a.steps; ++i) {
    const double v = a.v_max * i / a.steps;
    const double s = stribeck_coefficient(v, g);
    const double sgn = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
    const double fx = -s * a.normal_force * sgn - g.mu_v * v;
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", v, s, fx);
    out << buf;
  }
  out.close();
  manifest->add_output(a.out_csv);
  manifest->set("params", a.params_path);
  manifest->set("normal_force_N", a.normal_force);
  manifest->write(a.out_csv + ".manifest.json");
  std::printf("wrote %s\n", a.out_csv.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snake-robot locomotion simulator and parameter identification"};
  app.require_subcommand(1);

  MakeReferenceArgs mr;
  CLI::App* c_mr = app.add_subcommand(
      "make-reference", "synthesize reference trajectories from hidden ground-truth parameters");
  c_mr->add_option("--model", mr.model_path, "robot model JSON")->required();
  c_mr->add_option("--truth", mr.truth_path, "hidden ground-truth params JSON")->required();
  c_mr->add_option("--gaits", mr.gait_paths, "gait JSON files")->required()->expected(-1);
  c_mr->add_option("--out", mr.out_dir, "output directory")->required();
  c_mr->add_option("--noise-pos-mm", mr.noise_pos_mm, "head position noise std, mm");
  c_mr->add_option("--noise-joint-deg", mr.noise_joint_deg, "joint angle noise std, deg");
  c_mr->add_option("--seed", mr.seed, "noise seed");
  mr.sim.duration = 8.0;
  mr.sim.attach(c_mr);

  RolloutArgs ro;
  CLI::App* c_ro = app.add_subcommand("rollout", "run one gait rollout and record it");
  c_ro->add_option("--model", ro.model_path)->required();
  c_ro->add_option("--params", ro.params_path)->required();
  c_ro->add_option("--gait", ro.gait_path)->required();
  c_ro->add_option("--out", ro.out_csv, "output trajectory CSV")->required();
  c_ro->add_option("--seed", ro.seed);
  ro.sim.attach(c_ro);

  IdentifyArgs id;
  CLI::App* c_id = app.add_subcommand(
      "identify", "tune actuator and friction parameters against reference trajectories");
  c_id->add_option("--model", id.model_path)->required();
  c_id->add_option("--refs", id.refs_dir, "directory of reference CSVs with .gait.json sidecars")
      ->required();
  c_id->add_option("--start", id.start_path, "starting (nominal) params JSON")->required();
  c_id->add_option("--out", id.out_path, "tuned params JSON")->required();
  c_id->add_option("--log", id.log_path, "training log JSONL (default <out>.log.jsonl)");
  c_id->add_option("--phase", id.phase, "internal | external | both");
  c_id->add_option("--internal-reward", id.internal_reward, "cpg | l2");
  c_id->add_flag("--per-joint", id.per_joint, "tune one actuator triple per joint");
  c_id->add_option("--seed", id.seed);
  c_id->add_option("--jobs", id.jobs, "parallel rollout workers");
  c_id->add_option("--clip", id.ppo.clip_epsilon);
  c_id->add_option("--gamma", id.ppo.discount);
  c_id->add_option("--lambda", id.ppo.gae_lambda);
  c_id->add_option("--lr", id.ppo.learning_rate);
  c_id->add_option("--epochs", id.ppo.epochs);
  c_id->add_option("--minibatch", id.ppo.minibatch_size);
  c_id->add_option("--episodes", id.ppo.episodes_per_iteration);
  c_id->add_option("--horizon", id.ppo.horizon);
  c_id->add_option("--entropy", id.ppo.entropy_coef);
  c_id->add_option("--max-iters", id.ppo.max_iterations);
  c_id->add_option("--tol", id.ppo.convergence_tol);
  c_id->add_option("--patience", id.ppo.convergence_patience);
  CLI::Option* id_dt = c_id->add_option("--dt", id.sim.dt, "physics step, s");
  c_id->add_option("--settle", id.sim.settle);
  c_id->add_flag("--no-normal-clamp", id.sim.no_normal_clamp);

  EvaluateArgs ev;
  CLI::App* c_ev = app.add_subcommand("evaluate",
                                      "roll out parameter sets against a reference and rank them");
  c_ev->add_option("--model", ev.model_path)->required();
  c_ev->add_option("--ref", ev.ref_csv, "reference trajectory CSV")->required();
  c_ev->add_option("--params", ev.params_paths, "parameter JSON files")->required()->expected(-1);
  c_ev->add_option("--out", ev.out_dir, "output directory")->required();
  c_ev->add_option("--gait", ev.gait_path, "gait JSON (default: reference sidecar)");
  c_ev->add_option("--window-periods", ev.window_periods, "correlation window, gait periods");
  c_ev->add_option("--seed", ev.seed);
  CLI::Option* ev_dt = c_ev->add_option("--dt", ev.sim.dt, "physics step, s");
  c_ev->add_option("--settle", ev.sim.settle);
  c_ev->add_flag("--no-normal-clamp", ev.sim.no_normal_clamp);

  FrictionCurveArgs fc;
  CLI::App* c_fc = app.add_subcommand("dump-friction-curve",
                                      "export v, s(v), F_x(v) for the Stribeck friction model");
  c_fc->add_option("--params", fc.params_path, "params JSON with the Stribeck block")->required();
  c_fc->add_option("--model", fc.model_path, "optional model JSON for k1/k2");
  c_fc->add_option("--out", fc.out_csv, "output CSV")->required();
  c_fc->add_option("--vmax", fc.v_max, "velocity range, m/s");
  c_fc->add_option("--steps", fc.steps, "samples per side");
  c_fc->add_option("--normal-force", fc.normal_force, "normal load for F_x, N");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_mr->parsed()) {
      Manifest manifest("make-reference", argc, argv);
      return cmd_make_reference(mr, &manifest);
    }
    if (c_ro->parsed()) {
      Manifest manifest("rollout", argc, argv);
      return cmd_rollout(ro, &manifest);
    }
    if (c_id->parsed()) {
      Manifest manifest("identify", argc, argv);
      return cmd_identify(id, &manifest, id_dt->count() > 0);
    }
    if (c_ev->parsed()) {
      Manifest manifest("evaluate", argc, argv);
      return cmd_evaluate(ev, &manifest, ev_dt->count() > 0);
    }
    if (c_fc->parsed()) {
      Manifest manifest("dump-friction-curve", argc, argv);
      return cmd_dump_friction_curve(fc, &manifest);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const SimulationError& e) {
    std::fprintf(stderr, "simulation error: %s\n", e.what());
    return 3;
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "training error: %s\n", e.what());
    return 4;
  }
  return 0;
}
