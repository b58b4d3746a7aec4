#pragma once

#include <functional>
#include <span>
#include <vector>

#include "snakesim/math.hpp"
#include "snakesim/mlp.hpp"

namespace snakesim {

struct PpoConfig {
  double clip_epsilon = 0.2;
  double discount = 0.99;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  int epochs = 10;
  int minibatch_size = 64;
  int episodes_per_iteration = 16;
  int horizon = 8;  // steps per episode
  double entropy_coef = 0.0;
  int max_iterations = 25;
  double convergence_tol = 0.02;  // relative best-reward gain over the patience window
  int convergence_patience = 6;
  double action_clamp = 0.1;  // per-step delta bound, normalized units
  int hidden_units = 64;
  double init_action_std = 0.05;
  int jobs = 1;
  uint64_t seed = 0;

  void validate() const;
};

// One environment step: state and action in normalized parameter coordinates.
// The stored action is the raw policy sample; the environment applies the
// delta clamp.
struct Transition {
  VecX state;
  VecX action;
  VecX next_state;
  double reward = 0.0;
  double log_prob = 0.0;
  double value = 0.0;
  bool episode_end = false;
};

// Discounted suffix sums: R_t = r_t + discount * R_{t+1}.
std::vector<double> rewards_to_go(std::span<const double> rewards, double discount);

// GAE(lambda) for one episode; the final step is terminal (no bootstrap).
std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values, double discount,
                                   double lambda);

// In place, zero mean and unit variance.
void normalize_advantages(std::span<double> advantages);

// Diagonal-Gaussian policy: a small tanh network for the mean plus a learned
// state-independent log standard deviation appended to the same flat
// parameter vector.
class GaussianPolicy {
 public:
  GaussianPolicy(int state_dim, int action_dim, int hidden, double init_std, Rng* rng);

  VecX mean(const VecX& state) const;
  VecX sample(const VecX& state, Rng* rng, double* log_prob) const;
  double log_prob(const VecX& state, const VecX& action) const;
  double entropy() const;

  VecX& params() { return params_; }
  const VecX& params() const { return params_; }
  int action_dim() const { return spec_.n_out; }

  // Accumulates d(dlp * log_prob + dent * entropy)/dparams into *grad.
  void accumulate_grad(const VecX& state, const VecX& action, double dlp, double dent,
                       VecX* grad) const;

 private:
  MlpSpec spec_;
  VecX params_;  // [mlp params..., log_std...]

  auto log_std() const { return params_.tail(spec_.n_out); }
};

class ValueNet {
 public:
  ValueNet(int state_dim, int hidden, Rng* rng);

  double value(const VecX& state) const;
  VecX& params() { return params_; }
  const VecX& params() const { return params_; }

  void accumulate_grad(const VecX& state, double dvalue, VecX* grad) const;

 private:
  MlpSpec spec_;
  VecX params_;
};

struct UpdateDiagnostics {
  double mean_ratio_pre = 0.0;  // before the first gradient step; == 1 by construction
  double mean_ratio = 0.0;      // after the update
  double clip_fraction = 0.0;
  double surrogate = 0.0;       // mean clipped objective after the update
  double value_loss = 0.0;
};

// Clipped-surrogate ascent: `epochs` passes of shuffled minibatch Adam steps
// maximizing min(ratio*A, clip(ratio, 1-eps, 1+eps)*A), with the value net
// regressed to the rewards-to-go. Throws TrainingError on non-finite
// gradients.
UpdateDiagnostics ppo_update(const std::vector<Transition>& batch,
                             std::span<const double> advantages,
                             std::span<const double> returns, GaussianPolicy* policy,
                             ValueNet* value, Adam* policy_opt, Adam* value_opt,
                             const PpoConfig& config, Rng* shuffle_rng);

// Parameter-search environment: episodes start at the best point seen so far
// and take bounded deltas inside the [-1, 1] box; evaluate must be pure and
// thread-safe.
struct ParamEnv {
  int dim = 0;
  VecX start;
  std::function<double(const VecX&)> evaluate;
};

struct IterationRecord {
  int iteration = 0;
  double mean_reward = 0.0;
  double best_reward = 0.0;
  double clip_fraction = 0.0;
  double mean_ratio = 0.0;
  VecX best_state;
};

struct TrainResult {
  VecX best_state;
  double best_reward = 0.0;
  std::vector<IterationRecord> history;
  bool converged = false;
  int iterations = 0;
};

TrainResult ppo_train(const ParamEnv& env, const PpoConfig& config,
                      const std::function<void(const IterationRecord&)>& on_iteration = {});

}  // namespace snakesim
