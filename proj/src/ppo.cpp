#include "snakesim/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "snakesim/errors.hpp"

namespace snakesim {

void PpoConfig::validate() const {
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ConfigError("clip epsilon must be in (0, 1)");
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("discount must be in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae lambda must be in [0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (epochs < 1 || minibatch_size < 1) throw ConfigError("epochs and minibatch size must be >= 1");
  if (episodes_per_iteration < 1) throw ConfigError("episodes per iteration must be >= 1");
  if (horizon < 1) throw ConfigError("episode horizon must be >= 1");
  if (entropy_coef < 0.0) throw ConfigError("entropy coefficient must be >= 0");
  if (max_iterations < 1) throw ConfigError("max iterations must be >= 1");
  if (!(convergence_tol >= 0.0)) throw ConfigError("convergence tolerance must be >= 0");
  if (convergence_patience < 1) throw ConfigError("convergence patience must be >= 1");
  if (!(action_clamp > 0.0)) throw ConfigError("action clamp must be > 0");
  if (hidden_units < 1) throw ConfigError("hidden units must be >= 1");
  if (!(init_action_std > 0.0)) throw ConfigError("initial action std must be > 0");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

std::vector<double> rewards_to_go(std::span<const double> rewards, double discount) {
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
    acc = rewards[t] + discount * acc;
    out[t] = acc;
  }
  return out;
}

std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values, double discount,
                                   double lambda) {
  const int n = static_cast<int>(rewards.size());
  std::vector<double> adv(n);
  double acc = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double next_value = (t + 1 < n) ? values[t + 1] : 0.0;
    const double delta = rewards[t] + discount * next_value - values[t];
    acc = delta + discount * lambda * acc;
    adv[t] = acc;
  }
  return adv;
}

void normalize_advantages(std::span<double> advantages) {
  const int n = static_cast<int>(advantages.size());
  if (n == 0) return;
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= n;
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : advantages) a = (a - mean) * inv_std;
}

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
}

GaussianPolicy::GaussianPolicy(int state_dim, int action_dim, int hidden, double init_std,
                               Rng* rng) {
  spec_ = MlpSpec{state_dim, hidden, action_dim};
  const VecX net = mlp_init(spec_, rng, 0.01);
  params_.resize(net.size() + action_dim);
  params_.head(net.size()) = net;
  params_.tail(action_dim).setConstant(std::log(init_std));
}

VecX GaussianPolicy::mean(const VecX& state) const {
  return mlp_forward(spec_, params_.head(spec_.param_count()), state);
}

VecX GaussianPolicy::sample(const VecX& state, Rng* rng, double* log_prob) const {
  const VecX mu = mean(state);
  VecX action(spec_.n_out);
  double lp = 0.0;
  for (int d = 0; d < spec_.n_out; ++d) {
    const double ls = log_std()[d];
    const double sigma = std::exp(ls);
    const double z = rng->normal();
    action[d] = mu[d] + sigma * z;
    lp += -0.5 * z * z - ls - kLogSqrt2Pi;
  }
  if (log_prob) *log_prob = lp;
  return action;
}

double GaussianPolicy::log_prob(const VecX& state, const VecX& action) const {
  const VecX mu = mean(state);
  double lp = 0.0;
  for (int d = 0; d < spec_.n_out; ++d) {
    const double ls = log_std()[d];
    const double z = (action[d] - mu[d]) * std::exp(-ls);
    lp += -0.5 * z * z - ls - kLogSqrt2Pi;
  }
  return lp;
}

double GaussianPolicy::entropy() const {
  double h = 0.0;
  for (int d = 0; d < spec_.n_out; ++d) h += log_std()[d] + 0.5 + kLogSqrt2Pi;
  return h;
}

void GaussianPolicy::accumulate_grad(const VecX& state, const VecX& action, double dlp,
                                     double dent, VecX* grad) const {
  MlpCache cache;
  const VecX net = params_.head(spec_.param_count());
  const VecX mu = mlp_forward(spec_, net, state, &cache);

  VecX dmu(spec_.n_out);
  auto grad_log_std = grad->tail(spec_.n_out);
  for (int d = 0; d < spec_.n_out; ++d) {
    const double ls = log_std()[d];
    const double inv_var = std::exp(-2.0 * ls);
    const double diff = action[d] - mu[d];
    dmu[d] = dlp * diff * inv_var;                       // d log_prob / d mu
    grad_log_std[d] += dlp * (diff * diff * inv_var - 1.0)  // d log_prob / d log_std
                       + dent;                              // d entropy / d log_std
  }
  VecX net_grad = VecX::Zero(spec_.param_count());
  mlp_backward(spec_, net, cache, dmu, &net_grad);
  grad->head(spec_.param_count()) += net_grad;
}

ValueNet::ValueNet(int state_dim, int hidden, Rng* rng) {
  spec_ = MlpSpec{state_dim, hidden, 1};
  params_ = mlp_init(spec_, rng, 1.0);
}

double ValueNet::value(const VecX& state) const {
  return mlp_forward(spec_, params_, state)[0];
}

void ValueNet::accumulate_grad(const VecX& state, double dvalue, VecX* grad) const {
  MlpCache cache;
  mlp_forward(spec_, params_, state, &cache);
  VecX dout(1);
  dout[0] = dvalue;
  mlp_backward(spec_, params_, cache, dout, grad);
}

UpdateDiagnostics ppo_update(const std::vector<Transition>& batch,
                             std::span<const double> advantages,
                             std::span<const double> returns, GaussianPolicy* policy,
                             ValueNet* value, Adam* policy_opt, Adam* value_opt,
                             const PpoConfig& config, Rng* shuffle_rng) {
  if (batch.empty()) throw TrainingError("ppo_update on empty batch");
  const int n = static_cast<int>(batch.size());
  const double eps = config.clip_epsilon;

  UpdateDiagnostics diag;
  for (int i = 0; i < n; ++i)
    diag.mean_ratio_pre += std::exp(policy->log_prob(batch[i].state, batch[i].action) -
                                    batch[i].log_prob);
  diag.mean_ratio_pre /= n;

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  VecX policy_grad(policy->params().size());
  VecX value_grad(value->params().size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), shuffle_rng->engine());
    for (int start = 0; start < n; start += config.minibatch_size) {
      const int count = std::min(config.minibatch_size, n - start);
      policy_grad.setZero();
      value_grad.setZero();
      for (int k = 0; k < count; ++k) {
        const int i = idx[start + k];
        const Transition& tr = batch[i];
        const double adv = advantages[i];
        const double ratio = std::exp(policy->log_prob(tr.state, tr.action) - tr.log_prob);
        const double surr1 = ratio * adv;
        const double surr2 = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
        // Maximizing min(surr1, surr2): zero gradient when the clipped branch
        // is active and saturated.
        const double dlp = (surr1 <= surr2) ? ratio * adv : 0.0;
        policy->accumulate_grad(tr.state, tr.action, -dlp / count,
                                -config.entropy_coef / count, &policy_grad);
        const double v = value->value(tr.state);
        value->accumulate_grad(tr.state, (v - returns[i]) / count, &value_grad);
      }
      if (!policy_grad.allFinite() || !value_grad.allFinite())
        throw TrainingError("non-finite gradient in ppo_update");
      policy_opt->step(&policy->params(), policy_grad);
      value_opt->step(&value->params(), value_grad);
    }
  }

  double clip_count = 0.0;
  for (int i = 0; i < n; ++i) {
    const Transition& tr = batch[i];
    const double ratio = std::exp(policy->log_prob(tr.state, tr.action) - tr.log_prob);
    const double surr1 = ratio * advantages[i];
    const double surr2 = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantages[i];
    diag.mean_ratio += ratio;
    diag.surrogate += std::min(surr1, surr2);
    if (ratio < 1.0 - eps || ratio > 1.0 + eps) clip_count += 1.0;
    const double dv = value->value(tr.state) - returns[i];
    diag.value_loss += 0.5 * dv * dv;
  }
  diag.mean_ratio /= n;
  diag.surrogate /= n;
  diag.clip_fraction = clip_count / n;
  diag.value_loss /= n;
  return diag;
}

TrainResult ppo_train(const ParamEnv& env, const PpoConfig& config,
                      const std::function<void(const IterationRecord&)>& on_iteration) {
  config.validate();
  if (env.dim < 1 || env.start.size() != env.dim || !env.evaluate)
    throw TrainingError("malformed parameter environment");

  Rng init_rng(split_seed(config.seed, 1));
  GaussianPolicy policy(env.dim, env.dim, config.hidden_units, config.init_action_std, &init_rng);
  ValueNet value(env.dim, config.hidden_units, &init_rng);
  Adam policy_opt, value_opt;
  policy_opt.learning_rate = value_opt.learning_rate = config.learning_rate;
  policy_opt.reset(static_cast<int>(policy.params().size()));
  value_opt.reset(static_cast<int>(value.params().size()));
  Rng shuffle_rng(split_seed(config.seed, 2));

  TrainResult result;
  result.best_state = env.start;
  result.best_reward = env.evaluate(env.start);

  const int n_episodes = config.episodes_per_iteration;
  const int horizon = config.horizon;
  std::vector<std::vector<Transition>> episodes(n_episodes);

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    // Episodes all start from the best point found so far (frozen for the
    // iteration) and are independent given the policy, so they can run on
    // worker threads with per-episode seed streams.
    const VecX start_state = result.best_state;
    parallel_for(n_episodes, config.jobs, [&](int ep) {
      Rng rng(split_seed(config.seed, 1000 + static_cast<uint64_t>(iter) * 8192 + ep));
      auto& episode = episodes[ep];
      episode.clear();
      VecX s = start_state;
      for (int t = 0; t < horizon; ++t) {
        Transition tr;
        tr.state = s;
        tr.action = policy.sample(s, &rng, &tr.log_prob);
        tr.value = value.value(s);
        VecX delta = tr.action.cwiseMax(-config.action_clamp).cwiseMin(config.action_clamp);
        tr.next_state = (s + delta).cwiseMax(-1.0).cwiseMin(1.0);
        tr.reward = env.evaluate(tr.next_state);
        tr.episode_end = (t == horizon - 1);
        s = tr.next_state;
        episode.push_back(std::move(tr));
      }
    });

    std::vector<Transition> batch;
    std::vector<double> advantages, returns;
    double reward_sum = 0.0;
    for (int ep = 0; ep < n_episodes; ++ep) {
      std::vector<double> rewards, values;
      for (const Transition& tr : episodes[ep]) {
        rewards.push_back(tr.reward);
        values.push_back(tr.value);
        reward_sum += tr.reward;
        if (tr.reward > result.best_reward) {
          result.best_reward = tr.reward;
          result.best_state = tr.next_state;
        }
      }
      const auto ep_adv = gae_advantages(rewards, values, config.discount, config.gae_lambda);
      const auto ep_ret = rewards_to_go(rewards, config.discount);
      advantages.insert(advantages.end(), ep_adv.begin(), ep_adv.end());
      returns.insert(returns.end(), ep_ret.begin(), ep_ret.end());
      for (Transition& tr : episodes[ep]) batch.push_back(tr);
    }
    normalize_advantages(advantages);

    const UpdateDiagnostics diag = ppo_update(batch, advantages, returns, &policy, &value,
                                              &policy_opt, &value_opt, config, &shuffle_rng);

    IterationRecord record;
    record.iteration = iter;
    record.mean_reward = reward_sum / static_cast<double>(batch.size());
    record.best_reward = result.best_reward;
    record.clip_fraction = diag.clip_fraction;
    record.mean_ratio = diag.mean_ratio;
    record.best_state = result.best_state;
    result.history.push_back(record);
    result.iterations = iter;
    if (on_iteration) on_iteration(record);

    if (iter > config.convergence_patience) {
      const double prev =
          result.history[iter - 1 - config.convergence_patience].best_reward;
      const double gain = result.best_reward - prev;
      if (gain <= config.convergence_tol * std::abs(prev)) {
        result.converged = true;
        break;
      }
    }
  }
  return result;
}

}  // namespace snakesim
