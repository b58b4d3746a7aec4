#include "snakesim/ppo.hpp"

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

using namespace snakesim;

namespace {

// Builds a batch by sampling the live policy so stored log-probs are honest.
std::vector<Transition> sample_batch(const GaussianPolicy& policy, const ValueNet& value,
                                     int n, int dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<Transition> batch;
  for (int i = 0; i < n; ++i) {
    Transition tr;
    tr.state = VecX::Zero(dim);
    for (int d = 0; d < dim; ++d) tr.state[d] = rng.uniform(-1.0, 1.0);
    tr.action = policy.sample(tr.state, &rng, &tr.log_prob);
    tr.value = value.value(tr.state);
    tr.next_state = tr.state;
    tr.reward = rng.uniform(-1.0, 0.0);
    batch.push_back(std::move(tr));
  }
  return batch;
}

}  // namespace

TEST_SUITE_BEGIN("ppo");

TEST_CASE("rewards-to-go arithmetic") {
  {
    const std::vector<double> r{1.0, 1.0, 1.0};
    const auto out = rewards_to_go(r, 1.0);
    CHECK(out == std::vector<double>{3.0, 2.0, 1.0});
  }
  {
    const std::vector<double> r{0.3, -0.7, 2.0, 0.1};
    const auto out = rewards_to_go(r, 0.0);
    CHECK(out == r);
  }
  {
    const std::vector<double> r{1.0, 2.0};
    const auto out = rewards_to_go(r, 0.5);
    CHECK(out == std::vector<double>{2.0, 2.0});
  }
}

TEST_CASE("gae limit case and perfect-value case") {
  const std::vector<double> rewards{-1.0, -0.5, -2.0, -0.25};
  // lambda = 1, gamma = 1: advantage telescopes to rewards-to-go minus baseline.
  std::vector<double> values{0.3, -0.2, 0.9, -1.0};
  const auto adv = gae_advantages(rewards, values, 1.0, 1.0);
  const auto r2g = rewards_to_go(rewards, 1.0);
  for (size_t t = 0; t < rewards.size(); ++t)
    CHECK(adv[t] == doctest::Approx(r2g[t] - values[t]).epsilon(1e-12));

  // Constant rewards with the exactly fitted value function: no surprise.
  const double gamma = 0.9;
  std::vector<double> const_rewards(6, -1.0);
  const auto fitted = rewards_to_go(const_rewards, gamma);
  const auto zero_adv = gae_advantages(const_rewards, fitted, gamma, 0.7);
  for (double a : zero_adv) CHECK(std::abs(a) < 1e-12);
}

TEST_CASE("advantage normalization contract") {
  Rng rng(8);
  std::vector<double> adv(257);
  for (double& a : adv) a = rng.uniform(-5.0, 3.0);
  normalize_advantages(adv);
  double mean = 0.0, var = 0.0;
  for (double a : adv) mean += a;
  mean /= adv.size();
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= adv.size();
  CHECK(std::abs(mean) < 1e-9);
  CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("min-rule arithmetic of the clipped objective") {
  const double eps = 0.2;
  auto objective = [&](double ratio, double adv) {
    return std::min(ratio * adv, std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv);
  };
  CHECK(objective(1.35, 1.0) == doctest::Approx(1.2));
  CHECK(objective(0.5, -1.0) == doctest::Approx(-0.8));  // min(-0.5, -0.8)
  CHECK(objective(1.0, 0.7) == doctest::Approx(0.7));
}

TEST_CASE("ratio is one before the first gradient step") {
  Rng init(3);
  GaussianPolicy policy(4, 4, 32, 0.05, &init);
  ValueNet value(4, 32, &init);
  const auto batch = sample_batch(policy, value, 64, 4, 21);

  std::vector<double> adv(batch.size()), ret(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    adv[i] = batch[i].reward;
    ret[i] = batch[i].reward;
  }
  normalize_advantages(adv);

  PpoConfig cfg;
  cfg.epochs = 1;
  Adam popt, vopt;
  popt.reset(static_cast<int>(policy.params().size()));
  vopt.reset(static_cast<int>(value.params().size()));
  Rng shuffle(9);
  const UpdateDiagnostics diag =
      ppo_update(batch, adv, ret, &policy, &value, &popt, &vopt, cfg, &shuffle);
  CHECK(diag.mean_ratio_pre == doctest::Approx(1.0).epsilon(1e-6));
  // After an epoch of steps the policy actually moved.
  CHECK(diag.mean_ratio != doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("clipped objective never exceeds ratio times advantage") {
  Rng init(5);
  GaussianPolicy policy(3, 3, 32, 0.05, &init);
  ValueNet value(3, 32, &init);
  auto batch = sample_batch(policy, value, 128, 3, 31);
  std::vector<double> adv(batch.size()), ret(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    adv[i] = batch[i].reward + 0.3;
    ret[i] = batch[i].reward;
  }
  normalize_advantages(adv);

  PpoConfig cfg;
  cfg.epochs = 3;
  Adam popt, vopt;
  popt.reset(static_cast<int>(policy.params().size()));
  vopt.reset(static_cast<int>(value.params().size()));
  Rng shuffle(11);
  ppo_update(batch, adv, ret, &policy, &value, &popt, &vopt, cfg, &shuffle);

  // Against the updated policy, every per-sample objective obeys the bound.
  const double eps = cfg.clip_epsilon;
  for (size_t i = 0; i < batch.size(); ++i) {
    const double ratio = std::exp(policy.log_prob(batch[i].state, batch[i].action) -
                                  batch[i].log_prob);
    const double obj =
        std::min(ratio * adv[i], std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv[i]);
    CHECK(obj <= ratio * adv[i] + 1e-12);
    if (adv[i] > 0.0) CHECK(obj <= (1.0 + eps) * adv[i] + 1e-12);
  }
}

TEST_CASE("gaussian log-prob gradient matches finite differences") {
  Rng init(17);
  GaussianPolicy policy(3, 2, 16, 0.1, &init);
  Rng rng(23);
  VecX state(3);
  state << 0.2, -0.5, 0.8;
  double lp0;
  const VecX action = policy.sample(state, &rng, &lp0);

  VecX grad = VecX::Zero(policy.params().size());
  policy.accumulate_grad(state, action, 1.0, 0.0, &grad);

  const double h = 1e-6;
  Rng probe(1);
  for (int k : {0, 7, 42, static_cast<int>(policy.params().size()) - 1,
                static_cast<int>(policy.params().size()) - 2}) {
    const double saved = policy.params()[k];
    policy.params()[k] = saved + h;
    const double lp_plus = policy.log_prob(state, action);
    policy.params()[k] = saved - h;
    const double lp_minus = policy.log_prob(state, action);
    policy.params()[k] = saved;
    const double fd = (lp_plus - lp_minus) / (2.0 * h);
    CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("trainer is seed-deterministic") {
  ParamEnv env;
  env.dim = 2;
  env.start = VecX::Zero(2);
  env.evaluate = [](const VecX& x) {
    return -(x[0] - 0.4) * (x[0] - 0.4) - (x[1] + 0.3) * (x[1] + 0.3);
  };
  PpoConfig cfg;
  cfg.max_iterations = 6;
  cfg.episodes_per_iteration = 4;
  cfg.horizon = 4;
  cfg.seed = 1234;
  cfg.jobs = 2;  // concurrency must not perturb the stream
  const TrainResult a = ppo_train(env, cfg);
  const TrainResult b = ppo_train(env, cfg);
  REQUIRE(a.history.size() == b.history.size());
  CHECK(a.best_reward == b.best_reward);
  CHECK(a.best_state == b.best_state);
  for (size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].mean_reward == b.history[i].mean_reward);
    CHECK(a.history[i].mean_ratio == b.history[i].mean_ratio);
    CHECK(a.history[i].best_state == b.history[i].best_state);
  }
}

TEST_CASE("best reward envelope is non-decreasing") {
  ParamEnv env;
  env.dim = 1;
  env.start = VecX::Zero(1);
  env.evaluate = [](const VecX& x) { return -std::abs(x[0] - 0.6); };
  PpoConfig cfg;
  cfg.max_iterations = 15;
  cfg.episodes_per_iteration = 8;
  cfg.seed = 5;
  const TrainResult r = ppo_train(env, cfg);
  for (size_t i = 1; i < r.history.size(); ++i)
    CHECK(r.history[i].best_reward >= r.history[i - 1].best_reward);
}

TEST_CASE("1-d hidden-target recovery within 5% of the range") {
  // Hidden optimum at +0.53 in normalized coordinates; reward is the negated
  // squared distance. The range is [-1, 1], so 5% of it is 0.1.
  const double target = 0.53;
  ParamEnv env;
  env.dim = 1;
  env.start = VecX::Constant(1, -0.6);
  env.evaluate = [target](const VecX& x) { return -(x[0] - target) * (x[0] - target); };

  PpoConfig cfg;
  cfg.max_iterations = 200;
  cfg.seed = 7;
  cfg.jobs = 2;
  const TrainResult r = ppo_train(env, cfg);
  CHECK(r.iterations <= 200);
  CHECK(std::abs(r.best_state[0] - target) < 0.05 * 2.0);

  const TrainResult again = ppo_train(env, cfg);
  CHECK(again.best_state == r.best_state);
}

TEST_SUITE_END();
