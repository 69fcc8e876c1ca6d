#pragma once

#include <vector>

#include <json.hpp>

#include "pasist/numerics.hpp"

namespace pasist {

struct PpoConfig {
  int num_envs = 64;
  int horizon = 200;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  int epochs = 5;
  int minibatches = 4;
  double entropy_coef = 0.005;
  double value_coef = 1.0;
  double learning_rate = 3e-4;
  double value_learning_rate = 1e-3;
  double max_grad_norm = 1.0;
  double init_log_std = -0.5;
  std::vector<int> policy_hidden{128, 128};
  std::vector<int> value_hidden{128, 128};
};

// Diagonal Gaussian policy: an MLP for the mean and a free log-std vector.
class PolicyNet {
 public:
  static constexpr double kMinLogStd = -5.0;
  static constexpr double kMaxLogStd = 2.0;

  PolicyNet() = default;
  PolicyNet(Mlp trunk, Vector log_std, AdamConfig optimizer);
  static PolicyNet create(int obs_dim, int act_dim, const PpoConfig& config, Rng& rng);

  Matrix means(const Matrix& observations) const { return trunk_.forward(observations); }
  Vector mean(const Vector& observation) const { return trunk_.forward(observation); }
  Vector sample(const Vector& mean, Rng& rng) const;
  double log_prob(const Vector& action, const Vector& mean) const;
  double entropy() const;

  int action_size() const { return trunk_.output_size(); }
  const Mlp& trunk() const { return trunk_; }
  Mlp& trunk() { return trunk_; }
  const Vector& log_std() const { return log_std_; }
  Vector& log_std() { return log_std_; }
  AdamState& trunk_optimizer() { return trunk_adam_; }
  AdamState& log_std_optimizer() { return log_std_adam_; }
  const AdamState& trunk_optimizer() const { return trunk_adam_; }
  const AdamState& log_std_optimizer() const { return log_std_adam_; }

  void clamp_log_std();

 private:
  Mlp trunk_;
  Vector log_std_;
  AdamState trunk_adam_;
  AdamState log_std_adam_;
};

class ValueNet {
 public:
  ValueNet() = default;
  ValueNet(Mlp net, AdamConfig optimizer);
  static ValueNet create(int obs_dim, const PpoConfig& config, Rng& rng);

  Vector values(const Matrix& observations) const { return net_.forward(observations).col(0); }
  double value(const Vector& observation) const { return net_.forward(observation)(0); }

  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  AdamState& optimizer() { return adam_; }
  const AdamState& optimizer() const { return adam_; }

 private:
  Mlp net_;
  AdamState adam_;
};

// Fixed-horizon storage, time-major: row t * num_envs + e.
struct RolloutBuffer {
  RolloutBuffer() = default;
  RolloutBuffer(int num_envs, int horizon, int obs_dim, int act_dim);

  int num_envs = 0;
  int horizon = 0;
  Matrix observations;
  Matrix actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> dones;        // 1 if the episode ended after this step
  std::vector<double> last_values;  // bootstrap V(s_H) per env

  std::size_t size() const { return rewards.size(); }
  std::size_t index(int t, int env) const {
    return static_cast<std::size_t>(t) * static_cast<std::size_t>(num_envs) + static_cast<std::size_t>(env);
  }
};

struct GaeResult {
  std::vector<double> advantages;  // raw
  std::vector<double> returns;     // advantages + values
  std::vector<double> normalized;  // zero mean, unit variance over the batch
};

GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda);

struct SurrogateResult {
  double loss = 0.0;  // -mean clipped objective - entropy_coef * entropy
  ParamBuffer trunk_grad;
  Vector log_std_grad;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Clipped surrogate loss and its exact gradient on one minibatch.
SurrogateResult surrogate_loss(const PolicyNet& policy, const Matrix& observations, const Matrix& actions,
                               std::span<const double> old_log_probs, std::span<const double> advantages,
                               double clip, double entropy_coef);

struct ValueLossResult {
  double loss = 0.0;  // value_coef * mean (V - R)^2
  ParamBuffer grad;
};

ValueLossResult value_loss(const ValueNet& value, const Matrix& observations, std::span<const double> returns,
                           double value_coef);

// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)
double clipped_objective(double ratio, double advantage, double clip);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Runs config.epochs passes of config.minibatches shuffled minibatches using
// gae.normalized as advantages. Throws DivergenceError on a non-finite loss.
PpoStats ppo_update(PolicyNet& policy, ValueNet& value, const RolloutBuffer& buffer, const GaeResult& gae,
                    const PpoConfig& config, Rng& rng);

}  // namespace pasist
