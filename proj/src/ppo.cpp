#include "pasist/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pasist/errors.hpp"

namespace pasist {
namespace {

const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

void step_policy(PolicyNet& policy, ParamBuffer& trunk_grad, Vector& log_std_grad, double max_norm) {
  double sq = log_std_grad.squaredNorm();
  for (double g : trunk_grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / (norm + 1e-12);
    for (double& g : trunk_grad) g *= s;
    log_std_grad *= s;
  }
  policy.trunk_optimizer().step(policy.trunk().parameters(), trunk_grad);
  policy.log_std_optimizer().step({policy.log_std().data(), static_cast<std::size_t>(policy.log_std().size())},
                                  {log_std_grad.data(), static_cast<std::size_t>(log_std_grad.size())});
  policy.clamp_log_std();
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

std::vector<double> gather(const std::vector<double>& v, std::span<const std::size_t> idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

}  // namespace

PolicyNet::PolicyNet(Mlp trunk, Vector log_std, AdamConfig optimizer)
    : trunk_(std::move(trunk)),
      log_std_(std::move(log_std)),
      trunk_adam_(trunk_.parameter_count(), optimizer),
      log_std_adam_(static_cast<std::size_t>(log_std_.size()), optimizer) {
  if (log_std_.size() != trunk_.output_size()) throw ConfigError("policy: log-std size must match action size");
  clamp_log_std();
}

PolicyNet PolicyNet::create(int obs_dim, int act_dim, const PpoConfig& config, Rng& rng) {
  std::vector<int> sizes{obs_dim};
  sizes.insert(sizes.end(), config.policy_hidden.begin(), config.policy_hidden.end());
  sizes.push_back(act_dim);
  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  return PolicyNet(Mlp::random(sizes, rng, 0.01), Vector::Constant(act_dim, config.init_log_std), adam);
}

Vector PolicyNet::sample(const Vector& mean, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector a(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) a(i) = mean(i) + std::exp(log_std_(i)) * normal(rng);
  return a;
}

double PolicyNet::log_prob(const Vector& action, const Vector& mean) const {
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double z = (action(i) - mean(i)) / std::exp(log_std_(i));
    lp += -0.5 * z * z - log_std_(i) - 0.5 * kLogTwoPi;
  }
  return lp;
}

double PolicyNet::entropy() const {
  return log_std_.sum() + 0.5 * (1.0 + kLogTwoPi) * static_cast<double>(log_std_.size());
}

void PolicyNet::clamp_log_std() { log_std_ = log_std_.cwiseMax(kMinLogStd).cwiseMin(kMaxLogStd); }

ValueNet::ValueNet(Mlp net, AdamConfig optimizer) : net_(std::move(net)), adam_(net_.parameter_count(), optimizer) {
  if (net_.output_size() != 1) throw ConfigError("value: network must have a scalar output");
}

ValueNet ValueNet::create(int obs_dim, const PpoConfig& config, Rng& rng) {
  std::vector<int> sizes{obs_dim};
  sizes.insert(sizes.end(), config.value_hidden.begin(), config.value_hidden.end());
  sizes.push_back(1);
  AdamConfig adam;
  adam.learning_rate = config.value_learning_rate;
  return ValueNet(Mlp::random(sizes, rng), adam);
}

RolloutBuffer::RolloutBuffer(int envs, int steps, int obs_dim, int act_dim)
    : num_envs(envs),
      horizon(steps),
      observations(static_cast<Eigen::Index>(envs) * steps, obs_dim),
      actions(static_cast<Eigen::Index>(envs) * steps, act_dim),
      log_probs(static_cast<std::size_t>(envs) * steps, 0.0),
      rewards(static_cast<std::size_t>(envs) * steps, 0.0),
      values(static_cast<std::size_t>(envs) * steps, 0.0),
      dones(static_cast<std::size_t>(envs) * steps, 0.0),
      last_values(static_cast<std::size_t>(envs), 0.0) {}

GaeResult compute_gae(const RolloutBuffer& buf, double gamma, double lambda) {
  GaeResult out;
  const std::size_t n = buf.size();
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  for (int e = 0; e < buf.num_envs; ++e) {
    double next_adv = 0.0;
    for (int t = buf.horizon - 1; t >= 0; --t) {
      const std::size_t i = buf.index(t, e);
      const double next_value = t == buf.horizon - 1 ? buf.last_values[static_cast<std::size_t>(e)]
                                                     : buf.values[buf.index(t + 1, e)];
      const double live = 1.0 - buf.dones[i];
      const double delta = buf.rewards[i] + gamma * next_value * live - buf.values[i];
      next_adv = delta + gamma * lambda * live * next_adv;
      out.advantages[i] = next_adv;
      out.returns[i] = next_adv + buf.values[i];
    }
  }
  const double mean = n ? std::accumulate(out.advantages.begin(), out.advantages.end(), 0.0) / n : 0.0;
  double var = 0.0;
  for (double a : out.advantages) var += (a - mean) * (a - mean);
  const double sd = n ? std::sqrt(var / n) : 0.0;
  out.normalized.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.normalized[i] = (out.advantages[i] - mean) / (sd + 1e-8);
  return out;
}

double clipped_objective(double ratio, double advantage, double clip) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - clip, 1.0 + clip) * advantage);
}

SurrogateResult surrogate_loss(const PolicyNet& policy, const Matrix& obs, const Matrix& actions,
                               std::span<const double> old_log_probs, std::span<const double> advantages,
                               double clip, double entropy_coef) {
  const Eigen::Index b = obs.rows();
  const Eigen::Index a_dim = actions.cols();
  if (actions.rows() != b || static_cast<Eigen::Index>(old_log_probs.size()) != b ||
      static_cast<Eigen::Index>(advantages.size()) != b)
    throw ConfigError("ppo: minibatch arrays disagree in length");

  std::vector<Matrix> acts;
  policy.trunk().forward_cache(obs, acts);
  const Matrix& mu = acts.back();
  const Vector& log_std = policy.log_std();
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();

  SurrogateResult out;
  Matrix g_mu(b, a_dim);
  out.log_std_grad = Vector::Zero(a_dim);
  double objective = 0.0;
  std::size_t clipped = 0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const Eigen::ArrayXd diff = (actions.row(i) - mu.row(i)).transpose().array();
    const double lp = (-0.5 * diff.square() * inv_var - log_std.array() - 0.5 * kLogTwoPi).sum();
    const double ratio = std::exp(lp - old_log_probs[static_cast<std::size_t>(i)]);
    const double adv = advantages[static_cast<std::size_t>(i)];
    objective += clipped_objective(ratio, adv, clip);
    out.approx_kl += old_log_probs[static_cast<std::size_t>(i)] - lp;

    const bool in_range = ratio >= 1.0 - clip && ratio <= 1.0 + clip;
    const bool active = in_range || ratio * adv <= std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
    if (!in_range) ++clipped;
    const double dlogp = active ? -ratio * adv / static_cast<double>(b) : 0.0;
    g_mu.row(i) = (dlogp * diff * inv_var).matrix().transpose();
    out.log_std_grad += (dlogp * (diff.square() * inv_var - 1.0)).matrix();
  }
  out.log_std_grad -= Vector::Constant(a_dim, entropy_coef);
  out.loss = -objective / static_cast<double>(b) - entropy_coef * policy.entropy();
  out.approx_kl /= static_cast<double>(b);
  out.clip_fraction = static_cast<double>(clipped) / static_cast<double>(b);
  out.trunk_grad = policy.trunk().backward_cached(acts, g_mu).params;
  return out;
}

ValueLossResult value_loss(const ValueNet& value, const Matrix& obs, std::span<const double> returns,
                           double value_coef) {
  const Eigen::Index b = obs.rows();
  if (static_cast<Eigen::Index>(returns.size()) != b) throw ConfigError("ppo: returns length mismatch");
  std::vector<Matrix> acts;
  value.net().forward_cache(obs, acts);
  const Vector v = acts.back().col(0);
  Matrix g(b, 1);
  ValueLossResult out;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double err = v(i) - returns[static_cast<std::size_t>(i)];
    out.loss += err * err;
    g(i, 0) = 2.0 * value_coef * err / static_cast<double>(b);
  }
  out.loss *= value_coef / static_cast<double>(b);
  out.grad = value.net().backward_cached(acts, g).params;
  return out;
}

PpoStats ppo_update(PolicyNet& policy, ValueNet& value, const RolloutBuffer& buf, const GaeResult& gae,
                    const PpoConfig& config, Rng& rng) {
  const std::size_t n = buf.size();
  if (n == 0) return {};
  const std::size_t mb_count = static_cast<std::size_t>(std::max(1, config.minibatches));
  const std::size_t mb_size = std::max<std::size_t>(1, n / mb_count);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  PpoStats stats;
  std::size_t updates = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t mb = 0; mb < mb_count; ++mb) {
      const std::size_t begin = mb * mb_size;
      const std::size_t end = mb + 1 == mb_count ? n : begin + mb_size;
      if (begin >= end) continue;
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const Matrix obs = gather_rows(buf.observations, idx);
      const Matrix act = gather_rows(buf.actions, idx);
      const auto old_lp = gather(buf.log_probs, idx);
      const auto adv = gather(gae.normalized, idx);
      const auto ret = gather(gae.returns, idx);

      SurrogateResult s = surrogate_loss(policy, obs, act, old_lp, adv, config.clip, config.entropy_coef);
      ValueLossResult v = value_loss(value, obs, ret, config.value_coef);
      if (!std::isfinite(s.loss) || !std::isfinite(v.loss))
        throw DivergenceError("ppo: non-finite loss in epoch " + std::to_string(epoch));

      step_policy(policy, s.trunk_grad, s.log_std_grad, config.max_grad_norm);
      clip_grad_norm(v.grad, config.max_grad_norm);
      value.optimizer().step(value.net().parameters(), v.grad);

      stats.policy_loss += s.loss;
      stats.value_loss += v.loss;
      stats.approx_kl += s.approx_kl;
      stats.clip_fraction += s.clip_fraction;
      ++updates;
    }
  }
  if (updates > 0) {
    const double k = static_cast<double>(updates);
    stats.policy_loss /= k;
    stats.value_loss /= k;
    stats.approx_kl /= k;
    stats.clip_fraction /= k;
  }
  stats.entropy = policy.entropy();
  if (!all_finite(policy.trunk().parameters()) || !all_finite(value.net().parameters()))
    throw DivergenceError("ppo: non-finite parameters after update");
  return stats;
}

}  // namespace pasist
