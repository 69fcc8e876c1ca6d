#include "pasist/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pasist/errors.hpp"

namespace pasist {

double sil_reward_from_score(double score) {
  const double d = score - 1.0;
  return std::max(0.0, 1.0 - 0.25 * d * d);
}

Discriminator::Discriminator(Mlp net, double gp_weight, AdamConfig optimizer)
    : net_(std::move(net)), gp_weight_(gp_weight), adam_(net_.parameter_count(), optimizer) {
  if (net_.output_size() != 1) throw ConfigError("discriminator: network must have a scalar output");
  if (!(gp_weight >= 0.0)) throw ConfigError("discriminator.gp_weight: must be >= 0");
}

Discriminator Discriminator::create(int input_dim, const DiscriminatorConfig& config, Rng& rng) {
  std::vector<int> sizes{input_dim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  return Discriminator(Mlp::random(sizes, rng), config.gp_weight, adam);
}

Discriminator::Loss Discriminator::loss(const Matrix& buffer_batch, const Matrix& policy_batch) const {
  if (buffer_batch.rows() == 0 || policy_batch.rows() == 0)
    throw InputError("discriminator: empty batch");
  const double nb = static_cast<double>(buffer_batch.rows());
  const double np = static_cast<double>(policy_batch.rows());

  Loss out;
  std::vector<Matrix> acts_buf, acts_pol;
  net_.forward_cache(buffer_batch, acts_buf);
  net_.forward_cache(policy_batch, acts_pol);
  const Matrix& d_buf = acts_buf.back();
  const Matrix& d_pol = acts_pol.back();
  out.buffer_term = (d_buf.array() - 1.0).square().sum() / nb;
  out.policy_term = (d_pol.array() + 1.0).square().sum() / np;

  const Matrix g_buf = 2.0 * (d_buf.array() - 1.0).matrix() / nb;
  const Matrix g_pol = 2.0 * (d_pol.array() + 1.0).matrix() / np;
  out.grad = net_.backward_cached(acts_buf, g_buf).params;
  const auto pol = net_.backward_cached(acts_pol, g_pol).params;
  for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += pol[i];

  out.penalty = net_.input_gradient_penalty(buffer_batch, gp_weight_ / nb, out.grad) / nb;
  out.total = out.buffer_term + out.policy_term + gp_weight_ * out.penalty;
  if (!std::isfinite(out.total)) throw DivergenceError("discriminator: non-finite loss");
  return out;
}

double Discriminator::score(const Vector& transition) const { return net_.forward(transition)(0); }

Vector Discriminator::scores(const Matrix& transitions) const { return net_.forward(transitions).col(0); }

double Discriminator::reward(const Vector& transition) const { return sil_reward_from_score(score(transition)); }

Vector Discriminator::rewards(const Matrix& transitions) const {
  return scores(transitions).unaryExpr([](double d) { return sil_reward_from_score(d); });
}

std::vector<double> Discriminator::update(const Matrix& buffer_batch, const Matrix& policy_batch, int epochs) {
  std::vector<double> losses;
  for (int e = 0; e < epochs; ++e) {
    Loss l = loss(buffer_batch, policy_batch);
    losses.push_back(l.total);
    adam_.step(net_.parameters(), l.grad);
    if (!all_finite(net_.parameters()))
      throw DivergenceError("discriminator: non-finite parameters after epoch " + std::to_string(e));
  }
  return losses;
}

}  // namespace pasist
