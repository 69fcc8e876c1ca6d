#pragma once

#include <vector>

#include "pasist/numerics.hpp"

namespace pasist {

struct DiscriminatorConfig {
  std::vector<int> hidden{64, 64};
  double gp_weight = 10.0;
  double learning_rate = 1e-4;
  std::size_t batch_size = 256;
  int epochs = 5;
};

// r = max(0, 1 - 0.25 (d - 1)^2) for a discriminator score d.
double sil_reward_from_score(double score);

// Least-squares discriminator over joint-position transitions: pushes buffer
// samples toward +1 and policy samples toward -1, with a squared
// input-gradient penalty on buffer samples.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(Mlp net, double gp_weight, AdamConfig optimizer);
  static Discriminator create(int input_dim, const DiscriminatorConfig& config, Rng& rng);

  struct Loss {
    double total = 0.0;
    double buffer_term = 0.0;
    double policy_term = 0.0;
    double penalty = 0.0;  // mean squared input-gradient norm, unweighted
    ParamBuffer grad;
  };

  // Throws DivergenceError if the loss is not finite.
  Loss loss(const Matrix& buffer_batch, const Matrix& policy_batch) const;

  double score(const Vector& transition) const;
  Vector scores(const Matrix& transitions) const;
  double reward(const Vector& transition) const;
  Vector rewards(const Matrix& transitions) const;

  // Applies `epochs` optimizer steps on the loss of these batches and
  // returns the loss measured before each step.
  std::vector<double> update(const Matrix& buffer_batch, const Matrix& policy_batch, int epochs);

  double gp_weight() const { return gp_weight_; }
  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  const AdamState& optimizer() const { return adam_; }
  AdamState& optimizer() { return adam_; }

 private:
  Mlp net_;
  double gp_weight_ = 10.0;
  AdamState adam_;
};

}  // namespace pasist
