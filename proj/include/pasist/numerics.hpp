#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "pasist/rng.hpp"

namespace pasist {

// Row-major dense matrix; batched data is laid out one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Flat parameter storage. A fixed base alignment keeps vectorized reductions
// over mapped layers independent of where the buffer was allocated.
using ParamBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

// Feed-forward network with tanh hidden layers and an identity output layer.
//
// All parameters live in one contiguous buffer so optimizers and gradient
// checks can treat them as a flat vector. Per layer the buffer holds the
// weight matrix (out x in, row-major) followed by the bias (out).
class Mlp {
 public:
  Mlp() = default;

  // Zero weights and biases.
  explicit Mlp(std::vector<int> layer_sizes);

  // Gaussian weights with variance 1/fan_in, zero biases. The last layer's
  // weights are additionally scaled by output_gain.
  static Mlp random(std::vector<int> layer_sizes, Rng& rng, double output_gain = 1.0);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return sizes_.size() - 1; }

  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  Eigen::Map<Matrix> weight(std::size_t layer);
  Eigen::Map<const Matrix> weight(std::size_t layer) const;
  Eigen::Map<Vector> bias(std::size_t layer);
  Eigen::Map<const Vector> bias(std::size_t layer) const;

  Vector forward(const Vector& input) const;
  Matrix forward(const Matrix& inputs) const;

  struct Gradients {
    ParamBuffer params;  // same layout as parameters()
    Matrix inputs;               // d/d input, one row per sample
  };

  // Gradients of sum_b <output_grads.row(b), f(inputs.row(b))>.
  Gradients backward(const Matrix& inputs, const Matrix& output_grads) const;
  Gradients backward(const Vector& input, const Vector& output_grad) const;

  // activations[0] = inputs, activations[l] = output of layer l.
  void forward_cache(const Matrix& inputs, std::vector<Matrix>& activations) const;
  // Backward pass reusing activations from forward_cache.
  Gradients backward_cached(const std::vector<Matrix>& activations, const Matrix& output_grads) const;

  // For scalar-output networks: returns sum_b ||d f(x_b) / d x_b||^2 and adds
  // scale times its parameter gradient into `grad` (exact double backprop).
  double input_gradient_penalty(const Matrix& inputs, double scale, std::span<double> grad) const;

 private:
  void check_input(Eigen::Index cols) const;

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  ParamBuffer params_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected adaptive-moment optimizer over a flat parameter vector.
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::size_t parameter_count, AdamConfig config);

  // Throws DivergenceError (and leaves state untouched) if any gradient is
  // non-finite.
  void step(std::span<double> params, std::span<const double> grads);

  const AdamConfig& config() const { return config_; }
  std::size_t step_count() const { return steps_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

  void restore(std::size_t steps, std::vector<double> m, std::vector<double> v);

 private:
  AdamConfig config_;
  std::size_t steps_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// Rescales grads in place so their L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(std::span<double> grads, double max_norm);

bool all_finite(std::span<const double> values);

}  // namespace pasist
