#include "pasist/numerics.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "pasist/errors.hpp"

namespace pasist {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ConfigError("mlp: need at least input and output sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) throw ConfigError("mlp: layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::random(std::vector<int> layer_sizes, Rng& rng, double output_gain) {
  Mlp net(std::move(layer_sizes));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto w = net.weight(l);
    double scale = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    if (l + 1 == net.num_layers()) scale *= output_gain;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = scale * normal(rng);
  }
  return net;
}

Eigen::Map<Matrix> Mlp::weight(std::size_t layer) {
  return {params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<const Matrix> Mlp::weight(std::size_t layer) const {
  return {params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<Vector> Mlp::bias(std::size_t layer) {
  return {params_.data() + offsets_[layer] + static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer],
          sizes_[layer + 1]};
}

Eigen::Map<const Vector> Mlp::bias(std::size_t layer) const {
  return {params_.data() + offsets_[layer] + static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer],
          sizes_[layer + 1]};
}

void Mlp::check_input(Eigen::Index cols) const {
  if (sizes_.empty()) throw ConfigError("mlp: network is uninitialised");
  if (cols != sizes_.front()) {
    std::ostringstream msg;
    msg << "mlp: input dimension " << cols << " does not match layer size " << sizes_.front();
    throw ConfigError(msg.str());
  }
}

namespace {

// tanh through the vectorized exponential; saturates cleanly for large |z|.
void activate(Matrix& z) { z = (1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0)).matrix(); }

}  // namespace

void Mlp::forward_cache(const Matrix& inputs, std::vector<Matrix>& activations) const {
  check_input(inputs.cols());
  const std::size_t n = num_layers();
  activations.resize(n + 1);
  activations[0] = inputs;
  for (std::size_t l = 0; l < n; ++l) {
    Matrix z = activations[l] * weight(l).transpose();
    z.rowwise() += bias(l).transpose();
    if (l + 1 < n) activate(z);
    activations[l + 1] = std::move(z);
  }
}

Matrix Mlp::forward(const Matrix& inputs) const {
  check_input(inputs.cols());
  Matrix h = inputs;
  const std::size_t n = num_layers();
  for (std::size_t l = 0; l < n; ++l) {
    Matrix z = h * weight(l).transpose();
    z.rowwise() += bias(l).transpose();
    if (l + 1 < n) activate(z);
    h = std::move(z);
  }
  return h;
}

Vector Mlp::forward(const Vector& input) const {
  check_input(input.size());
  Matrix row = input.transpose();
  return forward(row).row(0).transpose();
}

Mlp::Gradients Mlp::backward(const Matrix& inputs, const Matrix& output_grads) const {
  check_input(inputs.cols());
  if (output_grads.rows() != inputs.rows() || output_grads.cols() != output_size())
    throw ConfigError("mlp: output gradient shape does not match network output");

  std::vector<Matrix> acts;
  forward_cache(inputs, acts);
  return backward_cached(acts, output_grads);
}

Mlp::Gradients Mlp::backward_cached(const std::vector<Matrix>& acts, const Matrix& output_grads) const {
  if (acts.size() != num_layers() + 1 || output_grads.rows() != acts.front().rows() ||
      output_grads.cols() != output_size())
    throw ConfigError("mlp: cached activations do not match the gradient shape");
  Gradients out;
  out.params.assign(params_.size(), 0.0);
  Matrix dz = output_grads;
  for (std::size_t l = num_layers(); l-- > 0;) {
    Eigen::Map<Matrix> gw(out.params.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
    Eigen::Map<Vector> gb(out.params.data() + offsets_[l] + static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l],
                          sizes_[l + 1]);
    gw.noalias() = dz.transpose() * acts[l];
    gb = dz.colwise().sum().transpose();
    Matrix dh = dz * weight(l);
    if (l > 0) {
      dz = (dh.array() * (1.0 - acts[l].array().square())).matrix();
    } else {
      out.inputs = std::move(dh);
    }
  }
  return out;
}

Mlp::Gradients Mlp::backward(const Vector& input, const Vector& output_grad) const {
  Matrix x = input.transpose();
  Matrix g = output_grad.transpose();
  return backward(x, g);
}

double Mlp::input_gradient_penalty(const Matrix& inputs, double scale, std::span<double> grad) const {
  if (output_size() != 1) throw ConfigError("mlp: input-gradient penalty needs a scalar output");
  if (grad.size() != params_.size()) throw ConfigError("mlp: gradient buffer size mismatch");

  std::vector<Matrix> acts;
  forward_cache(inputs, acts);
  const std::size_t n = num_layers();
  const Eigen::Index batch = inputs.rows();

  // Reverse pass for the input gradient: a[l] = d out / d acts[l],
  // delta[l] = a[l] * tanh'(z_l). Index l refers to hidden layer activations.
  std::vector<Matrix> slope(n), a(n), delta(n);
  for (std::size_t l = 1; l < n; ++l) slope[l] = (1.0 - acts[l].array().square()).matrix();
  a[n - 1] = Matrix::Ones(batch, 1) * weight(n - 1);
  for (std::size_t l = n - 1; l >= 1; --l) {
    delta[l] = (a[l].array() * slope[l].array()).matrix();
    a[l - 1] = delta[l] * weight(l - 1);
  }
  const Matrix& g = a[0];
  const double penalty = g.squaredNorm();

  auto gw = [&](std::size_t l) {
    return Eigen::Map<Matrix>(grad.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
  };
  auto gb = [&](std::size_t l) {
    return Eigen::Map<Vector>(grad.data() + offsets_[l] + static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l],
                              sizes_[l + 1]);
  };

  // Adjoint of the input-gradient computation.
  Matrix a_bar = 2.0 * scale * g;
  std::vector<Matrix> h_bar(n);
  for (std::size_t l = 1; l < n; ++l) {
    // a[l-1] = delta[l] * W_{l-1}
    gw(l - 1).noalias() += delta[l].transpose() * a_bar;
    Matrix delta_bar = a_bar * weight(l - 1).transpose();
    Matrix slope_bar = (delta_bar.array() * a[l].array()).matrix();
    h_bar[l] = (-2.0 * acts[l].array() * slope_bar.array()).matrix();
    a_bar = (delta_bar.array() * slope[l].array()).matrix();
  }
  // a[n-1] = 1 * W_{n-1}
  gw(n - 1) += a_bar.colwise().sum();

  // Activations depend on parameters through the forward pass.
  if (n > 1) {
    Matrix hb = h_bar[n - 1];
    for (std::size_t l = n - 1; l >= 1; --l) {
      Matrix z_bar = (hb.array() * slope[l].array()).matrix();
      gw(l - 1).noalias() += z_bar.transpose() * acts[l - 1];
      gb(l - 1) += z_bar.colwise().sum().transpose();
      if (l > 1) hb = h_bar[l - 1] + z_bar * weight(l - 1);
    }
  }
  return penalty;
}

AdamState::AdamState(std::size_t parameter_count, AdamConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void AdamState::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ConfigError("adam: parameter/gradient size does not match optimizer state");
  if (!all_finite(grads)) throw DivergenceError("adam: non-finite gradient");

  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

void AdamState::restore(std::size_t steps, std::vector<double> m, std::vector<double> v) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw ConfigError("adam: restored moments do not match parameter count");
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

double clip_grad_norm(std::span<double> grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / (norm + 1e-12);
    for (double& g : grads) g *= s;
  }
  return norm;
}

bool all_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace pasist
