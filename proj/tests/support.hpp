#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "pasist/config.hpp"
#include "pasist/numerics.hpp"
#include "pasist/rng.hpp"
#include "pasist/trajectory.hpp"

namespace testkit {

using pasist::Matrix;
using pasist::Rng;
using pasist::Vector;

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = pasist::uniform(rng, -scale, scale);
  return m;
}

inline Vector random_vector(Eigen::Index n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = pasist::uniform(rng, -scale, scale);
  return v;
}

// Minimum path cost by explicit enumeration of every monotone alignment path
// from (0, 0) to (n-1, m-1); costs are summed from the start of the path.
inline double brute_force_dtw(const Matrix& a, const Matrix& b) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(Eigen::Index, Eigen::Index, double)> walk = [&](Eigen::Index i, Eigen::Index j, double acc) {
    acc += (a.row(i) - b.row(j)).norm();
    if (i == a.rows() - 1 && j == b.rows() - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < a.rows() && j + 1 < b.rows()) walk(i + 1, j + 1, acc);
    if (i + 1 < a.rows()) walk(i + 1, j, acc);
    if (j + 1 < b.rows()) walk(i, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

// Central differences of f with respect to every entry of params.
inline std::vector<double> central_differences(std::span<double> params, const std::function<double()>& f,
                                               double h = 1e-5) {
  std::vector<double> g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = f();
    params[i] = keep - h;
    const double down = f();
    params[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// ||a - b|| / max(||a||, ||b||, tiny).
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

// Trajectory with the given joint positions, zero actions and given rewards.
inline pasist::Trajectory make_trajectory(int skill, const Matrix& poses, const std::vector<double>& rewards) {
  pasist::Trajectory t;
  t.skill = skill;
  for (Eigen::Index i = 0; i < poses.rows(); ++i) {
    pasist::EnvState s;
    s.q = poses.row(i).transpose();
    s.qdot = Vector::Zero(poses.cols());
    s.prev_action = Vector::Zero(poses.cols());
    s.step = static_cast<int>(i);
    t.states.push_back(s);
  }
  for (Eigen::Index i = 0; i + 1 < poses.rows(); ++i) {
    t.actions.push_back(Vector::Zero(poses.cols()));
    t.task_rewards.push_back(rewards.at(static_cast<std::size_t>(i)));
    t.reg_rewards.push_back(0.0);
  }
  return t;
}

// Tiny experiment that trains in well under a second per iteration.
inline pasist::ExperimentConfig small_config(int num_skills = 2, pasist::Mode mode = pasist::Mode::kFull) {
  pasist::ExperimentConfig cfg;
  cfg.mode = mode;
  cfg.seed = 5;
  cfg.iterations = 3;
  cfg.env.joints = 4;
  cfg.env.episode_length = 16;
  cfg.ppo.num_envs = 4;
  cfg.ppo.horizon = 24;
  cfg.ppo.policy_hidden = {8};
  cfg.ppo.value_hidden = {8};
  cfg.discriminator.hidden = {8};
  cfg.discriminator.batch_size = 16;
  cfg.discriminator.epochs = 2;
  cfg.selector.window = 20;
  cfg.eval.episodes = 2;
  cfg.eval.transition_episodes = 1;
  cfg.eval.transition_window = 8;
  const auto all = pasist::default_skills();
  const int picks[] = {0, 3, 1, 2};
  for (int i = 0; i < num_skills; ++i) {
    cfg.skills.push_back(all[static_cast<std::size_t>(picks[i])]);
    cfg.targets.push_back({i, cfg.skills.back().name,
                           pasist::analytic_target_pose(cfg.skills.back(), cfg.env.joints, cfg.env.link_scale)});
  }
  cfg.sigma_task = 0.8;
  return cfg;
}

}  // namespace testkit
