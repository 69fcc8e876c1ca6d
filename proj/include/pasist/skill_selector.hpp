#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include <json.hpp>

#include "pasist/rng.hpp"
#include "pasist/toy_env.hpp"

namespace pasist {

struct SelectorConfig {
  std::size_t window = 200;
  double delta = 0.05;
};

struct CommandRecord {
  int skill = 0;
  double mean_task_reward = 0.0;
};

// Sliding window of the most recent episodes' skill commands and rewards.
class CommandBuffer {
 public:
  CommandBuffer() = default;
  explicit CommandBuffer(std::size_t capacity);

  void record_episode(int skill, double mean_task_reward);

  // Mean reward over records with this skill; 0 when there are none.
  double average_reward(int skill) const;
  std::size_t count(int skill) const;

  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<CommandRecord>& records() const { return records_; }

  nlohmann::ordered_json to_json() const;
  static CommandBuffer from_json(const nlohmann::json& doc);

 private:
  std::size_t capacity_ = 200;
  std::deque<CommandRecord> records_;
};

// Per-skill average reward and its ratio to the optimal-state reward.
class SkillProgress {
 public:
  // Throws ConfigError if any optimal reward is not positive.
  SkillProgress(std::vector<double> average_rewards, std::vector<double> optimal_rewards);
  static SkillProgress from_buffer(const CommandBuffer& buffer, std::span<const double> optimal_rewards);

  int num_skills() const { return static_cast<int>(average_.size()); }
  double average_reward(int skill) const { return average_.at(static_cast<std::size_t>(skill)); }
  double optimal_reward(int skill) const { return optimal_.at(static_cast<std::size_t>(skill)); }

  // clamp(average / optimal, 0, 1)
  double progress(int skill) const;
  std::vector<double> progress() const;

 private:
  std::vector<double> average_;
  std::vector<double> optimal_;
};

// P(m) = (1 - p_m + delta) / sum_k (1 - p_k + delta)
std::vector<double> selection_probabilities(std::span<const double> progress, double delta);

int sample_skill(std::span<const double> probabilities, Rng& rng);

// Skill from the progress-weighted law, velocity uniform in [-0.5, 0.5].
Command sample_command(const SkillProgress& stats, double delta, Rng& rng);

// Skill uniform over all skills, velocity uniform in [-0.5, 0.5].
Command sample_uniform_command(int num_skills, Rng& rng);

}  // namespace pasist
