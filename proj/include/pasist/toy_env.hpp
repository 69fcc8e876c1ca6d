#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "pasist/numerics.hpp"
#include "pasist/rng.hpp"

namespace pasist {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Kinematic analog of a legged robot: J joints driven by velocity commands,
// a base height fixed by the joint angles and a scalar balance proxy.
struct EnvConfig {
  int joints = 8;
  double dt = 0.02;
  double joint_limit = std::numbers::pi / 2.0;
  double action_limit = 4.0;
  double link_scale = 0.35;
  int episode_length = 200;
  double gait_frequency = 1.0;  // Hz, advances the phase clock
  double reset_fraction = 0.1;  // initial q ~ U(+-fraction * joint_limit)
  double tilt_limit = 0.5;
  double imbalance_gain = 0.1;

  bool randomize = true;
  Range damping{0.2, 2.0};
  Range inertia_offset{-0.5, 0.5};
  Range motor_gain{0.8, 1.2};
  double push_interval = 5.0;  // seconds; <= 0 disables pushes
  double push_velocity = 0.1;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct SkillSpec {
  std::string name;
  double base_height = 0.25;
  bool bipedal = false;
  double optimal_reward = 1.0;  // r^{T,m*}, used by the skill selector
};

// Velocity command plus one-hot skill command.
class Command {
 public:
  Command() = default;
  // Throws InputError if |velocity| > 0.5 or the skill index is out of range.
  Command(double velocity, int skill, int num_skills);

  double velocity() const { return velocity_; }
  int skill() const { return skill_; }
  int num_skills() const { return num_skills_; }
  Vector one_hot() const;

  static constexpr double kMaxVelocity = 0.5;

 private:
  double velocity_ = 0.0;
  int skill_ = 0;
  int num_skills_ = 1;
};

// Per-episode randomized dynamics parameters.
struct DomainParams {
  double motor_gain = 1.0;
  double damping = 1.0;
  double inertia_offset = 0.0;
  double push_sign = 1.0;
};

struct EnvState {
  Vector q;
  Vector qdot;
  double x = 0.0;
  double v = 0.0;
  double phase = 0.0;
  double tilt = 0.0;
  Vector prev_action;
  int step = 0;
  DomainParams params;
};

struct StepResult {
  EnvState state;
  double task_reward = 0.0;
  double reg_reward = 0.0;
  bool done = false;
  bool timeout = false;  // done because the episode length was reached
};

// h = (L / J) * sum_j cos(q_j)
double base_height(const Vector& q, double link_scale);

// Uniform-joint angle giving the requested base height.
double uniform_joint_angle(double height, double link_scale);

// Walk 0.25, crawl 0.10, stilt 0.30 and the bipedal skill at 0.05.
std::vector<SkillSpec> default_skills();

// Analytic target pose for a skill: every joint at the uniform angle for the
// skill's height, with alternating signs for bipedal skills so the front and
// rear halves balance.
Vector analytic_target_pose(const SkillSpec& skill, int joints, double link_scale);

class ToyEnv {
 public:
  ToyEnv(EnvConfig config, std::vector<SkillSpec> skills);

  const EnvConfig& config() const { return config_; }
  const std::vector<SkillSpec>& skills() const { return skills_; }
  int num_skills() const { return static_cast<int>(skills_.size()); }

  EnvState reset(Rng& rng) const;
  StepResult step(const EnvState& state, const Vector& action, const Command& cmd) const;

  double task_reward(const EnvState& state, const Command& cmd) const;
  static double reg_reward(const Vector& action, const Vector& prev_action);

  // Observation fed to policy and value networks.
  Vector observation(const EnvState& state, const Command& cmd) const;
  int observation_size() const;

  // Imbalance term driving the tilt: gain * (mean front q - mean rear q).
  double imbalance(const Vector& q) const;

  // Pose-dependent part of the task reward (height, plus the tilt bonus for
  // bipedal skills) when holding q still; its maximum is 0.5.
  double pose_term(const Vector& q, int skill) const;

 private:
  EnvConfig config_;
  std::vector<SkillSpec> skills_;
};

}  // namespace pasist
