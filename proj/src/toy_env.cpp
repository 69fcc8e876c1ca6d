#include "pasist/toy_env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pasist/errors.hpp"

namespace pasist {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHeightScale = 0.05;
constexpr double kVelocityScale = 0.2;
constexpr double kTiltScale = 0.1;

void require(bool ok, const char* field, const char* what) {
  if (!ok) {
    std::ostringstream msg;
    msg << "env." << field << ": " << what;
    throw ConfigError(msg.str());
  }
}

}  // namespace

void EnvConfig::validate() const {
  require(joints >= 2 && joints % 2 == 0, "joints", "must be an even count >= 2");
  require(dt > 0.0, "dt", "must be > 0");
  require(joint_limit > 0.0 && joint_limit <= std::numbers::pi / 2.0, "joint_limit", "must be in (0, pi/2]");
  require(action_limit > 0.0, "action_limit", "must be > 0");
  require(link_scale > 0.0, "link_scale", "must be > 0");
  require(episode_length >= 2, "episode_length", "must be >= 2");
  require(gait_frequency >= 0.0, "gait_frequency", "must be >= 0");
  require(reset_fraction >= 0.0 && reset_fraction <= 1.0, "reset_fraction", "must be in [0, 1]");
  require(tilt_limit > 0.0, "tilt_limit", "must be > 0");
  require(damping.lo <= damping.hi && damping.lo >= 0.0, "damping", "range must be ordered and >= 0");
  require(inertia_offset.lo <= inertia_offset.hi && inertia_offset.lo > -1.0, "inertia_offset",
          "range must be ordered and > -1");
  require(motor_gain.lo <= motor_gain.hi && motor_gain.lo > 0.0, "motor_gain", "range must be ordered and > 0");
  require(push_velocity >= 0.0, "push_velocity", "must be >= 0");
}

Command::Command(double velocity, int skill, int num_skills)
    : velocity_(velocity), skill_(skill), num_skills_(num_skills) {
  if (num_skills < 1 || skill < 0 || skill >= num_skills) throw InputError("command: skill index out of range");
  if (!(std::abs(velocity) <= kMaxVelocity)) throw InputError("command: |velocity| must be <= 0.5");
}

Vector Command::one_hot() const {
  Vector m = Vector::Zero(num_skills_);
  m(skill_) = 1.0;
  return m;
}

double base_height(const Vector& q, double link_scale) {
  return link_scale / static_cast<double>(q.size()) * q.array().cos().sum();
}

double uniform_joint_angle(double height, double link_scale) {
  return std::acos(std::clamp(height / link_scale, -1.0, 1.0));
}

std::vector<SkillSpec> default_skills() {
  return {{"walk", 0.25, false, 1.0}, {"crawl", 0.10, false, 1.0}, {"stilt", 0.30, false, 1.0}, {"bipedal", 0.05, true, 1.0}};
}

Vector analytic_target_pose(const SkillSpec& skill, int joints, double link_scale) {
  const double angle = uniform_joint_angle(skill.base_height, link_scale);
  Vector q = Vector::Constant(joints, angle);
  if (skill.bipedal)
    for (int j = 1; j < joints; j += 2) q(j) = -angle;
  return q;
}

ToyEnv::ToyEnv(EnvConfig config, std::vector<SkillSpec> skills)
    : config_(std::move(config)), skills_(std::move(skills)) {
  config_.validate();
  if (skills_.empty()) throw ConfigError("skills: at least one skill is required");
  for (const auto& s : skills_) {
    if (!(s.base_height >= 0.0 && s.base_height <= config_.link_scale))
      throw ConfigError("skills." + s.name + ".base_height: must lie in [0, link_scale]");
  }
}

EnvState ToyEnv::reset(Rng& rng) const {
  const int n = config_.joints;
  EnvState s;
  const double span = config_.reset_fraction * config_.joint_limit;
  s.q.resize(n);
  for (int j = 0; j < n; ++j) s.q(j) = span > 0.0 ? uniform(rng, -span, span) : 0.0;
  s.qdot = Vector::Zero(n);
  s.prev_action = Vector::Zero(n);
  s.phase = uniform(rng, 0.0, kTwoPi);
  if (config_.randomize) {
    s.params.damping = uniform(rng, config_.damping.lo, config_.damping.hi);
    s.params.inertia_offset = uniform(rng, config_.inertia_offset.lo, config_.inertia_offset.hi);
    s.params.motor_gain = uniform(rng, config_.motor_gain.lo, config_.motor_gain.hi);
    s.params.push_sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
  }
  return s;
}

double ToyEnv::imbalance(const Vector& q) const {
  const Eigen::Index half = q.size() / 2;
  return config_.imbalance_gain * (q.head(half).mean() - q.tail(q.size() - half).mean());
}

double ToyEnv::task_reward(const EnvState& s, const Command& cmd) const {
  const SkillSpec& skill = skills_.at(static_cast<std::size_t>(cmd.skill()));
  const double h = base_height(s.q, config_.link_scale);
  const double height = std::exp(-std::abs(h - skill.base_height) / kHeightScale);
  const double velocity = 0.5 * std::exp(-std::abs(s.v - cmd.velocity()) / kVelocityScale);
  if (skill.bipedal) {
    return 0.2 * height + 0.3 * std::exp(-std::abs(s.tilt) / kTiltScale) + velocity;
  }
  return 0.5 * height + velocity;
}

double ToyEnv::reg_reward(const Vector& action, const Vector& prev_action) {
  return -0.01 * action.squaredNorm() - 0.005 * (action - prev_action).squaredNorm();
}

StepResult ToyEnv::step(const EnvState& state, const Vector& action, const Command& cmd) const {
  const int n = config_.joints;
  if (action.size() != n) throw InputError("env.step: action dimension mismatch");
  if (cmd.num_skills() != num_skills()) throw InputError("env.step: command skill count mismatch");

  const double lim = config_.action_limit;
  const Vector a = action.cwiseMax(-lim).cwiseMin(lim);

  StepResult out;
  EnvState& s = out.state;
  s = state;
  s.qdot = (state.params.motor_gain * a).cwiseMax(-lim).cwiseMin(lim);
  s.q = (state.q + s.qdot * config_.dt).cwiseMax(-config_.joint_limit).cwiseMin(config_.joint_limit);
  s.v = (s.qdot.array() * s.q.array().sin()).mean();
  s.step = state.step + 1;
  if (config_.push_interval > 0.0 && config_.push_velocity > 0.0) {
    const int push_steps = std::max(1, static_cast<int>(std::lround(config_.push_interval / config_.dt)));
    if (s.step % push_steps == 0) s.v += state.params.push_sign * config_.push_velocity;
  }
  s.x = state.x + s.v * config_.dt;
  s.tilt = state.tilt * (1.0 - state.params.damping * config_.dt) +
           imbalance(s.q) * (1.0 + state.params.inertia_offset) * config_.dt;
  s.phase = std::fmod(state.phase + kTwoPi * config_.gait_frequency * config_.dt, kTwoPi);
  s.prev_action = a;

  out.task_reward = task_reward(s, cmd);
  out.reg_reward = reg_reward(a, state.prev_action);
  const bool fell = std::abs(s.tilt) > config_.tilt_limit;
  out.timeout = !fell && s.step >= config_.episode_length;
  out.done = fell || out.timeout;
  return out;
}

int ToyEnv::observation_size() const { return 2 * config_.joints + 4 + num_skills() + 1; }

Vector ToyEnv::observation(const EnvState& s, const Command& cmd) const {
  const int n = config_.joints;
  Vector obs(observation_size());
  obs.head(n) = s.q;
  obs.segment(n, n) = s.qdot / config_.action_limit;
  obs(2 * n) = s.v;
  obs(2 * n + 1) = s.tilt;
  obs(2 * n + 2) = std::sin(s.phase);
  obs(2 * n + 3) = std::cos(s.phase);
  obs.segment(2 * n + 4, num_skills()) = cmd.one_hot();
  obs(2 * n + 4 + num_skills()) = cmd.velocity();
  return obs;
}

double ToyEnv::pose_term(const Vector& q, int skill) const {
  const SkillSpec& spec = skills_.at(static_cast<std::size_t>(skill));
  const double h = base_height(q, config_.link_scale);
  const double height = std::exp(-std::abs(h - spec.base_height) / kHeightScale);
  if (!spec.bipedal) return 0.5 * height;
  // Held still with nominal dynamics (damping 1, no inertia offset) the tilt
  // settles at the imbalance itself.
  const double tilt = imbalance(q);
  return 0.2 * height + 0.3 * std::exp(-std::abs(tilt) / kTiltScale);
}

}  // namespace pasist
