#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pasist/dtw.hpp"
#include "pasist/toy_env.hpp"

namespace pasist {

// One completed (or truncated) episode.
struct Trajectory {
  int skill = 0;
  std::vector<EnvState> states;        // |actions| + 1 entries
  std::vector<Vector> actions;
  std::vector<double> task_rewards;    // r^T per step
  std::vector<double> reg_rewards;     // r^R per step
  bool terminated = false;

  // Throws InputError if the length invariants or skill id are violated.
  void validate(int num_skills) const;
  double total_task_reward() const;
  double mean_task_reward() const;
};

struct TargetPose {
  int skill = 0;
  std::string name;
  Vector pose;
};

// Concatenated joint-position pairs (q_{t-1}, q_t), one transition per row.
struct ImitationFeatures {
  Matrix transitions;
  Eigen::Index size() const { return transitions.rows(); }
};

struct FeatureMapResult {
  ImitationFeatures features;
  PoseSequence poses;
};

PoseSequence pose_sequence(const Trajectory& traj);
ImitationFeatures transitions_from_poses(const PoseSequence& poses);

// Throws InputError for fewer than two states.
FeatureMapResult feature_map(const Trajectory& traj);

// The pose repeated floor(traj_len / 2) times. Throws InputError if
// traj_len < 2.
PoseSequence expand_target_pose(const TargetPose& target, Eigen::Index traj_len);

enum class AssessmentRule {
  kSubtractDtw,     // A = sum r^T - DTW (higher is better)
  kAddDtw,          // A = sum r^T + DTW, the literal additive form
  kTaskRewardOnly,  // A = sum r^T
};

struct Assessment {
  double value = 0.0;
  double task_return = 0.0;
  double dtw = 0.0;
};

// DTW is taken between the trajectory's pose sequence and the target pose
// expanded to half its length. Throws InputError on a skill mismatch.
Assessment assess(const Trajectory& traj, const TargetPose& target,
                  AssessmentRule rule = AssessmentRule::kSubtractDtw,
                  DtwNormalization norm = DtwNormalization::kNone);

// DTW of a pose sequence against the target expanded to half its length.
double dtw_to_target(const PoseSequence& poses, const TargetPose& target,
                     DtwNormalization norm = DtwNormalization::kNone);

// Target-pose file: JSON array of {"skill": name, "id": int, "pose": [..]}.
// Validates one pose per skill, contiguous ids and the joint dimension.
std::vector<TargetPose> parse_target_poses(const nlohmann::json& doc, int joints);
std::vector<TargetPose> load_target_poses(const std::filesystem::path& path, int joints);
nlohmann::ordered_json target_poses_to_json(const std::vector<TargetPose>& poses);

// CSV trace: step, q_0..q_{J-1}, a_0..a_{J-1}, r_task, r_reg. Row 0 holds the
// initial state with empty action and reward cells.
void write_trace_csv(const std::filesystem::path& path, const Trajectory& traj);
PoseSequence read_trace_poses(const std::filesystem::path& path);

}  // namespace pasist
