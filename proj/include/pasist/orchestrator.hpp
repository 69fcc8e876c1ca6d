#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "pasist/config.hpp"
#include "pasist/discriminator.hpp"
#include "pasist/ppo.hpp"
#include "pasist/reward_shaper.hpp"
#include "pasist/sil_buffer.hpp"
#include "pasist/skill_selector.hpp"
#include "pasist/toy_env.hpp"

namespace pasist {

struct MetricsRecord {
  int iteration = 0;                  // 1-based
  double total_reward = 0.0;          // mean per-step blended reward
  double task_reward = 0.0;           // mean per-step r^T over the rollout
  double sil_reward = 0.0;            // mean per-step r^SIL over the rollout
  double omega_sil = 0.0;             // weights used during this iteration's rollout
  double omega_task = 0.0;
  double next_omega_sil = 0.0;        // weights recomputed for the next iteration
  double next_omega_task = 0.0;
  std::vector<double> skill_task_reward;             // command-buffer averages
  std::vector<std::optional<double>> expected_dtw;   // completed episodes this iteration
  std::vector<std::optional<double>> j_dtw;          // from the SIL buffer
  std::vector<double> epsilon;                       // -inf while a skill is empty
  std::vector<double> selection_probabilities;
  std::vector<int> episodes;                         // completed per skill
  std::vector<int> admitted;                         // buffer admissions per skill
  std::size_t buffer_entries = 0;
  bool discriminator_updated = false;
  std::optional<double> discriminator_loss;
  PpoStats ppo;
  double log_std_mean = 0.0;

  nlohmann::ordered_json to_json(const std::vector<SkillSpec>& skills) const;
};

// exp(-max(|E - sigma|, 0) / 10).
double j_dtw_from_expected(double expected_dtw, double sigma_sil);

// nullopt while the skill has no buffer entries.
std::optional<double> j_dtw(const SilBuffer& buffer, const TargetPose& target, double sigma_sil,
                            DtwNormalization norm = DtwNormalization::kNone);

// Target pose repeated for half an episode, as the il-by-tp buffer entry.
ImitationFeatures duplicated_target_features(const TargetPose& target, int episode_length);

// Full training loop state: networks, optimizers, SIL buffer, command buffer
// and reward weights. Every iteration derives its random streams from the
// root seed and the iteration index, so a checkpoint needs no RNG state.
class Trainer {
 public:
  explicit Trainer(ExperimentConfig config);

  MetricsRecord train_iteration();

  int iteration() const { return iteration_; }
  const ExperimentConfig& config() const { return config_; }
  const ToyEnv& env() const { return env_; }
  const PolicyNet& policy() const { return policy_; }
  const ValueNet& value() const { return value_; }
  const Discriminator& discriminator() const { return disc_; }
  const SilBuffer& buffer() const { return buffer_; }
  const CommandBuffer& commands() const { return commands_; }
  const RewardWeights& weights() const { return weights_; }
  bool discriminator_ready() const { return disc_ready_; }

  // Latest per-frame (length-normalized) rollout DTW per skill.
  const std::vector<std::optional<double>>& reference_dtw() const { return reference_dtw_; }

  nlohmann::ordered_json checkpoint() const;
  // Throws ConfigError if network shapes disagree with the config.
  static Trainer from_checkpoint(ExperimentConfig config, const nlohmann::json& doc);

 private:
  struct Rollout;
  Rollout collect(const std::vector<double>& skill_probs);

  ExperimentConfig config_;
  ToyEnv env_;
  int iteration_ = 0;
  PolicyNet policy_;
  ValueNet value_;
  Discriminator disc_;
  bool disc_ready_ = false;
  SilBuffer buffer_;
  CommandBuffer commands_;
  RewardWeights weights_;
  bool admissions_enabled_ = true;
  std::vector<std::optional<double>> reference_dtw_;
};

struct TransitionResult {
  int from = 0;
  int to = 0;
  int switch_step = 0;
  double post_switch_dtw = 0.0;  // per frame
  double threshold = 0.0;
  bool success = false;
};

struct EvalReport {
  std::vector<double> expected_dtw;           // per skill, raw
  std::vector<double> expected_dtw_per_frame;
  std::vector<double> task_reward;            // mean per-step r^T per skill
  std::vector<TransitionResult> transitions;
  double transition_success_rate = 0.0;
  std::vector<std::vector<double>> dtw_matrix;  // cross-skill, representative rollouts
  nlohmann::ordered_json to_json(const std::vector<SkillSpec>& skills) const;
};

// Runs deterministic (mean-action) evaluation episodes. The reference values
// set per skill transition thresholds; skills without one fall back to this
// evaluation's own per-frame DTW. If trace_dir is given, writes one trace CSV
// per skill holding the representative rollout used for the matrix.
EvalReport evaluate(const PolicyNet& policy, const ExperimentConfig& config,
                    std::span<const std::optional<double>> reference_dtw, int episodes,
                    const std::optional<std::filesystem::path>& trace_dir = std::nullopt);

// N x N DTW matrix over pose sequences.
std::vector<std::vector<double>> dtw_matrix(std::span<const PoseSequence> sequences);

// Trace file name for a skill: "<id>_<name>.csv".
std::string trace_file_name(int skill, const std::string& name);

}  // namespace pasist
