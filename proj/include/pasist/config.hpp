#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pasist/discriminator.hpp"
#include "pasist/ppo.hpp"
#include "pasist/skill_selector.hpp"
#include "pasist/toy_env.hpp"
#include "pasist/trajectory.hpp"

namespace pasist {

// Parses the subset of TOML used by experiment files: [section] and
// [dotted.section] headers, key = value pairs with strings, booleans,
// numbers and single-line arrays, and # comments. Throws ConfigError with the
// line number on malformed input.
nlohmann::json parse_toml(std::string_view text);
nlohmann::json parse_toml_file(const std::filesystem::path& path);

enum class Mode { kFull, kIlByTp, kNoDtw, kNoSelector };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);
inline constexpr Mode kAllModes[] = {Mode::kFull, Mode::kIlByTp, Mode::kNoDtw, Mode::kNoSelector};

struct EvalConfig {
  int episodes = 4;                // per skill
  int transition_episodes = 2;     // per ordered skill pair
  int transition_window = 100;     // steps allowed to reach the new skill
  double success_factor = 1.5;     // threshold = factor * training E[DTW] per frame
};

struct ExperimentConfig {
  std::filesystem::path config_path;
  std::filesystem::path target_poses_path;

  Mode mode = Mode::kFull;
  std::uint64_t seed = 7;
  int iterations = 300;
  int workers = 1;
  int checkpoint_every = 50;
  int final_window = 10;  // iterations averaged for "final" metrics

  EnvConfig env;
  PpoConfig ppo;
  DiscriminatorConfig discriminator;
  SelectorConfig selector;
  EvalConfig eval;

  std::size_t sil_capacity = 8;
  AssessmentRule assessment = AssessmentRule::kSubtractDtw;  // full/il-by-tp/no-selector
  DtwNormalization assessment_dtw = DtwNormalization::kNone;
  DtwNormalization weight_dtw = DtwNormalization::kNone;  // weights and J_DTW

  double sigma_sil = 5.0;
  double sigma_task = 0.8;

  std::vector<SkillSpec> skills;
  std::vector<TargetPose> targets;

  // Loads the TOML file and the target poses it references. Throws
  // ConfigError with a field-level message.
  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

  // Re-checks every field; call after applying overrides.
  void validate() const;

  // Resolved snapshot with a fixed key order.
  nlohmann::ordered_json to_json() const;

  // Rule actually used for buffer admission in the configured mode.
  AssessmentRule effective_assessment() const;

  int num_skills() const { return static_cast<int>(skills.size()); }
};

// Git-style blob hash (SHA-1 of "blob <len>\0<content>") of the canonical,
// key-sorted serialization, so it is independent of key order.
std::string config_hash(const nlohmann::json& resolved);

}  // namespace pasist
