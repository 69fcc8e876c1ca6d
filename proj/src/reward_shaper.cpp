#include "pasist/reward_shaper.hpp"

#include <cmath>

#include "pasist/errors.hpp"

namespace pasist {

std::optional<double> buffer_expected_dtw(const SilBuffer& buffer, const TargetPose& target, DtwNormalization norm) {
  const auto& entries = buffer.entries(target.skill);
  if (entries.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& e : entries) sum += dtw_to_target(e.poses, target, norm);
  return sum / static_cast<double>(entries.size());
}

double omega_sil(std::span<const std::optional<double>> expected_dtw, double sigma_sil, int num_skills) {
  if (num_skills < 1) throw ConfigError("rewards: num_skills must be >= 1");
  double deviation = 0.0;
  for (const auto& e : expected_dtw) deviation += std::abs(e.value_or(0.0) - sigma_sil);
  return std::exp(-deviation) / static_cast<double>(num_skills);
}

double omega_sil(const SilBuffer& buffer, std::span<const TargetPose> targets, double sigma_sil, int num_skills,
                 DtwNormalization norm) {
  std::vector<std::optional<double>> expected;
  for (const auto& t : targets) expected.push_back(buffer_expected_dtw(buffer, t, norm));
  return omega_sil(expected, sigma_sil, num_skills);
}

double omega_task(double r_task, double sigma_task) { return std::exp(-std::abs(r_task - sigma_task)); }

double total_reward(double r_sil, double r_task, double r_reg, const RewardWeights& w) {
  return w.sil * w.task * r_sil + (1.0 - w.task) * r_task + w.reg * r_reg;
}

}  // namespace pasist
