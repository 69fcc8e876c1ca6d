#pragma once

#include <optional>
#include <span>

#include "pasist/sil_buffer.hpp"

namespace pasist {

struct RewardWeights {
  double sil = 0.0;
  double task = 0.0;
  double reg = 1.0;
};

// Mean DTW between a skill's buffered pose sequences and its target pose
// (expanded to half of each sequence's length); nullopt if the skill has no
// entries.
std::optional<double> buffer_expected_dtw(const SilBuffer& buffer, const TargetPose& target,
                                          DtwNormalization norm = DtwNormalization::kNone);

// (1/N) exp(-sum_p |E_p - sigma|); a skill without entries contributes
// |0 - sigma|.
double omega_sil(std::span<const std::optional<double>> expected_dtw, double sigma_sil, int num_skills);
double omega_sil(const SilBuffer& buffer, std::span<const TargetPose> targets, double sigma_sil, int num_skills,
                 DtwNormalization norm = DtwNormalization::kNone);

// exp(-|r_task - sigma_task|)
double omega_task(double r_task, double sigma_task);

// w_sil * w_task * r_sil + (1 - w_task) * r_task + w_reg * r_reg
double total_reward(double r_sil, double r_task, double r_reg, const RewardWeights& w);

}  // namespace pasist
