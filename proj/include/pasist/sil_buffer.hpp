#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "pasist/trajectory.hpp"

namespace pasist {

struct SilEntry {
  ImitationFeatures features;
  PoseSequence poses;
  double a_value = 0.0;
};

// Per-skill store of the best trajectories found so far.
//
// Each skill keeps at most `capacity` entries and its own admission threshold
// epsilon, which starts at -inf and only ever rises: a trajectory is admitted
// iff its assessment value strictly exceeds the current threshold, which then
// becomes that value. At capacity the lowest-valued entry is evicted, so a
// populated skill never becomes empty again.
class SilBuffer {
 public:
  SilBuffer() = default;
  SilBuffer(int num_skills, std::size_t capacity);

  int num_skills() const { return static_cast<int>(slots_.size()); }
  std::size_t capacity() const { return capacity_; }

  bool maybe_insert(int skill, const ImitationFeatures& features, double a_value);

  // Stores an entry unconditionally and sets the threshold to a_value.
  void prefill(int skill, const ImitationFeatures& features, double a_value);

  // Uniform over populated skills, then entries, then transitions. Returns
  // nullopt when the buffer holds nothing.
  std::optional<Matrix> sample_transitions(std::size_t batch, Rng& rng) const;

  const std::vector<SilEntry>& entries(int skill) const;
  double threshold(int skill) const;
  bool empty() const;
  std::size_t total_entries() const;

  nlohmann::ordered_json to_json() const;
  static SilBuffer from_json(const nlohmann::json& doc);

 private:
  void check_skill(int skill) const;
  void store(int skill, const ImitationFeatures& features, double a_value);

  std::size_t capacity_ = 8;
  std::vector<std::vector<SilEntry>> slots_;
  std::vector<double> thresholds_;
};

// Inverse of transitions_from_poses.
PoseSequence poses_from_transitions(const ImitationFeatures& features);

}  // namespace pasist
