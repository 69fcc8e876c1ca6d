#pragma once

#include <span>

#include "pasist/numerics.hpp"

namespace pasist {

// Ordered joint-position frames (radians), one frame per row.
class PoseSequence {
 public:
  PoseSequence() = default;
  // Throws InputError on an empty sequence, zero-width frames or non-finite
  // entries.
  explicit PoseSequence(Matrix frames);

  Eigen::Index size() const { return frames_.rows(); }
  Eigen::Index dim() const { return frames_.cols(); }
  const Matrix& frames() const { return frames_; }
  auto frame(Eigen::Index i) const { return frames_.row(i); }

  friend bool operator==(const PoseSequence& a, const PoseSequence& b) {
    return a.frames_.rows() == b.frames_.rows() && a.frames_.cols() == b.frames_.cols() &&
           a.frames_ == b.frames_;
  }

 private:
  Matrix frames_;
};

enum class DtwNormalization {
  kNone,    // cumulative cost along the optimal warping path
  kLength,  // cumulative cost divided by max(|a|, |b|)
};

// Unconstrained DTW with a Euclidean frame cost and steps {match, insert,
// delete}. Uses two rolling rows of the cost table.
double dtw_distance(const PoseSequence& a, const PoseSequence& b);

double dtw_distance(const PoseSequence& a, const PoseSequence& b, DtwNormalization norm);

// Mean of dtw_distance(t, target) over the set.
double expected_dtw(std::span<const PoseSequence> trajectories, const PoseSequence& target,
                    DtwNormalization norm = DtwNormalization::kNone);

}  // namespace pasist
