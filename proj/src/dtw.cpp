#include "pasist/dtw.hpp"

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "pasist/errors.hpp"

namespace pasist {

PoseSequence::PoseSequence(Matrix frames) : frames_(std::move(frames)) {
  if (frames_.rows() == 0 || frames_.cols() == 0) throw InputError("pose sequence: empty");
  if (!frames_.allFinite()) throw InputError("pose sequence: non-finite entry");
}

double dtw_distance(const PoseSequence& a, const PoseSequence& b) {
  if (a.size() == 0 || b.size() == 0) throw InputError("dtw: empty sequence");
  if (a.dim() != b.dim()) throw InputError("dtw: joint dimension mismatch");

  const Eigen::Index n = a.size();
  const Eigen::Index m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), curr(m + 1, inf);
  prev[0] = 0.0;
  const Matrix& fa = a.frames();
  const Matrix& fb = b.frames();
  for (Eigen::Index i = 1; i <= n; ++i) {
    curr[0] = inf;
    for (Eigen::Index j = 1; j <= m; ++j) {
      const double cost = (fa.row(i - 1) - fb.row(j - 1)).norm();
      curr[j] = cost + std::min({prev[j - 1], prev[j], curr[j - 1]});
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

double dtw_distance(const PoseSequence& a, const PoseSequence& b, DtwNormalization norm) {
  const double d = dtw_distance(a, b);
  if (norm == DtwNormalization::kLength) return d / static_cast<double>(std::max(a.size(), b.size()));
  return d;
}

double expected_dtw(std::span<const PoseSequence> trajectories, const PoseSequence& target,
                    DtwNormalization norm) {
  if (trajectories.empty()) throw InputError("expected_dtw: empty trajectory set");
  double sum = 0.0;
  for (const auto& t : trajectories) sum += dtw_distance(t, target, norm);
  return sum / static_cast<double>(trajectories.size());
}

}  // namespace pasist
