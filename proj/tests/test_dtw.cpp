#include <doctest.h>

#include "pasist/dtw.hpp"
#include "pasist/errors.hpp"
#include "support.hpp"

using namespace pasist;

namespace {

PoseSequence seq(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return PoseSequence(m);
}

}  // namespace

TEST_CASE("identical sequences have zero distance") {
  Rng rng(1);
  const PoseSequence a(testkit::random_matrix(7, 3, rng));
  CHECK(dtw_distance(a, a) == 0.0);
}

TEST_CASE("single frames reduce to the Euclidean distance") {
  CHECK(dtw_distance(seq({{0.0, 0.0}}), seq({{3.0, 4.0}})) == 5.0);
}

TEST_CASE("matches exhaustive path enumeration") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + uniform_index(rng, 6));
    const auto m = static_cast<Eigen::Index>(1 + uniform_index(rng, 6));
    const auto j = static_cast<Eigen::Index>(1 + uniform_index(rng, 3));
    const Matrix a = testkit::random_matrix(n, j, rng, 2.0);
    const Matrix b = testkit::random_matrix(m, j, rng, 2.0);
    CHECK(std::abs(dtw_distance(PoseSequence(a), PoseSequence(b)) - testkit::brute_force_dtw(a, b)) <= 1e-12);
  }
}

TEST_CASE("symmetric in its arguments") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const PoseSequence a(testkit::random_matrix(1 + static_cast<Eigen::Index>(uniform_index(rng, 9)), 2, rng));
    const PoseSequence b(testkit::random_matrix(1 + static_cast<Eigen::Index>(uniform_index(rng, 9)), 2, rng));
    CHECK(dtw_distance(a, b) == dtw_distance(b, a));
  }
}

TEST_CASE("zero only for identical sequences of equal length") {
  CHECK(dtw_distance(seq({{1.0}, {2.0}}), seq({{1.0}, {2.0}, {2.0}})) == 0.0);  // warping repeats a frame
  CHECK(dtw_distance(seq({{1.0}, {2.0}}), seq({{1.0}, {2.5}})) > 0.0);
}

TEST_CASE("scaling one frame's deviation never decreases the distance") {
  const Matrix base = (Matrix(3, 2) << 0.0, 0.0, 1.0, 0.0, 2.0, 0.0).finished();
  Matrix other = base;
  double prev = 0.0;
  for (double s : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    other(1, 1) = s;
    const double d = dtw_distance(PoseSequence(base), PoseSequence(other));
    CHECK(d >= prev);
    prev = d;
  }
}

TEST_CASE("length normalization divides by the longer sequence") {
  Rng rng(8);
  const PoseSequence a(testkit::random_matrix(4, 2, rng));
  const PoseSequence b(testkit::random_matrix(6, 2, rng));
  CHECK(dtw_distance(a, b, DtwNormalization::kLength) == doctest::Approx(dtw_distance(a, b) / 6.0).epsilon(1e-15));
  CHECK(dtw_distance(a, b, DtwNormalization::kNone) == dtw_distance(a, b));
}

TEST_CASE("input errors") {
  CHECK_THROWS_AS(PoseSequence(Matrix(0, 3)), InputError);
  CHECK_THROWS_AS(PoseSequence((Matrix(1, 1) << std::nan("")).finished()), InputError);
  CHECK_THROWS_AS(dtw_distance(seq({{1.0, 2.0}}), seq({{1.0}})), InputError);
  CHECK_THROWS_AS(dtw_distance(PoseSequence(), seq({{1.0}})), InputError);
}

TEST_CASE("expected distance over a set") {
  Rng rng(9);
  const Matrix t = testkit::random_matrix(3, 2, rng);
  const Matrix a = testkit::random_matrix(4, 2, rng);
  const Matrix b = testkit::random_matrix(5, 2, rng);
  const PoseSequence target(t);
  std::vector<PoseSequence> one{PoseSequence(a)};
  CHECK(expected_dtw(one, target) == dtw_distance(one[0], target));
  std::vector<PoseSequence> two{PoseSequence(a), PoseSequence(b)};
  const double oracle = (testkit::brute_force_dtw(a, t) + testkit::brute_force_dtw(b, t)) / 2.0;
  CHECK(expected_dtw(two, target) == doctest::Approx(oracle).epsilon(1e-13));
  std::vector<PoseSequence> same{target, target};
  CHECK(expected_dtw(same, target) == 0.0);
  CHECK_THROWS_AS(expected_dtw(std::vector<PoseSequence>{}, target), InputError);
}
