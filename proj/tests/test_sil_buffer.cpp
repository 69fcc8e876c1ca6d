#include <doctest.h>

#include <cmath>
#include <limits>

#include "pasist/errors.hpp"
#include "pasist/sil_buffer.hpp"
#include "support.hpp"

using namespace pasist;

namespace {

ImitationFeatures features(double value, Eigen::Index rows = 3, Eigen::Index joints = 2) {
  return transitions_from_poses(PoseSequence(Matrix::Constant(rows + 1, joints, value)));
}

}  // namespace

TEST_CASE("fresh buffer admits any finite value") {
  SilBuffer buf(2, 4);
  CHECK(buf.threshold(0) == -std::numeric_limits<double>::infinity());
  CHECK(buf.maybe_insert(0, features(0.1), -1e9));
  CHECK(buf.threshold(0) == -1e9);
  CHECK(buf.threshold(1) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("values 1, 3, 2 give accept, accept, reject") {
  SilBuffer buf(1, 8);
  CHECK(buf.maybe_insert(0, features(0.0), 1.0));
  CHECK(buf.maybe_insert(0, features(0.0), 3.0));
  CHECK_FALSE(buf.maybe_insert(0, features(0.0), 2.0));
  CHECK(buf.threshold(0) == 3.0);
  CHECK(buf.entries(0).size() == 2);
}

TEST_CASE("a value equal to the threshold is rejected") {
  SilBuffer buf(1, 8);
  CHECK(buf.maybe_insert(0, features(0.0), 2.5));
  CHECK_FALSE(buf.maybe_insert(0, features(0.0), 2.5));
}

TEST_CASE("capacity evicts the lowest-valued entry") {
  SilBuffer buf(1, 3);
  for (int i = 1; i <= 5; ++i) CHECK(buf.maybe_insert(0, features(i), i));
  REQUIRE(buf.entries(0).size() == 3);
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& e : buf.entries(0)) lowest = std::min(lowest, e.a_value);
  CHECK(lowest == 3.0);
}

TEST_CASE("skills are isolated") {
  SilBuffer buf(3, 4);
  CHECK(buf.maybe_insert(1, features(0.2), 10.0));
  CHECK(buf.entries(0).empty());
  CHECK(buf.entries(2).empty());
  CHECK(buf.maybe_insert(0, features(0.3), 1.0));
  CHECK(buf.threshold(1) == 10.0);
  CHECK(buf.total_entries() == 2);
}

TEST_CASE("invalid skill and construction arguments") {
  SilBuffer buf(2, 4);
  CHECK_THROWS_AS(buf.maybe_insert(2, features(0.0), 1.0), InputError);
  CHECK_THROWS_AS(buf.maybe_insert(-1, features(0.0), 1.0), InputError);
  CHECK_THROWS_AS(buf.threshold(5), InputError);
  CHECK_THROWS_AS(SilBuffer(0, 4), ConfigError);
  CHECK_THROWS_AS(SilBuffer(2, 0), ConfigError);
}

TEST_CASE("sampling an empty buffer returns nothing") {
  SilBuffer buf(2, 4);
  Rng rng(1);
  CHECK_FALSE(buf.sample_transitions(16, rng).has_value());
}

TEST_CASE("sampling is uniform over populated skills") {
  SilBuffer buf(3, 4);
  buf.maybe_insert(0, features(0.0), 1.0);
  buf.maybe_insert(0, features(0.0), 2.0);
  buf.maybe_insert(2, features(1.0, 7), 1.0);
  Rng rng(42);
  const auto batch = buf.sample_transitions(1000, rng);
  REQUIRE(batch);
  CHECK(batch->rows() == 1000);
  CHECK(batch->cols() == 4);
  int from_two = 0;
  for (Eigen::Index i = 0; i < batch->rows(); ++i) from_two += (*batch)(i, 0) == 1.0 ? 1 : 0;
  // binomial(1000, 0.5): 3 sigma is about 47.4
  CHECK(std::abs(from_two - 500) <= 48);
}

TEST_CASE("prefill stores unconditionally and sets the threshold") {
  SilBuffer buf(1, 2);
  buf.prefill(0, features(0.5), 0.0);
  CHECK(buf.threshold(0) == 0.0);
  CHECK_FALSE(buf.maybe_insert(0, features(0.1), -1.0));
  CHECK(buf.maybe_insert(0, features(0.1), 0.5));
}

TEST_CASE("random insertion sequences keep every invariant") {
  Rng rng(2718);
  const std::size_t cap = 5;
  SilBuffer buf(4, cap);
  std::vector<double> eps(4, -std::numeric_limits<double>::infinity());
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const int skill = static_cast<int>(uniform_index(rng, 4));
    const double a = std::round(uniform(rng, -50.0, 50.0) + 0.02 * i);
    std::vector<std::size_t> before(4);
    for (int s = 0; s < 4; ++s) before[static_cast<std::size_t>(s)] = buf.entries(s).size();
    const bool accepted = buf.maybe_insert(skill, features(uniform(rng, -1.0, 1.0)), a);
    if (accepted != (a > eps[static_cast<std::size_t>(skill)])) ++violations;
    if (accepted) eps[static_cast<std::size_t>(skill)] = a;
    for (int s = 0; s < 4; ++s) {
      const auto us = static_cast<std::size_t>(s);
      if (buf.threshold(s) != eps[us]) ++violations;
      if (buf.entries(s).size() > cap) ++violations;
      if (s != skill && buf.entries(s).size() != before[us]) ++violations;
      for (const auto& e : buf.entries(s))
        if (e.a_value > buf.threshold(s)) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("json round trip preserves entries and thresholds") {
  Rng rng(3);
  SilBuffer buf(2, 3);
  buf.maybe_insert(0, transitions_from_poses(PoseSequence(testkit::random_matrix(5, 2, rng))), 1.25);
  buf.maybe_insert(1, transitions_from_poses(PoseSequence(testkit::random_matrix(4, 2, rng))), -3.5);
  const SilBuffer back = SilBuffer::from_json(nlohmann::json::parse(buf.to_json().dump()));
  CHECK(back.capacity() == 3);
  CHECK(back.threshold(0) == 1.25);
  CHECK(back.threshold(1) == -3.5);
  CHECK(back.entries(0)[0].features.transitions == buf.entries(0)[0].features.transitions);
  CHECK(back.entries(1)[0].poses == buf.entries(1)[0].poses);
  const SilBuffer empty = SilBuffer::from_json(nlohmann::json::parse(SilBuffer(2, 3).to_json().dump()));
  CHECK(empty.threshold(0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("poses are recovered from transitions") {
  Rng rng(6);
  const PoseSequence poses(testkit::random_matrix(6, 3, rng));
  CHECK(poses_from_transitions(transitions_from_poses(poses)) == poses);
}
