#include <doctest.h>

#include <cmath>
#include <optional>

#include "pasist/dtw.hpp"
#include "pasist/reward_shaper.hpp"
#include "support.hpp"

using namespace pasist;

TEST_CASE("omega_sil examples") {
  const std::vector<std::optional<double>> at_sigma{5.0, 5.0};
  CHECK(omega_sil(at_sigma, 5.0, 2) == 0.5);
  const std::vector<std::optional<double>> dev{6.0, 3.0};
  CHECK(omega_sil(dev, 5.0, 2) == doctest::Approx(0.5 * std::exp(-3.0)).epsilon(1e-15));
  const std::vector<std::optional<double>> missing{5.0, std::nullopt};
  CHECK(omega_sil(missing, 5.0, 2) == doctest::Approx(0.5 * std::exp(-5.0)).epsilon(1e-15));
}

TEST_CASE("omega_task examples") {
  CHECK(omega_task(0.8, 0.8) == 1.0);
  CHECK(omega_task(1.8, 0.8) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(omega_task(-1.2, 0.8) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
}

TEST_CASE("total reward examples") {
  CHECK(total_reward(1.0, 2.0, -0.1, {0.5, 0.5, 1.0}) == doctest::Approx(1.15).epsilon(1e-15));
  CHECK(total_reward(0.7, 0.9, -0.2, {0.3, 1.0, 1.0}) == doctest::Approx(0.3 * 0.7 - 0.2).epsilon(1e-15));
}

TEST_CASE("weights match recomputation on random inputs") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 4));
    const double sigma = uniform(rng, 0.1, 10.0);
    std::vector<std::optional<double>> e(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (auto& x : e) {
      x = uniform(rng, 0.0, 20.0);
      sum += std::abs(*x - sigma);
    }
    CHECK(std::abs(omega_sil(e, sigma, n) - std::exp(-sum) / n) <= 1e-12);
    const double rt = uniform(rng, -1.0, 2.0);
    const double st = uniform(rng, 0.1, 1.0);
    CHECK(std::abs(omega_task(rt, st) - std::exp(-std::abs(rt - st))) <= 1e-12);
    const RewardWeights w{uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0), 1.0};
    const double a = uniform(rng, 0.0, 1.0), b = uniform(rng, 0.0, 1.0), c = uniform(rng, -1.0, 0.0);
    CHECK(std::abs(total_reward(a, b, c, w) - (w.sil * w.task * a + (1.0 - w.task) * b + c)) <= 1e-12);
  }
}

TEST_CASE("buffered weights match recomputation from the distance oracle") {
  Rng rng(13);
  SilBuffer buf(2, 4);
  std::vector<TargetPose> targets(2);
  std::vector<double> expected(2, 0.0);
  for (int s = 0; s < 2; ++s) {
    targets[static_cast<std::size_t>(s)] = {s, "s", testkit::random_vector(2, rng)};
    for (int k = 0; k < 3; ++k) {
      const Matrix poses = testkit::random_matrix(6 + k, 2, rng);
      buf.maybe_insert(s, transitions_from_poses(PoseSequence(poses)), k);
      const Matrix target = targets[static_cast<std::size_t>(s)].pose.transpose().replicate((6 + k) / 2, 1);
      expected[static_cast<std::size_t>(s)] += testkit::brute_force_dtw(poses, target) / 3.0;
    }
  }
  for (int s = 0; s < 2; ++s)
    CHECK(*buffer_expected_dtw(buf, targets[static_cast<std::size_t>(s)]) ==
          doctest::Approx(expected[static_cast<std::size_t>(s)]).epsilon(1e-12));
  const double sigma = 1.5;
  const double oracle = 0.5 * std::exp(-(std::abs(expected[0] - sigma) + std::abs(expected[1] - sigma)));
  CHECK(omega_sil(buf, targets, sigma, 2) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK_FALSE(buffer_expected_dtw(SilBuffer(2, 4), targets[0]).has_value());
}
