#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "prl/error.hpp"
#include "prl/uncertainty.hpp"

using namespace prl;

namespace {

std::vector<double> random_scores(std::size_t n, Rng& rng, bool with_ties) {
  std::vector<double> s(n);
  for (double& v : s) v = with_ties ? static_cast<double>(rng.below(8)) : rng.normal();
  return s;
}

std::vector<CalibrationSample> block(double conf, std::size_t n, std::size_t correct) {
  std::vector<CalibrationSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({conf, i < correct});
  return out;
}

// Logits z with labels drawn from softmax(z): calibrated by construction.
std::pair<Tensor, std::vector<std::uint16_t>> calibrated(std::size_t n, std::size_t k, double scale,
                                                         Rng& rng) {
  Tensor z = Tensor::matrix(n, k);
  for (double& v : z.values()) v = scale * rng.normal();
  const Tensor p = softmax(z);
  std::vector<std::uint16_t> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    double u = rng.uniform(), acc = 0;
    std::size_t c = 0;
    for (; c + 1 < k; ++c) {
      acc += p(r, c);
      if (u < acc) break;
    }
    y[r] = static_cast<std::uint16_t>(c);
  }
  return {z, y};
}

}  // namespace

TEST(Msp, Examples) {
  Tensor uniform = Tensor::matrix(1, 10, 0.0);
  EXPECT_NEAR(msp_scores(uniform)[0], -0.1, 1e-15);
  Tensor onehot = Tensor::matrix(1, 10, -1000.0);
  onehot(0, 4) = 0.0;
  EXPECT_EQ(msp_scores(onehot)[0], -1.0);
  Rng rng(1);
  Tensor z = Tensor::matrix(50, 5);
  for (double& v : z.values()) v = rng.normal();
  const Tensor p = softmax(z);
  const auto s = msp_scores(z);
  for (std::size_t a = 0; a < 50; ++a) {
    for (std::size_t b = 0; b < 50; ++b) {
      const double ma = *std::max_element(p.row(a).begin(), p.row(a).end());
      const double mb = *std::max_element(p.row(b).begin(), p.row(b).end());
      if (ma > mb) EXPECT_LT(s[a], s[b]);
    }
  }
}

TEST(Auroc, Examples) {
  const double a[] = {0.1, 0.2}, b[] = {0.3, 0.4};
  EXPECT_EQ(auroc(a, b), 1.0);
  const double t[] = {0.5};
  EXPECT_EQ(auroc(t, t), 0.5);
  const double c[] = {0.1, 0.6}, d[] = {0.4, 0.7};
  EXPECT_EQ(auroc(c, d), 0.75);
  EXPECT_THROW(auroc(std::span<const double>(), d), NumericError);
}

TEST(Auroc, EqualsBruteForceExactly) {
  Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const auto in = random_scores(1 + rng.below(100), rng, t % 2);
    const auto out = random_scores(1 + rng.below(100), rng, t % 2);
    EXPECT_EQ(auroc(in, out), oracle::brute_auroc(in, out));
  }
}

TEST(Auroc, SwapComplementsAndMonotoneInvariance) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto in = random_scores(1 + rng.below(50), rng, false);
    const auto out = random_scores(1 + rng.below(50), rng, false);
    EXPECT_NEAR(auroc(in, out) + auroc(out, in), 1.0, 1e-15);
    auto f = [](std::vector<double> v) {
      for (double& x : v) x = std::exp(0.5 * x) + 3.0;
      return v;
    };
    EXPECT_EQ(auroc(f(in), f(out)), auroc(in, out));
    EXPECT_EQ(aupr(f(in), f(out)), aupr(in, out));
  }
}

TEST(Aupr, Examples) {
  const double a[] = {0.1, 0.2}, b[] = {0.3, 0.4};
  EXPECT_EQ(aupr(a, b), 1.0);
  const double in[] = {0.8}, out[] = {0.2};
  EXPECT_EQ(aupr(in, out), 0.5);
  const double same_in[] = {1, 1, 1}, same_out[] = {1};
  EXPECT_EQ(aupr(same_in, same_out), 0.25);
  EXPECT_THROW(aupr(in, std::span<const double>()), NumericError);
}

TEST(Aupr, MatchesThresholdEnumeration) {
  Rng rng(4);
  for (int t = 0; t < 300; ++t) {
    const auto in = random_scores(rng.below(100), rng, t % 2);
    const auto out = random_scores(1 + rng.below(100), rng, t % 2);
    EXPECT_NEAR(aupr(in, out), oracle::threshold_aupr(in, out), 1e-12);
  }
}

TEST(Calibration, Examples) {
  EXPECT_EQ(rms_calibration_error(block(1.0, 50, 50)), 0.0);
  EXPECT_EQ(rms_calibration_error(block(0.7, 100, 70), 100), 0.0);
  EXPECT_EQ(mad_calibration_error(block(0.7, 100, 70), 100), 0.0);
}

TEST(Calibration, TwoBinExample) {
  auto s = block(0.9, 100, 100);
  const auto lower = block(0.6, 100, 50);
  s.insert(s.end(), lower.begin(), lower.end());
  const double g1 = 0.9 - 1.0, g2 = 0.6 - 0.5;
  EXPECT_EQ(rms_calibration_error(s, 100), std::sqrt(0.5 * g1 * g1 + 0.5 * g2 * g2));
  EXPECT_EQ(mad_calibration_error(s, 100), 0.5 * std::abs(g1) + 0.5 * std::abs(g2));
  EXPECT_NEAR(rms_calibration_error(s, 100), 0.1, 1e-15);
  EXPECT_NEAR(mad_calibration_error(s, 100), 0.1, 1e-15);
}

TEST(Calibration, TwoBinExampleExactlyPointOne) {
  // Bins (confidence 0.1, accuracy 0) and (0.15, 0.25): both gaps are 0.1 and
  // the double arithmetic lands on 0.1 exactly.
  auto s = block(0.1, 4, 0);
  const auto upper = block(0.15, 4, 1);
  s.insert(s.end(), upper.begin(), upper.end());
  EXPECT_EQ(rms_calibration_error(s, 4), 0.1);
  EXPECT_EQ(mad_calibration_error(s, 4), 0.1);
}

TEST(Calibration, PerfectlyCalibratedStreamConverges) {
  Rng rng(5);
  std::vector<CalibrationSample> s;
  for (int i = 0; i < 100000; ++i) {
    const double c = rng.uniform(0.1, 1.0);
    s.push_back({c, rng.bernoulli(c)});
  }
  // Per-bin accuracy noise is about sqrt(0.25 / bin_size), so bins must grow
  // with n for the error to vanish; 100-sample bins plateau near 0.035.
  EXPECT_LE(mad_calibration_error(s, 2000), 0.02);
  EXPECT_LE(rms_calibration_error(s, 2000), 0.02);
}

TEST(Calibration, MadAtMostRmsAndPermutationInvariant) {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    std::vector<CalibrationSample> s(1 + rng.below(400));
    for (auto& x : s) x = {std::round(rng.uniform() * 20) / 20, rng.bernoulli(0.6)};
    const std::size_t bin = 1 + rng.below(60);
    const double rms = rms_calibration_error(s, bin), mad = mad_calibration_error(s, bin);
    EXPECT_LE(mad, rms + 1e-15);
    auto shuffled = s;
    rng.shuffle(std::span<CalibrationSample>(shuffled));
    EXPECT_EQ(rms_calibration_error(shuffled, bin), rms);
    EXPECT_EQ(mad_calibration_error(shuffled, bin), mad);
  }
}

TEST(Temperature, CalibratedLogitsGiveOne) {
  Rng rng(7);
  auto [z, y] = calibrated(20000, 5, 2.0, rng);
  const Temperature t = temperature_tune(z, y);
  EXPECT_FALSE(t.degenerate);
  EXPECT_NEAR(t.t, 1.0, 1e-2 * 3);
}

TEST(Temperature, ScaledLogitsRecoverScale) {
  Rng rng(8);
  auto [z, y] = calibrated(20000, 5, 2.0, rng);
  for (double& v : z.values()) v *= 3.0;
  EXPECT_NEAR(temperature_tune(z, y).t, 3.0, 0.15);
}

TEST(Temperature, NeverChangesArgmax) {
  Rng rng(9);
  Tensor z = Tensor::matrix(100, 6);
  for (double& v : z.values()) v = 5 * rng.normal();
  for (double t : {0.05, 0.5, 1.0, 7.0, 20.0}) {
    Tensor scaled = z;
    for (double& v : scaled.values()) v /= t;
    const Tensor p = softmax(scaled);
    for (std::size_t r = 0; r < 100; ++r) {
      const auto a = std::max_element(z.row(r).begin(), z.row(r).end()) - z.row(r).begin();
      const auto b = std::max_element(p.row(r).begin(), p.row(r).end()) - p.row(r).begin();
      EXPECT_EQ(a, b);
    }
  }
}

TEST(Temperature, SingleClassHoldoutIsDegenerate) {
  Tensor z = Tensor::matrix(10, 3, 0.5);
  const std::vector<std::uint16_t> y(10, 2);
  const Temperature t = temperature_tune(z, y);
  EXPECT_TRUE(t.degenerate);
  EXPECT_EQ(t.t, 1.0);
}

TEST(Temperature, TunedNllNotWorseThanIdentity) {
  Rng rng(10);
  auto [z, y] = calibrated(2000, 4, 1.0, rng);
  for (double& v : z.values()) v *= 0.3;
  const Temperature t = temperature_tune(z, y);
  EXPECT_LE(temperature_nll(z, y, t.t), temperature_nll(z, y, 1.0));
}

TEST(Csv, ScoreAndCalibrationRoundTrip) {
  Rng rng(11);
  std::vector<ScoredExample> scores(30);
  for (auto& s : scores) s = {rng.normal(), rng.bernoulli(0.3)};
  const auto back = scores_from_csv(scores_to_csv(scores));
  ASSERT_EQ(back.size(), scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    EXPECT_EQ(back[i].anomaly_score, scores[i].anomaly_score);
    EXPECT_EQ(back[i].is_ood, scores[i].is_ood);
  }
  std::vector<CalibrationSample> cal(30);
  for (auto& c : cal) c = {rng.uniform(), rng.bernoulli(0.5)};
  const auto cb = calibration_from_csv(calibration_to_csv(cal));
  for (std::size_t i = 0; i < cal.size(); ++i) {
    EXPECT_EQ(cb[i].confidence, cal[i].confidence);
    EXPECT_EQ(cb[i].correct, cal[i].correct);
  }
  EXPECT_THROW(scores_from_csv("score,is_ood\n0.5,maybe\n"), DataError);
}
