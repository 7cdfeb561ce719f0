#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "prl/dataset.hpp"
#include "prl/mlp.hpp"

namespace prl {

/// Higher anomaly_score means more anomalous.
struct ScoredExample {
  double anomaly_score = 0.0;
  bool is_ood = false;
};

struct CalibrationSample {
  double confidence = 0.0;
  bool correct = false;
};

struct Temperature {
  double t = 1.0;
  /// Set when the holdout held a single class and tuning was skipped.
  bool degenerate = false;
};

/// Negated maximum softmax probability per row of logits.
std::vector<double> msp_scores(const Tensor& logits);
std::vector<double> msp_scores(const Mlp& net, const Tensor& x);

/// P(out score > in score) + 0.5 P(tie), from mid-ranks.
double auroc(std::span<const double> in_scores, std::span<const double> out_scores);

/// Average precision with OOD as the positive class: thresholds at the
/// distinct scores in descending order, precision held constant between
/// recall levels.
double aupr(std::span<const double> in_scores, std::span<const double> out_scores);

/// Adaptive-binning calibration errors. Samples are sorted by confidence and
/// cut into consecutive bins of bin_size (the last one may be short).
double rms_calibration_error(std::span<const CalibrationSample> samples, std::size_t bin_size = 100);
double mad_calibration_error(std::span<const CalibrationSample> samples, std::size_t bin_size = 100);

/// Confidence/correctness pairs of the net's predictions on data, with the
/// logits divided by temperature.
std::vector<CalibrationSample> calibration_samples(const Mlp& net, const Dataset& data,
                                                   double temperature = 1.0);

/// Mean negative log-likelihood of softmax(logits / t).
double temperature_nll(const Tensor& logits, std::span<const std::uint16_t> labels, double t);

/// Golden-section search on ln t in [-3, 3] minimising holdout NLL.
Temperature temperature_tune(const Tensor& logits, std::span<const std::uint16_t> labels);
Temperature temperature_tune(const Mlp& net, const Dataset& holdout);

/// Two-column CSV: "score,is_ood" and "confidence,correct".
std::string scores_to_csv(std::span<const ScoredExample> scores);
std::vector<ScoredExample> scores_from_csv(const std::string& text);
std::string calibration_to_csv(std::span<const CalibrationSample> samples);
std::vector<CalibrationSample> calibration_from_csv(const std::string& text);

}  // namespace prl
