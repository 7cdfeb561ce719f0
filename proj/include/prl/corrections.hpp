#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prl/dataset.hpp"
#include "prl/mlp.hpp"
#include "prl/rng.hpp"
#include "prl/training.hpp"

namespace prl {

/// Floor applied to corrected probabilities before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;

/// Forward-corrected cross-entropy, averaged over the batch:
///   loss_i = -log (C^T softmax(z_i))[y_i]
/// Rows whose corrected probability falls below kProbabilityFloor use the
/// floor, contribute no gradient and are counted in LossResult::floored.
LossResult forward_loss(const Tensor& logits, std::span<const std::uint16_t> noisy_labels,
                        const TransitionMatrix& c_hat);

/// Forward correction for the rows flagged in use_correction and plain
/// cross-entropy for the rest (GLC mixes trusted and untrusted examples).
LossResult mixed_forward_loss(const Tensor& logits, std::span<const std::uint16_t> labels,
                              const TransitionMatrix& c_hat,
                              const std::vector<bool>& use_correction);

/// Max-confidence exemplar estimate: row i is the softmax output at the
/// example that maximises p(i | x). probs holds one softmax row per example.
TransitionMatrix estimate_c_confidence(const Tensor& probs, std::span<const std::uint16_t> labels,
                                       std::size_t k);
TransitionMatrix estimate_c_confidence(const Mlp& model, const Dataset& noisy_data);

/// Gold-loss-correction estimate: row i is the mean softmax output over
/// trusted examples whose clean label is i, renormalised.
TransitionMatrix glc_estimate(const Tensor& probs, std::span<const std::uint16_t> clean_labels,
                              std::size_t k);
TransitionMatrix glc_estimate(const Mlp& model_on_noisy, const Dataset& trusted);

struct TrustedSplit {
  Dataset trusted;    // clean labels
  Dataset untrusted;  // noisy labels
  double trusted_fraction = 0.0;
};

/// Stratified trusted/untrusted split of clean data; only the untrusted part
/// is corrupted with c.
TrustedSplit make_trusted_split(const Dataset& clean, double trusted_fraction,
                                const TransitionMatrix& c, Rng& rng);

/// Trains net on trusted examples with cross-entropy and on untrusted examples
/// with the forward loss under c_hat. Both parts are shuffled together, so
/// every minibatch mixes them in proportion to their sizes.
void glc_train(Mlp& net, const TrustedSplit& split, const TransitionMatrix& c_hat,
               const TrainSpec& spec, Rng& rng);

/// Second stage of Forward correction: train with forward_loss under c_hat.
void forward_train(Mlp& net, const Dataset& noisy, const TransitionMatrix& c_hat,
                   const TrainSpec& spec, Rng& rng);

struct ClassWeights {
  std::vector<double> weights;  // mean 1
};

/// w_c proportional to 1 / count_c, normalised to mean 1.
ClassWeights cost_weights(std::span<const std::size_t> class_counts);

/// Cross-entropy with per-class weights.
void cost_sensitive_train(Mlp& net, const Dataset& data, const ClassWeights& weights,
                          const TrainSpec& spec, Rng& rng);

/// Random replication of minority examples up to the largest class count.
/// The original examples come first, in order.
Dataset oversample(const Dataset& data, Rng& rng);

/// SMOTE: fills every smaller class up to the largest class count with
/// x + u (x_nn - x), x_nn one of the k nearest same-class neighbours
/// (Euclidean) and u ~ U[0, 1). Originals come first, in order.
Dataset smote(const Dataset& data, std::size_t k_neighbors, Rng& rng);

/// k rows of k comma-separated values, 17 significant digits.
std::string transition_to_csv(const TransitionMatrix& c);
TransitionMatrix transition_from_csv(const std::string& text);

}  // namespace prl
