#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prl/dataset.hpp"
#include "prl/mlp.hpp"
#include "prl/training.hpp"

namespace prl {

/// Untargeted l-infinity PGD configuration.
struct AttackSpec {
  double epsilon = 8.0 / 255.0;
  int steps = 10;
  double step_size = 2.5 * (8.0 / 255.0) / 10.0;
  int restarts = 1;
  bool random_init = true;
  bool targeted = false;  // only untargeted attacks are implemented

  /// step_size = 2.5 * epsilon / steps, so the iterate can cross the ball.
  static AttackSpec linf(double epsilon, int steps, int restarts = 1, bool random_init = true);
  void validate() const;
};

struct AdvTrainSpec {
  AttackSpec train_attack = AttackSpec::linf(8.0 / 255.0, 10);
  AttackSpec eval_attack = AttackSpec::linf(8.0 / 255.0, 20);
  TrainSpec train;
};

/// PGD from x. Every returned row satisfies |x_adv - x| <= epsilon and
/// 0 <= x_adv <= 1 exactly in double arithmetic. With several restarts the
/// per-example worst point is kept: misclassification first, then the larger
/// cross-entropy. Restart r draws its start from derive_seed(seed, r).
Tensor pgd_attack(const Mlp& net, const Tensor& x, std::span<const std::uint16_t> labels,
                  const AttackSpec& spec, std::uint64_t seed);

/// Madry-style training: each minibatch is replaced by its PGD perturbation
/// before the step. The training stream is derive_seed(seed, "train"), so with
/// epsilon = 0 this is exactly fit() on that stream.
void adversarial_train(Mlp& net, const Dataset& data, const AdvTrainSpec& spec,
                       std::uint64_t seed);

/// Fraction of examples still classified correctly at the worst point found
/// over all restarts.
double robust_accuracy(const Mlp& net, const Dataset& data, const AttackSpec& spec,
                       std::uint64_t seed);

enum class FinetuneMode { all, last_layer };

struct AdvPretrainConfig {
  std::vector<std::size_t> hidden = {64, 64};
  AdvTrainSpec pretrain;
  AdvTrainSpec finetune;
  FinetuneMode mode = FinetuneMode::all;
};

/// Adversarially trains a fresh network on the source task.
Mlp adversarial_pretrain(const Dataset& source, const AdvPretrainConfig& cfg, std::uint64_t seed);

/// Swaps in a fresh head for target.k classes and adversarially tunes either
/// every layer or only the head.
void adversarial_finetune(Mlp& net, const Dataset& target, const AdvPretrainConfig& cfg,
                          std::uint64_t seed);

Mlp adv_pretrain_finetune(const Dataset& source, const Dataset& target,
                          const AdvPretrainConfig& cfg, std::uint64_t seed);

}  // namespace prl
