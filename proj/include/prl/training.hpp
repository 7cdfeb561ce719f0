#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "prl/dataset.hpp"
#include "prl/mlp.hpp"
#include "prl/rng.hpp"

namespace prl {

enum class LrSchedule { cosine, step_drops };

struct TrainSpec {
  int epochs = 10;
  double lr0 = 0.1;
  LrSchedule schedule = LrSchedule::cosine;
  /// Epoch indices (0-based) at which the step schedule multiplies the rate
  /// by drop_factor.
  std::vector<int> drop_epochs;
  double drop_factor = 0.2;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::size_t batch_size = 64;
  /// Layers below this index stay frozen (last-layer tuning).
  std::size_t first_trainable_layer = 0;
};

/// Learning rate at a given optimizer step. Cosine is evaluated per step,
/// step drops per epoch.
double scheduled_lr(const TrainSpec& spec, std::uint64_t step, std::uint64_t total_steps, int epoch);

struct FitHooks {
  /// Replaces each clean minibatch before the gradient step.
  std::function<Tensor(const Mlp&, const Tensor& x, std::span<const std::uint16_t> y,
                       std::uint64_t step)>
      perturb;
  /// Batch loss; indices refer to rows of the training set. Cross-entropy
  /// when unset.
  std::function<LossResult(const Tensor& logits, std::span<const std::size_t> indices,
                           std::span<const std::uint16_t> labels)>
      loss;
  std::function<void(int epoch, const Mlp&)> on_epoch_end;
};

/// Minibatch SGD with Nesterov momentum. The example order of each epoch and
/// all dropout masks come from rng, so a run is a pure function of its inputs.
void fit(Mlp& net, const Dataset& data, const TrainSpec& spec, Rng& rng,
         const FitHooks& hooks = {});

std::vector<std::uint16_t> predict(const Mlp& net, const Tensor& x);
double error_rate(const Mlp& net, const Dataset& data);
/// Error rate of each class; NaN for classes absent from data.
std::vector<double> per_class_error(const Mlp& net, const Dataset& data);

}  // namespace prl
