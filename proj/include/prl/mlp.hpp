#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "prl/rng.hpp"
#include "prl/tensor.hpp"

namespace prl {

/// Affine layer: weight is out x in, bias has length out.
struct Layer {
  Tensor weight;
  Tensor bias;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
};

/// Multilayer perceptron with ReLU hidden layers and a linear output layer.
/// Inverted dropout is applied to hidden activations in training mode.
struct Mlp {
  std::vector<Layer> layers;
  double dropout_rate = 0.0;

  /// He-normal weights, zero biases. dims = {input, hidden..., output}.
  static Mlp create(std::span<const std::size_t> dims, double dropout_rate, Rng& rng);

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t output_dim() const { return layers.back().out_dim(); }
  std::size_t parameter_count() const;
  bool all_finite() const;

  /// Throws NumericError when dims do not chain or the dropout rate is
  /// outside [0, 1).
  void validate() const;
};

/// Intermediate values of a forward pass, consumed by backward().
struct ForwardTrace {
  Tensor input;
  std::vector<Tensor> pre;    // per layer, batch x out
  std::vector<Tensor> post;   // per layer, after ReLU and dropout (output layer: logits)
  std::vector<Tensor> masks;  // per hidden layer; empty tensor when no dropout was sampled
};

struct Gradients {
  std::vector<Layer> layers;
  Tensor input_grad;
};

struct LossResult {
  double loss = 0.0;
  Tensor dlogits;
  /// Number of examples whose probability hit the log floor.
  std::size_t floored = 0;
};

/// Rejects non-finite inputs and width mismatches.
std::pair<Tensor, ForwardTrace> forward(const Mlp& net, const Tensor& batch, bool train_mode,
                                        Rng& rng);

/// Eval-mode logits without keeping a trace.
Tensor predict_logits(const Mlp& net, const Tensor& batch);

/// Row-wise softmax with max subtraction.
Tensor softmax(const Tensor& logits);

/// Weighted mean cross-entropy: sum_i w_i * (-log softmax(z_i)[y_i]) / n.
/// Omitting weights means w_i = 1. dlogits is the exact gradient.
LossResult softmax_xent(const Tensor& logits, std::span<const std::uint16_t> labels,
                        std::span<const double> weights = {});

/// Per-example cross-entropy without gradient.
std::vector<double> per_example_xent(const Tensor& logits, std::span<const std::uint16_t> labels);

Gradients backward(const Mlp& net, const ForwardTrace& trace, const Tensor& dlogits);

struct OptimState {
  std::vector<Layer> velocity;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::uint64_t step = 0;

  static OptimState zeros_like(const Mlp& net, double momentum, double weight_decay = 0.0);
};

/// Nesterov momentum in look-ahead form:
///   v <- mu v - lr g;  theta <- theta + mu v - lr g
/// Layers before first_trainable_layer are left untouched.
void sgd_nesterov_step(Mlp& net, const Gradients& grads, OptimState& state, double lr,
                       std::size_t first_trainable_layer = 0);

/// lr0 * (1 + cos(pi * step / total_steps)) / 2
double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double lr0);

/// Replaces the output layer with a freshly initialised one of width classes.
void replace_head(Mlp& net, std::size_t classes, Rng& rng);

}  // namespace prl
