#include "prl/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "prl/error.hpp"

namespace prl {

double scheduled_lr(const TrainSpec& spec, std::uint64_t step, std::uint64_t total_steps,
                    int epoch) {
  if (spec.schedule == LrSchedule::cosine) return cosine_lr(step, total_steps, spec.lr0);
  double lr = spec.lr0;
  for (int e : spec.drop_epochs) {
    if (epoch >= e) lr *= spec.drop_factor;
  }
  return lr;
}

void fit(Mlp& net, const Dataset& data, const TrainSpec& spec, Rng& rng, const FitHooks& hooks) {
  net.validate();
  if (data.n == 0 || spec.epochs <= 0) return;
  if (data.d != net.input_dim()) throw NumericError("fit: data width does not match network");
  if (data.k > net.output_dim()) throw NumericError("fit: more classes than network outputs");
  if (spec.batch_size == 0) throw NumericError("fit: batch size must be positive");

  const std::size_t batches = (data.n + spec.batch_size - 1) / spec.batch_size;
  const std::uint64_t total_steps = static_cast<std::uint64_t>(batches) * spec.epochs;
  OptimState state = OptimState::zeros_like(net, spec.momentum, spec.weight_decay);
  std::vector<std::size_t> order(data.n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * spec.batch_size;
      const std::size_t hi = std::min(data.n, lo + spec.batch_size);
      std::span<const std::size_t> idx(order.data() + lo, hi - lo);
      Tensor x = data.to_tensor(idx);
      const auto y = data.labels_of(idx);
      if (hooks.perturb) x = hooks.perturb(net, x, y, state.step);
      auto [logits, trace] = forward(net, x, true, rng);
      LossResult loss = hooks.loss ? hooks.loss(logits, idx, y) : softmax_xent(logits, y);
      if (!std::isfinite(loss.loss)) throw NumericError("fit: non-finite loss");
      Gradients g = backward(net, trace, loss.dlogits);
      const double lr = scheduled_lr(spec, state.step, total_steps, epoch);
      sgd_nesterov_step(net, g, state, lr, spec.first_trainable_layer);
    }
    if (!net.all_finite()) throw NumericError("fit: parameters diverged");
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, net);
  }
}

std::vector<std::uint16_t> predict(const Mlp& net, const Tensor& x) {
  const Tensor logits = predict_logits(net, x);
  std::vector<std::uint16_t> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    out[r] = static_cast<std::uint16_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double error_rate(const Mlp& net, const Dataset& data) {
  if (data.n == 0) return 0.0;
  const auto pred = predict(net, data.to_tensor());
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.n; ++i) wrong += pred[i] != data.labels[i];
  return static_cast<double>(wrong) / static_cast<double>(data.n);
}

std::vector<double> per_class_error(const Mlp& net, const Dataset& data) {
  std::vector<double> wrong(data.k, 0.0), total(data.k, 0.0);
  const auto pred = data.n ? predict(net, data.to_tensor()) : std::vector<std::uint16_t>{};
  for (std::size_t i = 0; i < data.n; ++i) {
    total[data.labels[i]] += 1.0;
    wrong[data.labels[i]] += pred[i] != data.labels[i];
  }
  std::vector<double> out(data.k);
  for (std::size_t c = 0; c < data.k; ++c) {
    out[c] = total[c] > 0 ? wrong[c] / total[c] : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace prl
