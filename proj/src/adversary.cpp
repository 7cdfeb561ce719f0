#include "prl/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prl/error.hpp"

namespace prl {
namespace {

// Feasible interval of one coordinate: the epsilon ball intersected with
// [0, 1], shrunk by whole ulps until |v - x0| <= eps holds when evaluated
// in floating point.
std::pair<double, double> feasible_interval(double x0, double eps) {
  double lo = std::max(0.0, x0 - eps);
  double hi = std::min(1.0, x0 + eps);
  while (x0 - lo > eps) lo = std::nextafter(lo, 2.0);
  while (hi - x0 > eps) hi = std::nextafter(hi, -1.0);
  return {lo, hi};
}

std::vector<std::uint16_t> argmax_rows(const Tensor& logits) {
  std::vector<std::uint16_t> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    out[r] = static_cast<std::uint16_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace

AttackSpec AttackSpec::linf(double epsilon, int steps, int restarts, bool random_init) {
  AttackSpec s;
  s.epsilon = epsilon;
  s.steps = steps;
  s.step_size = steps > 0 ? 2.5 * epsilon / steps : 0.0;
  s.restarts = restarts;
  s.random_init = random_init;
  return s;
}

void AttackSpec::validate() const {
  if (!(epsilon >= 0.0)) throw NumericError("AttackSpec: epsilon must be non-negative");
  if (steps < 0) throw NumericError("AttackSpec: steps must be non-negative");
  if (steps > 0 && epsilon > 0.0 && !(step_size > 0.0)) {
    throw NumericError("AttackSpec: step size must be positive");
  }
  if (restarts < 1) throw NumericError("AttackSpec: need at least one restart");
  if (targeted) throw NumericError("AttackSpec: targeted attacks are not supported");
}

Tensor pgd_attack(const Mlp& net, const Tensor& x, std::span<const std::uint16_t> labels,
                  const AttackSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (x.rank() != 2 || x.cols() != net.input_dim() || labels.size() != x.rows()) {
    throw NumericError("pgd_attack: shape mismatch");
  }
  if (spec.epsilon == 0.0 || (spec.steps == 0 && !spec.random_init)) return x;

  const std::size_t n = x.rows();
  Tensor lo(x.shape()), hi(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw NumericError("pgd_attack: input outside [0, 1]");
    std::tie(lo[i], hi[i]) = feasible_interval(x[i], spec.epsilon);
  }

  Tensor best = x;
  std::vector<double> best_loss(n, -std::numeric_limits<double>::infinity());
  std::vector<bool> best_wrong(n, false);
  Rng no_dropout(0);  // forward() in eval mode never draws from it

  for (int r = 0; r < spec.restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    Tensor xa = x;
    if (spec.random_init) {
      for (std::size_t i = 0; i < xa.size(); ++i) {
        xa[i] = std::clamp(x[i] + rng.uniform(-spec.epsilon, spec.epsilon), lo[i], hi[i]);
      }
    }
    for (int t = 0; t < spec.steps; ++t) {
      auto [logits, trace] = forward(net, xa, false, no_dropout);
      const LossResult loss = softmax_xent(logits, labels);
      const Gradients g = backward(net, trace, loss.dlogits);
      if (!g.input_grad.all_finite()) throw NumericError("pgd_attack: non-finite input gradient");
      for (std::size_t i = 0; i < xa.size(); ++i) {
        const double gi = g.input_grad[i];
        const double dir = gi > 0.0 ? 1.0 : (gi < 0.0 ? -1.0 : 0.0);
        xa[i] = std::clamp(xa[i] + spec.step_size * dir, lo[i], hi[i]);
      }
    }
    if (spec.restarts == 1) return xa;
    const Tensor logits = predict_logits(net, xa);
    const auto losses = per_example_xent(logits, labels);
    const auto pred = argmax_rows(logits);
    for (std::size_t e = 0; e < n; ++e) {
      const bool wrong = pred[e] != labels[e];
      const bool better = (wrong && !best_wrong[e]) || (wrong == best_wrong[e] && losses[e] > best_loss[e]);
      if (better) {
        best_wrong[e] = wrong;
        best_loss[e] = losses[e];
        auto src = xa.row(e);
        std::copy(src.begin(), src.end(), best.row(e).begin());
      }
    }
  }
  return best;
}

void adversarial_train(Mlp& net, const Dataset& data, const AdvTrainSpec& spec,
                       std::uint64_t seed) {
  spec.train_attack.validate();
  Rng rng(derive_seed(seed, "train"));
  const std::uint64_t attack_seed = derive_seed(seed, "attack");
  FitHooks hooks;
  hooks.perturb = [&](const Mlp& current, const Tensor& x, std::span<const std::uint16_t> y,
                      std::uint64_t step) {
    return pgd_attack(current, x, y, spec.train_attack, derive_seed(attack_seed, step));
  };
  fit(net, data, spec.train, rng, hooks);
}

double robust_accuracy(const Mlp& net, const Dataset& data, const AttackSpec& spec,
                       std::uint64_t seed) {
  spec.validate();
  if (data.n == 0) return 0.0;
  constexpr std::size_t kChunk = 256;
  std::size_t correct = 0;
  for (std::size_t lo = 0, chunk = 0; lo < data.n; lo += kChunk, ++chunk) {
    std::vector<std::size_t> idx;
    for (std::size_t i = lo; i < std::min(data.n, lo + kChunk); ++i) idx.push_back(i);
    const Tensor x = data.to_tensor(idx);
    const auto y = data.labels_of(idx);
    const Tensor xa = pgd_attack(net, x, y, spec, derive_seed(seed, chunk));
    const auto pred = argmax_rows(predict_logits(net, xa));
    for (std::size_t i = 0; i < idx.size(); ++i) correct += pred[i] == y[i];
  }
  return static_cast<double>(correct) / static_cast<double>(data.n);
}

Mlp adversarial_pretrain(const Dataset& source, const AdvPretrainConfig& cfg, std::uint64_t seed) {
  std::vector<std::size_t> dims{source.d};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(source.k);
  Rng init(derive_seed(seed, "init"));
  Mlp net = Mlp::create(dims, 0.0, init);
  adversarial_train(net, source, cfg.pretrain, derive_seed(seed, "pretrain"));
  return net;
}

void adversarial_finetune(Mlp& net, const Dataset& target, const AdvPretrainConfig& cfg,
                          std::uint64_t seed) {
  if (target.d != net.input_dim()) throw DataError("adversarial_finetune: dimension mismatch");
  Rng head(derive_seed(seed, "head"));
  replace_head(net, target.k, head);
  net.dropout_rate = 0.0;
  AdvTrainSpec spec = cfg.finetune;
  spec.train.first_trainable_layer = cfg.mode == FinetuneMode::last_layer ? net.layers.size() - 1 : 0;
  adversarial_train(net, target, spec, derive_seed(seed, "finetune"));
}

Mlp adv_pretrain_finetune(const Dataset& source, const Dataset& target,
                          const AdvPretrainConfig& cfg, std::uint64_t seed) {
  if (source.d != target.d) throw DataError("adv_pretrain_finetune: source and target widths differ");
  Mlp net = adversarial_pretrain(source, cfg, seed);
  adversarial_finetune(net, target, cfg, seed);
  return net;
}

}  // namespace prl
