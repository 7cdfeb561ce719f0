#include "prl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prl/error.hpp"

namespace prl {
namespace {

// out(b, :) += x(b, i) * wt(i, :), with wt = W^T stored in (in x out).
void affine_forward(const Tensor& x, const Layer& layer, Tensor& out) {
  const std::size_t batch = x.rows();
  const std::size_t in = layer.in_dim();
  const std::size_t outd = layer.out_dim();
  std::vector<double> wt(in * outd);
  for (std::size_t o = 0; o < outd; ++o) {
    for (std::size_t i = 0; i < in; ++i) wt[i * outd + o] = layer.weight(o, i);
  }
  out = Tensor::matrix(batch, outd);
  for (std::size_t b = 0; b < batch; ++b) {
    double* orow = out.row(b).data();
    for (std::size_t o = 0; o < outd; ++o) orow[o] = layer.bias[o];
    const double* xrow = x.row(b).data();
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xrow[i];
      if (xi == 0.0) continue;
      const double* w = wt.data() + i * outd;
      for (std::size_t o = 0; o < outd; ++o) orow[o] += xi * w[o];
    }
  }
}

void check_batch(const Mlp& net, const Tensor& batch) {
  if (net.layers.empty()) throw NumericError("forward: network has no layers");
  if (batch.rank() != 2 || batch.cols() != net.input_dim()) {
    throw NumericError("forward: batch width does not match network input dimension");
  }
  if (!batch.all_finite()) throw NumericError("forward: non-finite input");
}

}  // namespace

Mlp Mlp::create(std::span<const std::size_t> dims, double dropout_rate, Rng& rng) {
  if (dims.size() < 2) throw NumericError("Mlp::create: need at least input and output dims");
  Mlp net;
  net.dropout_rate = dropout_rate;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer{Tensor::matrix(dims[l + 1], dims[l]), Tensor::vector(dims[l + 1])};
    const double stddev = std::sqrt(2.0 / static_cast<double>(dims[l]));
    for (double& w : layer.weight.values()) w = rng.normal(0.0, stddev);
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

bool Mlp::all_finite() const {
  return std::all_of(layers.begin(), layers.end(), [](const Layer& l) {
    return l.weight.all_finite() && l.bias.all_finite();
  });
}

void Mlp::validate() const {
  if (layers.empty()) throw NumericError("Mlp: no layers");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw NumericError("Mlp: dropout rate must lie in [0, 1)");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weight.rank() != 2 || layer.bias.size() != layer.out_dim()) {
      throw NumericError("Mlp: malformed layer");
    }
    if (l > 0 && layer.in_dim() != layers[l - 1].out_dim()) {
      throw NumericError("Mlp: layer dimensions do not chain");
    }
  }
}

std::pair<Tensor, ForwardTrace> forward(const Mlp& net, const Tensor& batch, bool train_mode,
                                        Rng& rng) {
  check_batch(net, batch);
  ForwardTrace trace;
  trace.input = batch;
  const std::size_t depth = net.layers.size();
  trace.pre.resize(depth);
  trace.post.resize(depth);
  trace.masks.resize(depth);

  const bool drop = train_mode && net.dropout_rate > 0.0;
  const double keep_scale = 1.0 / (1.0 - net.dropout_rate);
  for (std::size_t l = 0; l < depth; ++l) {
    const Tensor& in = l == 0 ? trace.input : trace.post[l - 1];
    affine_forward(in, net.layers[l], trace.pre[l]);
    Tensor post = trace.pre[l];
    if (l + 1 < depth) {
      for (double& v : post.values()) v = std::max(v, 0.0);
      if (drop) {
        Tensor mask(post.shape());
        for (std::size_t i = 0; i < mask.size(); ++i) {
          mask[i] = rng.uniform() < net.dropout_rate ? 0.0 : keep_scale;
          post[i] *= mask[i];
        }
        trace.masks[l] = std::move(mask);
      }
    }
    trace.post[l] = std::move(post);
  }
  Tensor logits = trace.post.back();
  return {std::move(logits), std::move(trace)};
}

Tensor predict_logits(const Mlp& net, const Tensor& batch) {
  check_batch(net, batch);
  Tensor cur = batch;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Tensor next;
    affine_forward(cur, net.layers[l], next);
    if (l + 1 < net.layers.size()) {
      for (double& v : next.values()) v = std::max(v, 0.0);
    }
    cur = std::move(next);
  }
  return cur;
}

Tensor softmax(const Tensor& logits) {
  Tensor p = logits;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    auto row = p.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& v : row) {
      v = std::exp(v - m);
      z += v;
    }
    for (double& v : row) v /= z;
  }
  return p;
}

LossResult softmax_xent(const Tensor& logits, std::span<const std::uint16_t> labels,
                        std::span<const double> weights) {
  const std::size_t n = logits.rows();
  const std::size_t k = logits.cols();
  if (labels.size() != n) throw NumericError("softmax_xent: label count mismatch");
  if (!weights.empty() && weights.size() != n) {
    throw NumericError("softmax_xent: weight count mismatch");
  }
  LossResult out;
  out.dlogits = Tensor::matrix(n, k);
  if (n == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (labels[r] >= k) throw DataError("softmax_xent: label out of range");
    const double w = weights.empty() ? 1.0 : weights[r];
    if (w < 0.0) throw NumericError("softmax_xent: negative weight");
    auto z = logits.row(r);
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    const double lse = m + std::log(sum);
    out.loss += w * (lse - z[labels[r]]) * inv_n;
    auto g = out.dlogits.row(r);
    for (std::size_t c = 0; c < k; ++c) {
      const double p = std::exp(z[c] - lse);
      g[c] = w * (p - (c == labels[r] ? 1.0 : 0.0)) * inv_n;
    }
  }
  return out;
}

std::vector<double> per_example_xent(const Tensor& logits,
                                     std::span<const std::uint16_t> labels) {
  std::vector<double> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (labels[r] >= logits.cols()) throw DataError("per_example_xent: label out of range");
    auto z = logits.row(r);
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    out[r] = m + std::log(sum) - z[labels[r]];
  }
  return out;
}

Gradients backward(const Mlp& net, const ForwardTrace& trace, const Tensor& dlogits) {
  const std::size_t depth = net.layers.size();
  if (trace.pre.size() != depth || trace.post.size() != depth) {
    throw NumericError("backward: trace does not match network depth");
  }
  const std::size_t batch = trace.input.rows();
  if (dlogits.rows() != batch || dlogits.cols() != net.output_dim()) {
    throw NumericError("backward: dlogits shape mismatch");
  }
  Gradients g;
  g.layers.resize(depth);
  Tensor delta = dlogits;
  for (std::size_t li = depth; li-- > 0;) {
    const Layer& layer = net.layers[li];
    const Tensor& in = li == 0 ? trace.input : trace.post[li - 1];
    if (in.cols() != layer.in_dim() || trace.pre[li].cols() != layer.out_dim()) {
      throw NumericError("backward: trace does not match network shapes");
    }
    const std::size_t ind = layer.in_dim();
    const std::size_t outd = layer.out_dim();
    Layer& gl = g.layers[li];
    gl.weight = Tensor::matrix(outd, ind);
    gl.bias = Tensor::vector(outd);
    Tensor dinput = Tensor::matrix(batch, ind);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* d = delta.row(b).data();
      const double* x = in.row(b).data();
      double* dx = dinput.row(b).data();
      for (std::size_t o = 0; o < outd; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        gl.bias[o] += dv;
        double* gw = gl.weight.row(o).data();
        const double* w = layer.weight.row(o).data();
        for (std::size_t i = 0; i < ind; ++i) {
          gw[i] += dv * x[i];
          dx[i] += dv * w[i];
        }
      }
    }
    if (li == 0) {
      g.input_grad = std::move(dinput);
      break;
    }
    // Back through dropout and ReLU of the previous hidden layer.
    const Tensor& mask = trace.masks[li - 1];
    const Tensor& pre = trace.pre[li - 1];
    for (std::size_t i = 0; i < dinput.size(); ++i) {
      double v = pre[i] > 0.0 ? dinput[i] : 0.0;
      if (mask.size() != 0) v *= mask[i];
      dinput[i] = v;
    }
    delta = std::move(dinput);
  }
  return g;
}

OptimState OptimState::zeros_like(const Mlp& net, double momentum, double weight_decay) {
  OptimState s;
  s.momentum = momentum;
  s.weight_decay = weight_decay;
  for (const auto& l : net.layers) {
    s.velocity.push_back({Tensor(l.weight.shape()), Tensor(l.bias.shape())});
  }
  return s;
}

void sgd_nesterov_step(Mlp& net, const Gradients& grads, OptimState& state, double lr,
                       std::size_t first_trainable_layer) {
  if (lr < 0.0) throw NumericError("sgd_nesterov_step: negative learning rate");
  if (grads.layers.size() != net.layers.size() || state.velocity.size() != net.layers.size()) {
    throw NumericError("sgd_nesterov_step: layer count mismatch");
  }
  const double mu = state.momentum;
  const double wd = state.weight_decay;
  auto update = [&](Tensor& param, const Tensor& grad, Tensor& vel, double decay) {
    if (!param.same_shape(grad) || !param.same_shape(vel)) {
      throw NumericError("sgd_nesterov_step: shape mismatch");
    }
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double g = grad[i] + decay * param[i];
      vel[i] = mu * vel[i] - lr * g;
      param[i] += mu * vel[i] - lr * g;
    }
  };
  for (std::size_t l = first_trainable_layer; l < net.layers.size(); ++l) {
    update(net.layers[l].weight, grads.layers[l].weight, state.velocity[l].weight, wd);
    // biases are not decayed
    update(net.layers[l].bias, grads.layers[l].bias, state.velocity[l].bias, 0.0);
  }
  ++state.step;
}

double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double lr0) {
  if (total_steps == 0 || step > total_steps) {
    throw NumericError("cosine_lr: step out of range");
  }
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

void replace_head(Mlp& net, std::size_t classes, Rng& rng) {
  Layer& head = net.layers.back();
  const std::size_t in = head.in_dim();
  head.weight = Tensor::matrix(classes, in);
  head.bias = Tensor::vector(classes);
  const double stddev = std::sqrt(2.0 / static_cast<double>(in));
  for (double& w : head.weight.values()) w = rng.normal(0.0, stddev);
}

}  // namespace prl
