#include "prl/corrections.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "prl/error.hpp"

namespace prl {
namespace {

// Loss of one example under c_hat (nullptr: plain cross-entropy). The
// probabilities are formed exactly as in softmax_xent so that an identity
// matrix reproduces its gradient bit for bit.
double corrected_row(std::span<const double> z, std::uint16_t y, const TransitionMatrix* c_hat,
                     double inv_n, std::span<double> grad, std::size_t& floored) {
  const std::size_t k = z.size();
  if (y >= k) throw DataError("forward_loss: label out of range");
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  const double lse = m + std::log(sum);
  if (c_hat == nullptr) {
    for (std::size_t c = 0; c < k; ++c) {
      grad[c] = (std::exp(z[c] - lse) - (c == y ? 1.0 : 0.0)) * inv_n;
    }
    return (lse - z[y]) * inv_n;
  }
  std::vector<double> p(k);
  double q = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    p[i] = std::exp(z[i] - lse);
    q += (*c_hat)(i, y) * p[i];
  }
  if (!(q >= kProbabilityFloor)) {
    ++floored;
    std::fill(grad.begin(), grad.end(), 0.0);
    return -std::log(kProbabilityFloor) * inv_n;
  }
  // d(-log q)/dz_i = p_i - p_i C_iy / q
  for (std::size_t i = 0; i < k; ++i) grad[i] = (p[i] - p[i] * (*c_hat)(i, y) / q) * inv_n;
  return -std::log(q) * inv_n;
}

void check_matrix(const Tensor& logits, const TransitionMatrix& c_hat) {
  if (c_hat.k != logits.cols()) throw NumericError("forward_loss: matrix size mismatch");
  if (!c_hat.is_row_stochastic()) throw NumericError("forward_loss: matrix is not row-stochastic");
}

Tensor softmax_of(const Mlp& model, const Dataset& data) {
  return softmax(predict_logits(model, data.to_tensor()));
}

}  // namespace

LossResult forward_loss(const Tensor& logits, std::span<const std::uint16_t> noisy_labels,
                        const TransitionMatrix& c_hat) {
  check_matrix(logits, c_hat);
  LossResult out;
  const std::size_t n = logits.rows();
  if (noisy_labels.size() != n) throw NumericError("forward_loss: label count mismatch");
  out.dlogits = Tensor::matrix(n, logits.cols());
  if (n == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    out.loss += corrected_row(logits.row(r), noisy_labels[r], &c_hat, inv_n, out.dlogits.row(r),
                              out.floored);
  }
  return out;
}

LossResult mixed_forward_loss(const Tensor& logits, std::span<const std::uint16_t> labels,
                              const TransitionMatrix& c_hat, const std::vector<bool>& use_correction) {
  check_matrix(logits, c_hat);
  const std::size_t n = logits.rows();
  if (labels.size() != n || use_correction.size() != n) {
    throw NumericError("mixed_forward_loss: size mismatch");
  }
  LossResult out;
  out.dlogits = Tensor::matrix(n, logits.cols());
  if (n == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    out.loss += corrected_row(logits.row(r), labels[r], use_correction[r] ? &c_hat : nullptr, inv_n,
                              out.dlogits.row(r), out.floored);
  }
  return out;
}

TransitionMatrix estimate_c_confidence(const Tensor& probs, std::span<const std::uint16_t> labels,
                                       std::size_t k) {
  if (probs.cols() != k || labels.size() != probs.rows()) {
    throw NumericError("estimate_c_confidence: shape mismatch");
  }
  std::vector<bool> present(k, false);
  for (auto y : labels) {
    if (y >= k) throw DataError("estimate_c_confidence: label out of range");
    present[y] = true;
  }
  TransitionMatrix c{k, std::vector<double>(k * k, 0.0), TransitionMatrix::Role::estimate};
  for (std::size_t i = 0; i < k; ++i) {
    if (!present[i]) {
      throw DataError("estimate_c_confidence: class " + std::to_string(i) + " absent from data");
    }
    std::size_t best = 0;
    for (std::size_t r = 1; r < probs.rows(); ++r) {
      if (probs(r, i) > probs(best, i)) best = r;
    }
    for (std::size_t j = 0; j < k; ++j) c(i, j) = probs(best, j);
  }
  c.normalize_rows();
  return c;
}

TransitionMatrix estimate_c_confidence(const Mlp& model, const Dataset& noisy_data) {
  return estimate_c_confidence(softmax_of(model, noisy_data), noisy_data.labels, noisy_data.k);
}

TransitionMatrix glc_estimate(const Tensor& probs, std::span<const std::uint16_t> clean_labels,
                              std::size_t k) {
  if (probs.cols() != k || clean_labels.size() != probs.rows()) {
    throw NumericError("glc_estimate: shape mismatch");
  }
  TransitionMatrix c{k, std::vector<double>(k * k, 0.0), TransitionMatrix::Role::estimate};
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    const auto y = clean_labels[r];
    if (y >= k) throw DataError("glc_estimate: label out of range");
    ++counts[y];
    for (std::size_t j = 0; j < k; ++j) c(y, j) += probs(r, j);
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (counts[i] == 0) {
      throw DataError("glc_estimate: trusted set has no example of class " + std::to_string(i));
    }
    for (std::size_t j = 0; j < k; ++j) c(i, j) /= static_cast<double>(counts[i]);
  }
  c.normalize_rows();
  return c;
}

TransitionMatrix glc_estimate(const Mlp& model_on_noisy, const Dataset& trusted) {
  return glc_estimate(softmax_of(model_on_noisy, trusted), trusted.labels, trusted.k);
}

TrustedSplit make_trusted_split(const Dataset& clean, double trusted_fraction,
                                const TransitionMatrix& c, Rng& rng) {
  if (!(trusted_fraction > 0.0 && trusted_fraction < 1.0)) {
    throw DataError("make_trusted_split: fraction must lie in (0, 1)");
  }
  const double fractions[] = {trusted_fraction, 1.0 - trusted_fraction};
  auto parts = split(clean, fractions, rng);
  TrustedSplit out;
  out.trusted = std::move(parts[0]);
  out.untrusted = corrupt_labels(parts[1], c, rng);
  out.trusted_fraction = trusted_fraction;
  return out;
}

void glc_train(Mlp& net, const TrustedSplit& split, const TransitionMatrix& c_hat,
               const TrainSpec& spec, Rng& rng) {
  if (split.trusted.n + split.untrusted.n == 0) throw DataError("glc_train: empty partition");
  if (c_hat.k != net.output_dim()) throw NumericError("glc_train: matrix size mismatch");
  const Dataset all = split.untrusted.n == 0 ? split.trusted
                      : split.trusted.n == 0 ? split.untrusted
                                             : concat(split.trusted, split.untrusted);
  const std::size_t trusted_n = split.trusted.n;
  FitHooks hooks;
  hooks.loss = [&](const Tensor& logits, std::span<const std::size_t> idx,
                   std::span<const std::uint16_t> y) {
    std::vector<bool> untrusted(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) untrusted[i] = idx[i] >= trusted_n;
    return mixed_forward_loss(logits, y, c_hat, untrusted);
  };
  fit(net, all, spec, rng, hooks);
}

void forward_train(Mlp& net, const Dataset& noisy, const TransitionMatrix& c_hat,
                   const TrainSpec& spec, Rng& rng) {
  FitHooks hooks;
  hooks.loss = [&](const Tensor& logits, std::span<const std::size_t>,
                   std::span<const std::uint16_t> y) { return forward_loss(logits, y, c_hat); };
  fit(net, noisy, spec, rng, hooks);
}

ClassWeights cost_weights(std::span<const std::size_t> class_counts) {
  if (class_counts.empty()) throw DataError("cost_weights: no classes");
  ClassWeights out;
  double mean = 0.0;
  for (std::size_t c : class_counts) {
    if (c == 0) throw DataError("cost_weights: zero class count");
    out.weights.push_back(1.0 / static_cast<double>(c));
    mean += out.weights.back();
  }
  mean /= static_cast<double>(class_counts.size());
  for (double& w : out.weights) w /= mean;
  return out;
}

void cost_sensitive_train(Mlp& net, const Dataset& data, const ClassWeights& weights,
                          const TrainSpec& spec, Rng& rng) {
  if (weights.weights.size() != data.k) throw DataError("cost_sensitive_train: one weight per class");
  FitHooks hooks;
  hooks.loss = [&](const Tensor& logits, std::span<const std::size_t>,
                   std::span<const std::uint16_t> y) {
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) w[i] = weights.weights[y[i]];
    return softmax_xent(logits, y, w);
  };
  fit(net, data, spec, rng, hooks);
}

Dataset oversample(const Dataset& data, Rng& rng) {
  const auto by_class = data.class_indices();
  std::size_t target = 0;
  for (const auto& idx : by_class) {
    if (idx.empty()) throw DataError("oversample: empty class");
    target = std::max(target, idx.size());
  }
  Dataset out = data;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const auto& idx = by_class[c];
    for (std::size_t extra = idx.size(); extra < target; ++extra) {
      const std::size_t pick = idx[rng.below(idx.size())];
      out.append(data.row(pick), data.labels[pick]);
    }
  }
  return out;
}

Dataset smote(const Dataset& data, std::size_t k_neighbors, Rng& rng) {
  if (k_neighbors < 1) throw DataError("smote: k_neighbors must be at least 1");
  const auto by_class = data.class_indices();
  std::size_t target = 0;
  for (const auto& idx : by_class) target = std::max(target, idx.size());
  Dataset out = data;
  std::vector<double> synth(data.d);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const auto& members = by_class[c];
    if (members.size() == target) continue;
    if (members.size() < 2) {
      throw DataError("smote: class " + std::to_string(c) + " has fewer than two examples");
    }
    const std::size_t kk = std::min(k_neighbors, members.size() - 1);
    // k nearest same-class neighbours of each member (ties by position).
    std::vector<std::vector<std::size_t>> neighbours(members.size());
    for (std::size_t a = 0; a < members.size(); ++a) {
      std::vector<std::pair<double, std::size_t>> dist;
      auto xa = data.row(members[a]);
      for (std::size_t b = 0; b < members.size(); ++b) {
        if (b == a) continue;
        auto xb = data.row(members[b]);
        double s = 0.0;
        for (std::size_t i = 0; i < data.d; ++i) {
          const double diff = static_cast<double>(xa[i]) - static_cast<double>(xb[i]);
          s += diff * diff;
        }
        dist.emplace_back(s, b);
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
      for (std::size_t j = 0; j < kk; ++j) neighbours[a].push_back(members[dist[j].second]);
    }
    for (std::size_t j = 0; j < target - members.size(); ++j) {
      const std::size_t a = j % members.size();
      const std::size_t base = members[a];
      const std::size_t nn = neighbours[a][rng.below(kk)];
      const double u = rng.uniform();
      auto x = data.row(base);
      auto xn = data.row(nn);
      for (std::size_t i = 0; i < data.d; ++i) {
        const double lo = std::min<double>(x[i], xn[i]);
        const double hi = std::max<double>(x[i], xn[i]);
        synth[i] = std::clamp(x[i] + u * (static_cast<double>(xn[i]) - x[i]), lo, hi);
      }
      out.append(std::span<const double>(synth), static_cast<std::uint16_t>(c));
    }
  }
  return out;
}

std::string transition_to_csv(const TransitionMatrix& c) {
  std::string out;
  char buf[40];
  for (std::size_t i = 0; i < c.k; ++i) {
    for (std::size_t j = 0; j < c.k; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", c(i, j));
      if (j) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

TransitionMatrix transition_from_csv(const std::string& text) {
  TransitionMatrix c;
  c.role = TransitionMatrix::Role::estimate;
  std::istringstream in(text);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(cells, cell, ',')) {
      try {
        c.entries.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError("transition CSV: bad number '" + cell + "'");
      }
      ++cols;
    }
    if (rows == 0) c.k = cols;
    if (cols != c.k) throw DataError("transition CSV: ragged rows");
    ++rows;
  }
  if (rows != c.k) throw DataError("transition CSV: matrix is not square");
  return c;
}

}  // namespace prl
