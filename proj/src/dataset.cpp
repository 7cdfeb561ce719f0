#include "prl/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prl/error.hpp"

namespace prl {

void Dataset::append(std::span<const float> x, std::uint16_t label) {
  if (x.size() != d) throw DataError("Dataset::append: feature width mismatch");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
  ++n;
}

void Dataset::append(std::span<const double> x, std::uint16_t label) {
  if (x.size() != d) throw DataError("Dataset::append: feature width mismatch");
  for (double v : x) features.push_back(static_cast<float>(v));
  labels.push_back(label);
  ++n;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(k, 0);
  for (auto y : labels) ++counts.at(y);
  return counts;
}

std::vector<std::vector<std::size_t>> Dataset::class_indices() const {
  std::vector<std::vector<std::size_t>> idx(k);
  for (std::size_t i = 0; i < n; ++i) idx.at(labels[i]).push_back(i);
  return idx;
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  Dataset out = empty(d, k);
  out.features.reserve(indices.size() * d);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.append(row(i), labels[i]);
  return out;
}

Tensor Dataset::to_tensor() const {
  Tensor t = Tensor::matrix(n, d);
  for (std::size_t i = 0; i < features.size(); ++i) t[i] = features[i];
  return t;
}

Tensor Dataset::to_tensor(std::span<const std::size_t> indices) const {
  Tensor t = Tensor::matrix(indices.size(), d);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto src = row(indices[r]);
    std::copy(src.begin(), src.end(), t.row(r).begin());
  }
  return t;
}

std::vector<std::uint16_t> Dataset::labels_of(std::span<const std::size_t> indices) const {
  std::vector<std::uint16_t> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels[i]);
  return out;
}

void Dataset::validate() const {
  if (features.size() != n * d || labels.size() != n) {
    throw DataError("Dataset: size fields disagree with storage");
  }
  for (float v : features) {
    if (!(v >= 0.0f && v <= 1.0f)) throw DataError("Dataset: feature outside [0, 1]");
  }
  for (auto y : labels) {
    if (y >= k) throw DataError("Dataset: label >= k");
  }
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.d != b.d || a.k != b.k) throw DataError("concat: datasets are not compatible");
  Dataset out = a;
  out.features.insert(out.features.end(), b.features.begin(), b.features.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.n += b.n;
  return out;
}

TransitionMatrix TransitionMatrix::identity(std::size_t k) {
  TransitionMatrix c{k, std::vector<double>(k * k, 0.0), Role::truth};
  for (std::size_t i = 0; i < k; ++i) c(i, i) = 1.0;
  return c;
}

bool TransitionMatrix::is_row_stochastic(double tol) const {
  if (entries.size() != k * k) return false;
  for (std::size_t i = 0; i < k; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double v = (*this)(i, j);
      if (!(v >= 0.0 && v <= 1.0)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

void TransitionMatrix::normalize_rows() {
  for (std::size_t i = 0; i < k; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += (*this)(i, j);
    if (!(sum > 0.0)) throw NumericError("TransitionMatrix: row with zero mass");
    for (std::size_t j = 0; j < k; ++j) (*this)(i, j) /= sum;
  }
}

TransitionMatrix make_uniform_noise_matrix(std::size_t k, double strength) {
  if (k < 2) throw DataError("make_uniform_noise_matrix: need at least two classes");
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw DataError("make_uniform_noise_matrix: strength must lie in [0, 1]");
  }
  TransitionMatrix c{k, std::vector<double>(k * k, strength / static_cast<double>(k)),
                     TransitionMatrix::Role::truth};
  for (std::size_t i = 0; i < k; ++i) c(i, i) += 1.0 - strength;
  return c;
}

Dataset corrupt_labels(const Dataset& data, const TransitionMatrix& c, Rng& rng) {
  if (c.k != data.k) throw DataError("corrupt_labels: matrix size does not match class count");
  Dataset out = data;
  for (auto& y : out.labels) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t j = 0;
    for (; j + 1 < c.k; ++j) {
      acc += c(y, j);
      if (u < acc) break;
    }
    y = static_cast<std::uint16_t>(j);
  }
  return out;
}

std::vector<std::size_t> power_law_sizes(std::size_t k, const ImbalanceSpec& spec) {
  if (k < 2) throw DataError("power_law_sizes: need at least two classes");
  if (spec.n_min < 1 || spec.n_max < spec.n_min) {
    throw DataError("power_law_sizes: need n_max >= n_min >= 1");
  }
  if (!(spec.gamma > 0.0)) throw DataError("power_law_sizes: gamma must be positive");
  std::vector<std::size_t> sizes(k, spec.n_max);
  if (spec.n_max == spec.n_min) return sizes;
  const double ratio = static_cast<double>(spec.n_max) / static_cast<double>(spec.n_min);
  const double b = std::pow(static_cast<double>(k - 1), spec.gamma) / (ratio - 1.0);
  const double a = static_cast<double>(spec.n_max) * b;
  for (std::size_t c = 1; c <= k; ++c) {
    const double denom = b + std::pow(static_cast<double>(c - 1), spec.gamma);
    sizes[c - 1] = static_cast<std::size_t>(std::nearbyint(a / denom));
  }
  return sizes;
}

Dataset subsample_imbalanced(const Dataset& data, std::span<const std::size_t> sizes, Rng& rng) {
  if (sizes.size() != data.k) throw DataError("subsample_imbalanced: one size per class required");
  auto by_class = data.class_indices();
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < data.k; ++c) {
    auto& idx = by_class[c];
    if (sizes[c] > idx.size()) {
      throw DataError("subsample_imbalanced: class " + std::to_string(c) + " has only " +
                      std::to_string(idx.size()) + " examples, " + std::to_string(sizes[c]) +
                      " requested");
    }
    rng.shuffle(std::span<std::size_t>(idx));
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(sizes[c]));
  }
  std::sort(chosen.begin(), chosen.end());
  return data.select(chosen);
}

std::vector<Dataset> split(const Dataset& data, std::span<const double> fractions, Rng& rng) {
  if (fractions.empty()) throw DataError("split: no fractions given");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw DataError("split: fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DataError("split: fractions must sum to 1");

  const std::size_t parts = fractions.size();
  auto by_class = data.class_indices();
  std::vector<std::vector<std::size_t>> assigned(parts);
  std::vector<double> counts(parts, 0.0);
  double seen = 0.0;
  for (auto& idx : by_class) {
    if (idx.empty()) continue;
    if (idx.size() < parts) {
      throw DataError("split: a class has fewer examples than requested parts");
    }
    rng.shuffle(std::span<std::size_t>(idx));
    // Sequential apportionment: each example goes to the part that is
    // furthest below its quota. Running over classes in turn keeps every
    // class and the global totals within one example of proportional.
    for (std::size_t i : idx) {
      seen += 1.0;
      std::size_t best = 0;
      double best_deficit = -1e300;
      for (std::size_t s = 0; s < parts; ++s) {
        const double deficit = fractions[s] * seen - counts[s];
        if (deficit > best_deficit) {
          best_deficit = deficit;
          best = s;
        }
      }
      counts[best] += 1.0;
      assigned[best].push_back(i);
    }
  }
  std::vector<Dataset> out;
  for (auto& a : assigned) {
    std::sort(a.begin(), a.end());
    out.push_back(data.select(a));
  }
  return out;
}

Dataset shuffled(const Dataset& data, Rng& rng) {
  std::vector<std::size_t> idx(data.n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(idx));
  return data.select(idx);
}

std::uint32_t checksum(const Dataset& data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(data.features.data()),
              static_cast<uInt>(data.features.size() * sizeof(float)));
  crc = crc32(crc, reinterpret_cast<const Bytef*>(data.labels.data()),
              static_cast<uInt>(data.labels.size() * sizeof(std::uint16_t)));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace prl
