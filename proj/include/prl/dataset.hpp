#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prl/rng.hpp"
#include "prl/tensor.hpp"

namespace prl {

/// Labelled examples with features in [0, 1]. Features are held in single
/// precision, matching the on-disk format, so that write/read is lossless.
struct Dataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::uint32_t k = 0;
  std::vector<float> features;  // n x d, row-major
  std::vector<std::uint16_t> labels;

  static Dataset empty(std::size_t d, std::uint32_t k) { return Dataset{0, d, k, {}, {}}; }

  std::span<const float> row(std::size_t i) const { return {features.data() + i * d, d}; }

  void append(std::span<const float> x, std::uint16_t label);
  void append(std::span<const double> x, std::uint16_t label);

  std::vector<std::size_t> class_counts() const;
  /// Indices of each class, in dataset order.
  std::vector<std::vector<std::size_t>> class_indices() const;

  Dataset select(std::span<const std::size_t> indices) const;
  /// Feature rows as a double tensor (all rows, or the given subset).
  Tensor to_tensor() const;
  Tensor to_tensor(std::span<const std::size_t> indices) const;
  std::vector<std::uint16_t> labels_of(std::span<const std::size_t> indices) const;

  /// Throws DataError when sizes, bounds or label ranges are violated.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

Dataset concat(const Dataset& a, const Dataset& b);

/// Row-stochastic K x K matrix with C(i, j) = p(noisy = j | clean = i).
struct TransitionMatrix {
  enum class Role { truth, estimate };

  std::size_t k = 0;
  std::vector<double> entries;  // k x k, row-major
  Role role = Role::truth;

  double operator()(std::size_t i, std::size_t j) const { return entries[i * k + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries[i * k + j]; }

  static TransitionMatrix identity(std::size_t k);
  /// Rows sum to 1 within 1e-9 and entries lie in [0, 1].
  bool is_row_stochastic(double tol = 1e-9) const;
  void normalize_rows();
};

/// C = (1 - s) I + s 11^T / k
TransitionMatrix make_uniform_noise_matrix(std::size_t k, double strength);

/// Resamples each label from its row of C. Features are copied unchanged.
Dataset corrupt_labels(const Dataset& data, const TransitionMatrix& c, Rng& rng);

struct ImbalanceSpec {
  double gamma = 1.0;
  std::size_t n_max = 5000;
  std::size_t n_min = 250;
};

/// Class sizes n_c = round(a / (b + (c - 1)^gamma)) for c = 1..k, with a and b
/// solved so that n_1 = n_max and n_k = n_min. Rounding is half-to-even.
std::vector<std::size_t> power_law_sizes(std::size_t k, const ImbalanceSpec& spec);

/// Exactly sizes[c] examples of class c, drawn without replacement. The
/// selection keeps dataset order.
Dataset subsample_imbalanced(const Dataset& data, std::span<const std::size_t> sizes, Rng& rng);

/// Partitions the dataset by the given fractions. Within each class the
/// examples are shuffled and apportioned so that every part receives its
/// share of each class up to rounding.
std::vector<Dataset> split(const Dataset& data, std::span<const double> fractions, Rng& rng);

/// Random permutation of the examples.
Dataset shuffled(const Dataset& data, Rng& rng);

/// CRC32 of the raw feature and label bytes, handy for logging what data an
/// experiment consumed.
std::uint32_t checksum(const Dataset& data);

}  // namespace prl
