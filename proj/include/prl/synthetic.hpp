#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "prl/dataset.hpp"
#include "prl/rng.hpp"
#include "prl/tensor.hpp"

namespace prl {

/// Distribution that class means are drawn from: center + basis * u with
/// u uniform in [-scale, scale]^r, clamped to the unit box. An empty basis
/// means "uniform in the unit box".
struct MeanPrior {
  std::vector<double> center;
  Tensor basis;  // d x r
  double scale = 0.5;

  std::vector<double> draw(std::size_t d, Rng& rng) const;
};

/// Isotropic Gaussian mixture, one component per class.
struct MixtureSpec {
  std::size_t k = 0;
  std::size_t d = 0;
  std::vector<double> means;  // k x d
  double sigma = 0.1;
  std::vector<std::size_t> samples_per_class;
  MeanPrior prior;

  std::span<const double> mean(std::size_t c) const { return {means.data() + c * d, d}; }
  void validate() const;
};

/// Draws k class means from a prior whose basis spans a random
/// latent_dim-dimensional subspace through the center of the unit box
/// (latent_dim == 0 or >= d: uniform in the box).
MixtureSpec make_mixture_spec(std::size_t k, std::size_t d, double sigma,
                              std::size_t samples_per_class, std::size_t latent_dim,
                              double mean_scale, Rng& rng);

/// Samples every class around its mean with spread sigma, clamped to [0, 1].
/// Examples are grouped by class.
Dataset gen_mixture(const MixtureSpec& spec, Rng& rng);

struct SourceTaskOptions {
  std::size_t extra_classes = 20;
  bool remove_related = false;
  /// Source classes whose mean lies strictly closer than this (Euclidean)
  /// to a target mean are dropped when remove_related is set.
  double related_radius = 0.0;
  /// Per-class sample count of the source task; 0 keeps the target's.
  std::size_t samples_per_class = 0;
};

/// Source task = target classes followed by extra classes with fresh means
/// from the target's prior, optionally with target-related classes removed.
MixtureSpec make_source_task(const MixtureSpec& target, const SourceTaskOptions& options,
                             Rng& rng);

enum class OodKind { gaussian, rademacher, blobs };

OodKind parse_ood_kind(std::string_view name);
std::string_view to_string(OodKind kind);

/// Synthetic out-of-distribution inputs (n x d):
///   gaussian   - N(0.5, 0.25^2) per coordinate, clamped to [0, 1]
///   rademacher - each coordinate 0 or 1 with probability 1/2
///   blobs      - consecutive blocks of block_size coordinates share one
///                uniform value
Tensor gen_ood(OodKind kind, std::size_t n, std::size_t d, Rng& rng, std::size_t block_size = 4);

}  // namespace prl
