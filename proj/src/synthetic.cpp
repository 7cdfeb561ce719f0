#include "prl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prl/error.hpp"

namespace prl {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Orthonormal d x r basis from Gram-Schmidt on Gaussian columns.
Tensor random_basis(std::size_t d, std::size_t r, Rng& rng) {
  Tensor q = Tensor::matrix(d, r);
  for (std::size_t j = 0; j < r; ++j) {
    std::vector<double> v(d);
    while (true) {
      for (double& x : v) x = rng.normal();
      for (std::size_t p = 0; p < j; ++p) {
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += v[i] * q(i, p);
        for (std::size_t i = 0; i < d; ++i) v[i] -= dot * q(i, p);
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-8) {
        for (std::size_t i = 0; i < d; ++i) q(i, j) = v[i] / norm;
        break;
      }
    }
  }
  return q;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

std::vector<double> MeanPrior::draw(std::size_t d, Rng& rng) const {
  std::vector<double> m(d);
  if (basis.size() == 0) {
    for (double& v : m) v = rng.uniform();
    return m;
  }
  if (center.size() != d || basis.rows() != d) throw DataError("MeanPrior: dimension mismatch");
  std::vector<double> u(basis.cols());
  for (double& v : u) v = rng.uniform(-scale, scale);
  for (std::size_t i = 0; i < d; ++i) {
    double v = center[i];
    for (std::size_t j = 0; j < u.size(); ++j) v += basis(i, j) * u[j];
    m[i] = clamp01(v);
  }
  return m;
}

void MixtureSpec::validate() const {
  if (k == 0 || d == 0) throw DataError("MixtureSpec: empty class or feature dimension");
  if (!(sigma >= 0.0)) throw DataError("MixtureSpec: sigma must be non-negative");
  if (means.size() != k * d) throw DataError("MixtureSpec: means must be k x d");
  if (samples_per_class.size() != k) throw DataError("MixtureSpec: one sample count per class");
  for (double m : means) {
    if (!(m >= 0.0 && m <= 1.0)) throw DataError("MixtureSpec: mean outside [0, 1]");
  }
}

MixtureSpec make_mixture_spec(std::size_t k, std::size_t d, double sigma,
                              std::size_t samples_per_class, std::size_t latent_dim,
                              double mean_scale, Rng& rng) {
  MixtureSpec spec;
  spec.k = k;
  spec.d = d;
  spec.sigma = sigma;
  spec.samples_per_class.assign(k, samples_per_class);
  if (latent_dim > 0 && latent_dim < d) {
    spec.prior.center.assign(d, 0.5);
    spec.prior.basis = random_basis(d, latent_dim, rng);
    spec.prior.scale = mean_scale;
  }
  for (std::size_t c = 0; c < k; ++c) {
    auto m = spec.prior.draw(d, rng);
    spec.means.insert(spec.means.end(), m.begin(), m.end());
  }
  spec.validate();
  return spec;
}

Dataset gen_mixture(const MixtureSpec& spec, Rng& rng) {
  spec.validate();
  if (spec.k > 65535) throw DataError("gen_mixture: too many classes for 16-bit labels");
  Dataset out = Dataset::empty(spec.d, static_cast<std::uint32_t>(spec.k));
  std::vector<double> x(spec.d);
  for (std::size_t c = 0; c < spec.k; ++c) {
    auto mu = spec.mean(c);
    for (std::size_t s = 0; s < spec.samples_per_class[c]; ++s) {
      for (std::size_t i = 0; i < spec.d; ++i) x[i] = clamp01(mu[i] + spec.sigma * rng.normal());
      out.append(std::span<const double>(x), static_cast<std::uint16_t>(c));
    }
  }
  return out;
}

MixtureSpec make_source_task(const MixtureSpec& target, const SourceTaskOptions& options,
                             Rng& rng) {
  target.validate();
  const std::size_t per_class =
      options.samples_per_class > 0 ? options.samples_per_class : target.samples_per_class.front();
  std::vector<std::vector<double>> means;
  for (std::size_t c = 0; c < target.k; ++c) {
    auto m = target.mean(c);
    means.emplace_back(m.begin(), m.end());
  }
  for (std::size_t e = 0; e < options.extra_classes; ++e) {
    means.push_back(target.prior.draw(target.d, rng));
  }

  MixtureSpec source = target;
  source.means.clear();
  source.samples_per_class.clear();
  for (const auto& m : means) {
    if (options.remove_related) {
      bool related = false;
      for (std::size_t c = 0; c < target.k && !related; ++c) {
        related = distance(m, target.mean(c)) < options.related_radius;
      }
      if (related) continue;
    }
    source.means.insert(source.means.end(), m.begin(), m.end());
    source.samples_per_class.push_back(per_class);
  }
  source.k = source.samples_per_class.size();
  if (source.k == 0) throw DataError("make_source_task: removing related classes left no classes");
  source.validate();
  return source;
}

OodKind parse_ood_kind(std::string_view name) {
  if (name == "gaussian") return OodKind::gaussian;
  if (name == "rademacher") return OodKind::rademacher;
  if (name == "blobs") return OodKind::blobs;
  throw DataError("unknown OOD kind '" + std::string(name) + "'");
}

std::string_view to_string(OodKind kind) {
  switch (kind) {
    case OodKind::gaussian:
      return "gaussian";
    case OodKind::rademacher:
      return "rademacher";
    case OodKind::blobs:
      return "blobs";
  }
  return "unknown";
}

Tensor gen_ood(OodKind kind, std::size_t n, std::size_t d, Rng& rng, std::size_t block_size) {
  if (n == 0 || d == 0) throw DataError("gen_ood: n and d must be positive");
  Tensor x = Tensor::matrix(n, d);
  switch (kind) {
    case OodKind::gaussian:
      for (double& v : x.values()) v = clamp01(rng.normal(0.5, 0.25));
      break;
    case OodKind::rademacher:
      for (double& v : x.values()) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
      break;
    case OodKind::blobs: {
      if (block_size == 0) throw DataError("gen_ood: block size must be positive");
      for (std::size_t r = 0; r < n; ++r) {
        auto row = x.row(r);
        for (std::size_t start = 0; start < d; start += block_size) {
          const double v = rng.uniform();
          for (std::size_t i = start; i < std::min(d, start + block_size); ++i) row[i] = v;
        }
      }
      break;
    }
  }
  return x;
}

}  // namespace prl
