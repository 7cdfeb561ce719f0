// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Trend criteria read their configs from
// ACCEPTANCE_CONFIG_DIR and use seeds that played no part in choosing them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "prl/adversary.hpp"
#include "prl/config.hpp"
#include "prl/corrections.hpp"
#include "prl/dataset.hpp"
#include "prl/dataset_io.hpp"
#include "prl/experiments.hpp"
#include "prl/mlp.hpp"
#include "prl/records.hpp"
#include "prl/rng.hpp"
#include "prl/synthetic.hpp"
#include "prl/uncertainty.hpp"

using namespace prl;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig load_config(const std::string& name, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  KeyValueConfig kv = KeyValueConfig::load(fs::path(ACCEPTANCE_CONFIG_DIR) / name);
  for (const auto& [k, v] : extra) kv.set(k, v);
  return ExperimentConfig::from(kv);
}

Tensor uniform_batch(std::size_t n, std::size_t d, Rng& rng) {
  Tensor x = Tensor::matrix(n, d);
  for (double& v : x.values()) v = rng.uniform();
  return x;
}

std::vector<std::uint16_t> random_labels(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::uint16_t> y(n);
  for (auto& v : y) v = static_cast<std::uint16_t>(rng.below(k));
  return y;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// Records produced by the trend criteria, re-run by the reproducibility check.
std::vector<RunRecord> g_recorded;

Verdict gradient_oracle() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const double h = 1e-6;
  double worst = 0.0;
  std::size_t checked = 0;
  const int nets = 25;
  for (int trial = 0; trial < nets; ++trial) {
    Rng rng(derive_seed(1, static_cast<std::uint64_t>(trial)));
    std::vector<std::size_t> dims{2 + rng.below(5)};
    const std::size_t depth = 1 + rng.below(3);
    for (std::size_t l = 0; l < depth; ++l) dims.push_back(2 + rng.below(6));
    dims.push_back(2 + rng.below(4));
    Mlp net = Mlp::create(dims, trial % 3 == 0 ? 0.25 : 0.0, rng);
    for (auto& layer : net.layers) {
      for (double& b : layer.bias.values()) b = 0.1 * rng.normal();
    }
    const Tensor x = uniform_batch(5, dims.front(), rng);
    const auto y = random_labels(5, dims.back(), rng);
    const std::uint64_t mask_seed = 7000 + trial;

    Rng mask(mask_seed);
    auto [logits, trace] = forward(net, x, true, mask);
    const Gradients g = backward(net, trace, softmax_xent(logits, y).dlogits);
    auto loss_at = [&](const Tensor& input) {
      return oracle::xent_loss(net, input, y, true, mask_seed);
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      for (int which = 0; which < 2; ++which) {
        Tensor& p = which ? net.layers[l].bias : net.layers[l].weight;
        const Tensor& gp = which ? g.layers[l].bias : g.layers[l].weight;
        for (std::size_t i = 0; i < p.size(); ++i) {
          const double keep = p[i];
          p[i] = keep + h;
          const double up = loss_at(x);
          p[i] = keep - h;
          const double dn = loss_at(x);
          p[i] = keep;
          worst = std::max(worst, oracle::rel_err(gp[i], (up - dn) / (2 * h)));
          ++checked;
        }
      }
    }
    Tensor xp = x;
    for (std::size_t i = 0; i < xp.size(); ++i) {
      const double keep = xp[i];
      xp[i] = keep + h;
      const double up = loss_at(xp);
      xp[i] = keep - h;
      const double dn = loss_at(xp);
      xp[i] = keep;
      worst = std::max(worst, oracle::rel_err(g.input_grad[i], (up - dn) / (2 * h)));
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  v.require(worst < 1e-4, "max rel err " + fmt("%.3g", worst));
  v.require(secs < 60.0, "runtime " + fmt("%.1f", secs) + " s");
  v.detail = std::to_string(nets) + " nets, " + std::to_string(checked) + " gradients, max rel err " +
             fmt("%.3g", worst) + ", " + fmt("%.1f", secs) + " s" + (v.pass ? "" : " | " + v.detail);
  return v;
}

std::vector<double> scores(std::size_t n, Rng& rng, bool ties) {
  std::vector<double> s(n);
  for (double& x : s) x = ties ? static_cast<double>(rng.below(6)) : rng.normal();
  return s;
}

Verdict metric_oracles() {
  Verdict v;
  Rng rng(2);
  int auroc_bad = 0;
  double aupr_worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto in = scores(1 + rng.below(100), rng, t % 2 == 1);
    const auto out = scores(1 + rng.below(100), rng, t % 2 == 1);
    auroc_bad += !same_bits(auroc(in, out), oracle::brute_auroc(in, out));
    aupr_worst = std::max(aupr_worst, std::abs(aupr(in, out) - oracle::threshold_aupr(in, out)));
  }
  v.require(auroc_bad == 0, std::to_string(auroc_bad) + " AUROC mismatches");
  v.require(aupr_worst <= 1e-12, "AUPR diff " + fmt("%.3g", aupr_worst));

  // Bins (confidence 0.1, accuracy 0) and (0.15, accuracy 0.25).
  std::vector<CalibrationSample> two_bin;
  for (int i = 0; i < 4; ++i) two_bin.push_back({0.1, false});
  for (int i = 0; i < 4; ++i) two_bin.push_back({0.15, i == 0});
  const double rms = rms_calibration_error(two_bin, 4);
  const double mad = mad_calibration_error(two_bin, 4);
  v.require(rms == 0.1 && mad == 0.1, "two-bin RMS " + fmt("%.17g", rms) + " MAD " + fmt("%.17g", mad));

  double fwd_worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 2 + rng.below(9), n = 1 + rng.below(30);
    Tensor z = Tensor::matrix(n, k);
    for (double& x : z.values()) x = 3.0 * rng.normal();
    const auto y = random_labels(n, k, rng);
    const LossResult a = forward_loss(z, y, TransitionMatrix::identity(k));
    const LossResult b = softmax_xent(z, y);
    fwd_worst = std::max(fwd_worst, std::abs(a.loss - b.loss));
    for (std::size_t i = 0; i < a.dlogits.size(); ++i) {
      fwd_worst = std::max(fwd_worst, std::abs(a.dlogits[i] - b.dlogits[i]));
    }
  }
  v.require(fwd_worst <= 1e-12, "forward loss diff " + fmt("%.3g", fwd_worst));
  if (v.pass) {
    v.detail = "AUROC exact on 100 sets, AUPR diff " + fmt("%.2g", aupr_worst) +
               ", two-bin RMS = MAD = 0.1, forward(I) diff " + fmt("%.2g", fwd_worst);
  }
  return v;
}

Verdict corruption_machinery() {
  Verdict v;
  const std::uint32_t k = 5;
  const std::size_t per_class = 100000;
  Dataset data = Dataset::empty(1, k);
  const float x = 0.5f;
  for (std::uint32_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) data.append(std::span<const float>(&x, 1), static_cast<std::uint16_t>(c));
  }
  double worst = 0.0;
  for (double s : {0.0, 0.3, 0.6, 1.0}) {
    const auto c = make_uniform_noise_matrix(k, s);
    Rng rng(derive_seed(3, fmt("%g", s)));
    const Dataset noisy = corrupt_labels(data, c, rng);
    std::vector<double> freq(k * k, 0.0);
    for (std::size_t i = 0; i < data.n; ++i) {
      freq[data.labels[i] * k + noisy.labels[i]] += 1.0 / static_cast<double>(per_class);
    }
    for (std::size_t i = 0; i < k * k; ++i) worst = std::max(worst, std::abs(freq[i] - c.entries[i]));
  }
  v.require(worst < 0.01, "transition max-abs " + fmt("%.4f", worst));

  std::vector<double> s;
  for (int i = 0; i <= 10; ++i) s.push_back(i / 10.0);
  for (double e : {0.0, 0.37, 0.1, 1.0 / 3.0, 0.9}) {
    const std::vector<double> flat(s.size(), e);
    const double a = error_curve_auc(s, flat);
    v.require(same_bits(a, e), "constant curve " + fmt("%.17g", e) + " gave " + fmt("%.17g", a));
  }
  const double lin = error_curve_auc(s, s);
  v.require(lin == 0.5, "linear curve gave " + fmt("%.17g", lin));
  if (v.pass) v.detail = "transition max-abs " + fmt("%.4f", worst) + ", constant and linear AUC exact";
  return v;
}

Verdict imbalance_machinery() {
  Verdict v;
  for (double g : {0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0}) {
    const auto sizes = power_law_sizes(10, {g, 5000, 250});
    v.require(sizes.front() == 5000 && sizes.back() == 250,
              "gamma " + fmt("%g", g) + " gives (" + std::to_string(sizes.front()) + ", " +
                  std::to_string(sizes.back()) + ")");
  }

  Rng rng(4);
  std::size_t synthetic = 0, off_segment = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 2 + rng.below(4);
    Dataset data = Dataset::empty(d, 3);
    std::vector<double> row(d);
    const std::size_t sizes[] = {30, 2 + rng.below(12), 2 + rng.below(6)};
    for (std::uint16_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < sizes[c]; ++i) {
        for (double& x : row) x = rng.uniform();
        data.append(std::span<const double>(row), c);
      }
    }
    const Dataset out = smote(data, 1 + rng.below(5), rng);
    for (std::size_t i = data.n; i < out.n; ++i) {
      ++synthetic;
      // Some same-class pair (a, b) must satisfy x = a + u (b - a), u in [0, 1].
      bool found = false;
      for (std::size_t a = 0; a < data.n && !found; ++a) {
        if (data.labels[a] != out.labels[i]) continue;
        for (std::size_t b = 0; b < data.n && !found; ++b) {
          if (b == a || data.labels[b] != out.labels[i]) continue;
          bool ok = true;
          double u = -1.0;
          for (std::size_t j = 0; j < d && ok; ++j) {
            const double xa = data.row(a)[j], xb = data.row(b)[j], xs = out.row(i)[j];
            ok = xs >= std::min(xa, xb) && xs <= std::max(xa, xb);
            if (ok && std::abs(xb - xa) > 1e-2) {
              const double uj = (xs - xa) / (xb - xa);
              if (u < 0) u = uj;
              ok = std::abs(uj - u) < 1e-4;
            }
          }
          found = ok;
        }
      }
      off_segment += !found;
    }
  }
  v.require(off_segment == 0, std::to_string(off_segment) + " synthetic points off-segment");
  if (v.pass) {
    v.detail = "7 gammas hit (5000, 250), " + std::to_string(synthetic) + " SMOTE points on segments";
  }
  return v;
}

Verdict attack_feasibility() {
  Verdict v;
  Rng rng(5);
  std::size_t violations = 0;
  const int invocations = 10000;
  for (int t = 0; t < invocations; ++t) {
    const std::size_t d = 2 + rng.below(5), k = 2 + rng.below(3);
    Rng init(derive_seed(55, static_cast<std::uint64_t>(t)));
    const Mlp net = Mlp::create(std::vector<std::size_t>{d, 8, k}, 0.0, init);
    Tensor x = Tensor::matrix(3, d);
    for (double& xv : x.values()) xv = rng.bernoulli(0.2) ? std::round(rng.uniform()) : rng.uniform();
    const auto y = random_labels(3, k, rng);
    const double eps = rng.uniform(0.0, 0.3);
    const auto spec = AttackSpec::linf(eps, 1 + static_cast<int>(rng.below(5)),
                                       1 + static_cast<int>(rng.below(2)), rng.bernoulli(0.5));
    const Tensor xa = pgd_attack(net, x, y, spec, static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < x.size(); ++i) {
      violations += !(std::abs(xa[i] - x[i]) <= eps && xa[i] >= 0.0 && xa[i] <= 1.0);
    }
  }
  v.require(violations == 0, std::to_string(violations) + " infeasible coordinates");

  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 2 + rng.below(6), k = 2 + rng.below(4), n = 4;
    Rng init(derive_seed(56, static_cast<std::uint64_t>(t)));
    const Mlp net = Mlp::create(std::vector<std::size_t>{d, k}, 0.0, init);
    const Tensor x = uniform_batch(n, d, rng);
    const auto y = random_labels(n, k, rng);
    const double eps = rng.uniform(0.01, 0.2);
    AttackSpec spec = AttackSpec::linf(eps, 1, 1, false);
    spec.step_size = eps * rng.uniform(0.3, 1.5);
    const Tensor xa = pgd_attack(net, x, y, spec, 1);
    const Layer& layer = net.layers[0];
    for (std::size_t r = 0; r < n; ++r) {
      // Input gradient of softmax cross-entropy for z = W x + b is W^T (p - e_y).
      std::vector<double> z(k), p(k);
      double m = -1e300, total = 0.0;
      for (std::size_t o = 0; o < k; ++o) {
        z[o] = layer.bias[o];
        for (std::size_t i = 0; i < d; ++i) z[o] += layer.weight(o, i) * x(r, i);
        m = std::max(m, z[o]);
      }
      for (std::size_t o = 0; o < k; ++o) total += p[o] = std::exp(z[o] - m);
      for (double& q : p) q /= total;
      for (std::size_t i = 0; i < d; ++i) {
        double g = 0.0;
        for (std::size_t o = 0; o < k; ++o) g += layer.weight(o, i) * (p[o] - (o == y[r] ? 1.0 : 0.0));
        const double sign = g > 0 ? 1.0 : (g < 0 ? -1.0 : 0.0);
        const double expect = std::clamp(x(r, i) + spec.step_size * sign, std::max(0.0, x(r, i) - eps),
                                         std::min(1.0, x(r, i) + eps));
        worst = std::max(worst, std::abs(xa(r, i) - expect));
      }
    }
  }
  v.require(worst <= 1e-12, "linear closed-form diff " + fmt("%.3g", worst));
  if (v.pass) {
    v.detail = std::to_string(invocations) + " PGD invocations feasible, linear closed-form diff " + fmt("%.2g", worst);
  }
  return v;
}

Verdict memorization_trend() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = load_config("memorize.conf");
  int hits = 0;
  std::string gaps;
  for (std::uint64_t seed : cfg.seeds) {
    const RunRecord r = memorization_curve(cfg, seed);
    if (seed == cfg.seeds.front()) g_recorded.push_back(r);
    const double gap = r.metric("final_test_error") - r.metric("min_test_error");
    hits += gap >= 0.02;
    gaps += (gaps.empty() ? "" : " ") + fmt("%+.3f", gap);
  }
  const double secs = seconds_since(t0);
  v.require(hits >= 4, "only " + std::to_string(hits) + "/5 seeds");
  v.require(secs < 600.0, "runtime " + fmt("%.0f", secs) + " s");
  v.detail = "final minus min error per seed [" + gaps + "], " + std::to_string(hits) + "/5 >= 0.02, " +
             fmt("%.0f", secs) + " s" + (v.pass ? "" : " | " + v.detail);
  return v;
}

Verdict corruption_trend() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = load_config("corruption.conf");
  int wins = 0;
  std::string deltas;
  for (std::uint64_t seed : cfg.seeds) {
    const PairedRuns p = pretrain_compare(cfg, ExperimentKind::corruption, seed);
    if (seed == cfg.seeds.front()) g_recorded.push_back(p.pretrained);
    const double d = p.pretrained.metric("error_curve_auc") - p.scratch.metric("error_curve_auc");
    wins += d < 0.0;
    deltas += (deltas.empty() ? "" : " ") + fmt("%+.3f", d);
  }
  const double secs = seconds_since(t0);
  v.require(wins >= 4, "only " + std::to_string(wins) + "/5 seeds");
  v.require(secs < 1200.0, "runtime " + fmt("%.0f", secs) + " s");
  v.detail = "AUC pre-trained minus scratch [" + deltas + "], " + std::to_string(wins) + "/5 lower, " +
             fmt("%.0f", secs) + " s" + (v.pass ? "" : " | " + v.detail);
  return v;
}

Verdict adversarial_trend() {
  Verdict v;
  const ExperimentConfig cfg = load_config("adversarial.conf");
  const ExperimentConfig removed_cfg = load_config(
      "adversarial.conf", {{"pretrain.remove_related", "true"}, {"pretrain.related_radius", "0.3"}});
  int wins = 0;
  double gap = 0.0, shift = 0.0;
  std::string deltas;
  for (std::uint64_t seed : cfg.seeds) {
    const PairedRuns p = pretrain_compare(cfg, ExperimentKind::adversarial, seed);
    if (seed == cfg.seeds.front()) g_recorded.push_back(p.pretrained);
    const double pre = p.pretrained.metric("robust_accuracy");
    const double d = pre - p.scratch.metric("robust_accuracy");
    const RunRecord ablated = run_record(removed_cfg, {ExperimentKind::adversarial, seed, true, 0.0});
    wins += d > 0.0;
    gap += d / static_cast<double>(cfg.seeds.size());
    shift += (ablated.metric("robust_accuracy") - pre) / static_cast<double>(cfg.seeds.size());
    deltas += (deltas.empty() ? "" : " ") + fmt("%+.3f", d);
  }
  v.require(wins >= 4, "only " + std::to_string(wins) + "/5 seeds");
  v.require(gap > 0.0 && std::abs(shift) < gap, "ablation shift " + fmt("%+.4f", shift) + " vs gap " + fmt("%.4f", gap));
  v.detail = "robust acc pre-trained minus scratch [" + deltas + "], " + std::to_string(wins) +
             "/5 higher; mean gap " + fmt("%.4f", gap) + ", related-removed shift " + fmt("%+.4f", shift) +
             (v.pass ? "" : " | " + v.detail);
  return v;
}

Verdict uncertainty_trend() {
  Verdict v;
  const ExperimentConfig cfg = load_config("uncertainty.conf");
  int auroc_wins = 0, tuned_wins = 0, scratch_tuned_wins = 0;
  std::string deltas;
  for (std::uint64_t seed : cfg.seeds) {
    const PairedRuns p = pretrain_compare(cfg, ExperimentKind::uncertainty, seed);
    if (seed == cfg.seeds.front()) g_recorded.push_back(p.pretrained);
    const double d = p.pretrained.metric("mean_auroc") - p.scratch.metric("mean_auroc");
    auroc_wins += d >= 0.0;
    tuned_wins += p.pretrained.metric("rms_calibration_error_tuned") < p.pretrained.metric("rms_calibration_error");
    scratch_tuned_wins += p.scratch.metric("rms_calibration_error_tuned") < p.scratch.metric("rms_calibration_error");
    deltas += (deltas.empty() ? "" : " ") + fmt("%+.3f", d);
  }
  v.require(auroc_wins >= 4, "AUROC only " + std::to_string(auroc_wins) + "/5 seeds");
  v.require(tuned_wins >= 4, "temperature tuning only " + std::to_string(tuned_wins) + "/5 seeds");
  v.detail = "mean AUROC pre-trained minus scratch [" + deltas + "], " + std::to_string(auroc_wins) +
             "/5 not lower; tuning lowers RMS in " + std::to_string(tuned_wins) + "/5 pre-trained (" +
             std::to_string(scratch_tuned_wins) + "/5 scratch)" + (v.pass ? "" : " | " + v.detail);
  return v;
}

ExperimentConfig tiny_config() {
  return ExperimentConfig::from(KeyValueConfig::parse(R"(
task.dim = 6
task.classes = 3
task.train_per_class = 40
task.test_per_class = 40
task.sigma = 0.15
model.hidden = 16
train.epochs = 5
train.batch_size = 32
pretrain.enabled = true
pretrain.extra_classes = 3
pretrain.epochs = 3
finetune.epochs = 3
attack.epsilon = 0.03
attack.steps = 3
eval_attack.epsilon = 0.03
eval_attack.steps = 5
sweep.strengths = 0, 0.5, 1
sweep.gammas = 0.5, 2
sweep.n_max = 60
sweep.n_min = 10
ood.samples = 50
calibration.bin_size = 20
train.schedule = step
train.drop_epochs = 2, 4
memorize.strength = 0.6
)"));
}

Verdict reproducibility() {
  Verdict v;
  const fs::path dir = fs::temp_directory_path() / ("prl_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);

  std::vector<RunRecord> records = g_recorded;
  const ExperimentConfig tiny = tiny_config();
  for (auto kind : {ExperimentKind::corruption, ExperimentKind::imbalance, ExperimentKind::adversarial,
                    ExperimentKind::uncertainty}) {
    for (bool pre : {false, true}) {
      const double point = kind == ExperimentKind::imbalance ? 0.5 : 0.0;
      records.push_back(run_record(tiny, {kind, 3, pre, point}));
    }
  }
  records.push_back(memorization_curve(tiny, 3));
  const auto sweep = corruption_sweep(tiny, 4, true);
  records.push_back(sweep.records.back());
  write_records(records, dir);

  std::size_t metrics = 0;
  for (const RunRecord& original : records) {
    const RunRecord stored = read_record_json(dir / "runs" / (original.run_id + ".json"));
    const RunRecord again = rerun(stored);
    bool same = again.run_id == original.run_id && again.metrics.size() == original.metrics.size() &&
                again.series.size() == original.series.size();
    for (std::size_t i = 0; same && i < again.metrics.size(); ++i) {
      same = again.metrics[i].first == original.metrics[i].first &&
             same_bits(again.metrics[i].second, original.metrics[i].second) &&
             same_bits(stored.metrics[i].second, original.metrics[i].second);
    }
    for (std::size_t i = 0; same && i < again.series.size(); ++i) {
      same = same_bits(again.series[i], original.series[i]);
    }
    metrics += original.metrics.size();
    v.require(same, "run " + original.run_id + " (" + original.experiment + ") differs");
  }

  Rng rng(10);
  const auto spec = make_mixture_spec(7, 9, 0.25, 50, 0, 0.5, rng);
  const Dataset data = gen_mixture(spec, rng);
  const fs::path file = dir / "roundtrip.prlb";
  write_dataset(data, file);
  std::ifstream in(file, std::ios::binary);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), {});
  const Dataset back = read_dataset(file);
  const auto reencoded = encode_dataset(back);
  v.require(back == data && checksum(back) == checksum(data), "dataset round trip differs");
  v.require(bytes == reencoded && bytes == encode_dataset(data), "re-encoded bytes differ (CRC included)");
  fs::remove_all(dir);
  if (v.pass) {
    v.detail = std::to_string(records.size()) + " runs (" + std::to_string(metrics) +
               " metrics) rerun bit-identically, dataset bytes and CRC round-trip";
  }
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"gradient oracle", gradient_oracle},
      {"metric oracles", metric_oracles},
      {"corruption machinery", corruption_machinery},
      {"imbalance machinery", imbalance_machinery},
      {"attack feasibility", attack_feasibility},
      {"memorization trend", memorization_trend},
      {"pre-training vs scratch under corruption", corruption_trend},
      {"adversarial pre-training", adversarial_trend},
      {"uncertainty", uncertainty_trend},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.pass;
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
