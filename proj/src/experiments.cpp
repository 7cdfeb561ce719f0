#include "prl/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numeric>

#include "prl/adversary.hpp"
#include "prl/corrections.hpp"
#include "prl/error.hpp"
#include "prl/training.hpp"
#include "prl/uncertainty.hpp"

namespace prl {
namespace {

std::string hex32(std::uint32_t v) {
  char buf[12];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string point_name(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "test_error_s%g", s);
  return buf;
}

std::vector<std::size_t> layer_dims(const ExperimentConfig& cfg, std::size_t in, std::size_t out) {
  std::vector<std::size_t> dims{in};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(out);
  return dims;
}

bool adversarial_run(const ExperimentConfig& cfg, ExperimentKind kind) {
  return kind == ExperimentKind::adversarial || cfg.method == Method::adversarial;
}

TrainSpec target_spec(const ExperimentConfig& cfg, const Mlp& net, bool pretrained) {
  if (!pretrained) return cfg.train.spec;
  TrainSpec spec = cfg.finetune.train.spec;
  spec.first_trainable_layer =
      cfg.finetune.mode == FinetuneMode::last_layer ? net.layers.size() - 1 : 0;
  return spec;
}

AdvTrainSpec adv_spec(const ExperimentConfig& cfg, const TrainSpec& train) {
  AdvTrainSpec spec;
  spec.train_attack = cfg.attack;
  spec.eval_attack = cfg.eval_attack;
  spec.train = train;
  return spec;
}

Mlp pretrain_source(const ExperimentConfig& cfg, const World& world, std::uint64_t seed,
                    bool adversarial) {
  const std::uint64_t model_seed = derive_seed(seed, "source-model");
  if (adversarial) {
    AdvPretrainConfig pc;
    pc.hidden = cfg.hidden;
    pc.pretrain = adv_spec(cfg, cfg.pretrain.train.spec);
    return adversarial_pretrain(world.source, pc, model_seed);
  }
  Rng init(derive_seed(model_seed, "init"));
  Mlp net = Mlp::create(layer_dims(cfg, world.source.d, world.source.k), cfg.pretrain.train.dropout,
                        init);
  Rng rng(derive_seed(model_seed, "pretrain"));
  fit(net, world.source, cfg.pretrain.train.spec, rng);
  return net;
}

struct CacheEntry {
  std::string key;
  Mlp net;
};

Mlp cached_source_model(const ExperimentConfig& cfg, const World& world, std::uint64_t seed,
                        bool adversarial) {
  // Only the fields that shape the source model enter the key.
  KeyValueConfig kv = cfg.to_kv();
  std::string key = std::to_string(seed) + (adversarial ? "/adv/" : "/std/");
  for (const auto& [k, v] : kv.entries()) {
    if (k.rfind("task.", 0) == 0 || k.rfind("pretrain.", 0) == 0 || k == "model.hidden" ||
        (adversarial && k.rfind("attack.", 0) == 0)) {
      key += k + "=" + v + ";";
    }
  }
  static std::mutex mu;
  static std::vector<CacheEntry> cache;
  {
    std::lock_guard lock(mu);
    for (const auto& e : cache) {
      if (e.key == key) return e.net;
    }
  }
  Mlp net = pretrain_source(cfg, world, seed, adversarial);
  std::lock_guard lock(mu);
  cache.push_back({key, net});
  if (cache.size() > 16) cache.erase(cache.begin());
  return net;
}

Mlp initial_model_impl(const ExperimentConfig& cfg, const World& world, std::uint64_t seed,
                       bool pretrained, bool adversarial) {
  if (!pretrained) {
    Rng init(derive_seed(seed, "init"));
    return Mlp::create(layer_dims(cfg, world.train.d, world.train.k), cfg.train.dropout, init);
  }
  if (world.source.d != world.train.d) {
    throw ConfigError("pre-training: source and target input dimensions differ");
  }
  Mlp net = cached_source_model(cfg, world, seed, adversarial);
  Rng head(derive_seed(seed, "head"));
  replace_head(net, world.train.k, head);
  net.dropout_rate = cfg.finetune.train.dropout;
  return net;
}

void record_data(RunOutcome& out, const std::string& name, const Dataset& data) {
  out.provenance[name] = hex32(checksum(data));
}

// Trains a model on (possibly noisy) data with the configured method.
// trusted_split is used by GLC only.
Mlp train_with_method(const ExperimentConfig& cfg, const World& world, const RunSpec& spec,
                      const Dataset& data, const TrustedSplit* trusted_split) {
  const bool adversarial = adversarial_run(cfg, spec.kind);
  Mlp net = initial_model_impl(cfg, world, spec.seed, spec.pretrained, adversarial);
  const TrainSpec train = target_spec(cfg, net, spec.pretrained);
  Rng rng(derive_seed(spec.seed, "fit"));
  switch (cfg.method) {
    case Method::none:
      fit(net, data, train, rng);
      break;
    case Method::forward: {
      Mlp first = net;
      fit(first, data, train, rng);
      const TransitionMatrix c_hat = estimate_c_confidence(first, data);
      Rng second(derive_seed(spec.seed, "fit-corrected"));
      forward_train(net, data, c_hat, train, second);
      break;
    }
    case Method::glc: {
      if (!trusted_split) throw ConfigError("method glc needs a label-corruption experiment");
      Mlp first = net;
      fit(first, trusted_split->untrusted, train, rng);
      const TransitionMatrix c_hat = glc_estimate(first, trusted_split->trusted);
      Rng second(derive_seed(spec.seed, "fit-corrected"));
      glc_train(net, *trusted_split, c_hat, train, second);
      break;
    }
    case Method::oversample: {
      Rng aug(derive_seed(spec.seed, "augment"));
      fit(net, oversample(data, aug), train, rng);
      break;
    }
    case Method::smote: {
      Rng aug(derive_seed(spec.seed, "augment"));
      fit(net, smote(data, cfg.smote_k, aug), train, rng);
      break;
    }
    case Method::cost_sensitive: {
      const auto counts = data.class_counts();
      cost_sensitive_train(net, data, cost_weights(counts), train, rng);
      break;
    }
    case Method::adversarial:
      adversarial_train(net, data, adv_spec(cfg, train), derive_seed(spec.seed, "adv"));
      break;
  }
  return net;
}

RunOutcome run_corruption(const ExperimentConfig& cfg, const RunSpec& spec, const World& world) {
  if (cfg.method != Method::none && cfg.method != Method::forward && cfg.method != Method::glc) {
    throw ConfigError("label-corruption runs support methods none, forward and glc");
  }
  if (!(spec.point >= 0.0 && spec.point <= 1.0)) {
    throw ConfigError("corruption strength must lie in [0, 1]");
  }
  RunOutcome out;
  const TransitionMatrix c = make_uniform_noise_matrix(world.train.k, spec.point);
  try {
    Mlp net;
    if (cfg.method == Method::glc) {
      Rng rng(derive_seed(spec.seed, "trusted"));
      const TrustedSplit split = make_trusted_split(world.train, cfg.trusted_fraction, c, rng);
      record_data(out, "trusted", split.trusted);
      record_data(out, "untrusted", split.untrusted);
      net = train_with_method(cfg, world, spec, split.untrusted, &split);
    } else {
      Rng rng(derive_seed(spec.seed, "corrupt"));
      const Dataset noisy = corrupt_labels(world.train, c, rng);
      record_data(out, "train_noisy", noisy);
      net = train_with_method(cfg, world, spec, noisy, nullptr);
    }
    out.metrics.emplace_back("test_error", error_rate(net, world.test));
  } catch (const NumericError& e) {
    throw NumericError("corruption strength " + fmt_double(spec.point) + ": " + e.what());
  }
  return out;
}

RunOutcome run_corruption_curve(const ExperimentConfig& cfg, const RunSpec& spec,
                                const World& world) {
  RunOutcome out;
  std::vector<double> errors;
  for (double s : cfg.sweep.strengths) {
    RunSpec point = spec;
    point.kind = ExperimentKind::corruption;
    point.point = s;
    const RunOutcome r = run_corruption(cfg, point, world);
    errors.push_back(r.metrics.front().second);
    out.metrics.emplace_back(point_name(s), errors.back());
  }
  out.metrics.emplace_back("error_curve_auc", error_curve_auc(cfg.sweep.strengths, errors));
  out.series = errors;
  return out;
}

RunOutcome run_imbalance(const ExperimentConfig& cfg, const RunSpec& spec, const World& world) {
  if (cfg.method != Method::none && cfg.method != Method::oversample &&
      cfg.method != Method::smote && cfg.method != Method::cost_sensitive) {
    throw ConfigError("imbalance runs support methods none, oversample, smote and cost_sensitive");
  }
  RunOutcome out;
  ImbalanceSpec is{spec.point, cfg.sweep.n_max, cfg.sweep.n_min};
  const auto sizes = power_law_sizes(world.train.k, is);
  MixtureSpec pool_spec = world.target_spec;
  pool_spec.samples_per_class.assign(pool_spec.k, cfg.sweep.n_max);
  Rng pool_rng(derive_seed(spec.seed, "pool-data"));
  const Dataset pool = gen_mixture(pool_spec, pool_rng);
  Rng sub(derive_seed(spec.seed, "subsample"));
  const Dataset train = subsample_imbalanced(pool, sizes, sub);
  record_data(out, "train_imbalanced", train);
  const Mlp net = train_with_method(cfg, world, spec, train, nullptr);
  const auto per_class = per_class_error(net, world.test);
  out.metrics.emplace_back("total_error", error_rate(net, world.test));
  out.metrics.emplace_back("minority_error", minority_error(per_class, sizes));
  return out;
}

RunOutcome run_memorize(const ExperimentConfig& cfg, const RunSpec& spec, const World& world) {
  if (cfg.train.spec.schedule != LrSchedule::step_drops || cfg.train.spec.drop_epochs.empty()) {
    throw ConfigError("memorization runs need train.schedule = step with drop epochs");
  }
  RunOutcome out;
  const TransitionMatrix c = make_uniform_noise_matrix(world.train.k, cfg.memorize_strength);
  Rng corrupt(derive_seed(spec.seed, "corrupt"));
  const Dataset noisy = corrupt_labels(world.train, c, corrupt);
  MixtureSpec val_spec = world.target_spec;
  val_spec.samples_per_class.assign(val_spec.k, cfg.task.test_per_class);
  Rng val_rng(derive_seed(spec.seed, "val-data"));
  Rng val_corrupt(derive_seed(spec.seed, "val-corrupt"));
  const Dataset noisy_val = corrupt_labels(gen_mixture(val_spec, val_rng), c, val_corrupt);
  record_data(out, "train_noisy", noisy);
  record_data(out, "val_noisy", noisy_val);

  Mlp net = initial_model_impl(cfg, world, spec.seed, spec.pretrained, false);
  const TrainSpec train = target_spec(cfg, net, spec.pretrained);
  std::vector<double> val_errors;
  FitHooks hooks;
  hooks.on_epoch_end = [&](int, const Mlp& current) {
    out.series.push_back(error_rate(current, world.test));
    val_errors.push_back(error_rate(current, noisy_val));
  };
  Rng rng(derive_seed(spec.seed, "fit"));
  fit(net, noisy, train, rng, hooks);

  const auto& s = out.series;
  const auto min_it = std::min_element(s.begin(), s.end());
  const auto stop_it = std::min_element(val_errors.begin(), val_errors.end());
  const auto stop_epoch = static_cast<std::size_t>(stop_it - val_errors.begin());
  out.metrics.emplace_back("final_test_error", s.back());
  out.metrics.emplace_back("min_test_error", *min_it);
  out.metrics.emplace_back("min_epoch", static_cast<double>(min_it - s.begin()));
  out.metrics.emplace_back("early_stop_epoch", static_cast<double>(stop_epoch));
  out.metrics.emplace_back("early_stop_test_error", s[stop_epoch]);
  return out;
}

RunOutcome run_adversarial(const ExperimentConfig& cfg, const RunSpec& spec, const World& world) {
  RunOutcome out;
  ExperimentConfig adv = cfg;
  adv.method = Method::adversarial;
  const Mlp net = train_with_method(adv, world, spec, world.train, nullptr);
  out.metrics.emplace_back("clean_error", error_rate(net, world.test));
  out.metrics.emplace_back("robust_accuracy",
                           robust_accuracy(net, world.test, cfg.eval_attack,
                                           derive_seed(spec.seed, "eval-attack")));
  return out;
}

RunOutcome run_uncertainty(const ExperimentConfig& cfg, const RunSpec& spec, const World& world) {
  if (cfg.method != Method::none) throw ConfigError("uncertainty runs support method none only");
  RunOutcome out;
  const double h = cfg.holdout_fraction;
  if (!(h > 0.0 && h < 1.0)) throw ConfigError("calibration.holdout_fraction must lie in (0, 1)");
  const std::vector<double> fractions{1.0 - h, h};
  Rng split_rng(derive_seed(spec.seed, "holdout"));
  const auto parts = split(world.train, fractions, split_rng);
  record_data(out, "train_fit", parts[0]);
  record_data(out, "holdout", parts[1]);
  const Mlp net = train_with_method(cfg, world, spec, parts[0], nullptr);

  const Tensor test_x = world.test.to_tensor();
  const auto in_scores = msp_scores(net, test_x);
  double auroc_sum = 0.0, aupr_sum = 0.0;
  const OodKind kinds[] = {OodKind::gaussian, OodKind::rademacher, OodKind::blobs};
  for (OodKind kind : kinds) {
    const std::string name(to_string(kind));
    Rng rng(derive_seed(spec.seed, "ood-" + name));
    const Tensor ood = gen_ood(kind, cfg.ood_samples, world.test.d, rng, cfg.ood_block_size);
    const auto out_scores = msp_scores(net, ood);
    const double a = auroc(in_scores, out_scores);
    const double p = aupr(in_scores, out_scores);
    auroc_sum += a;
    aupr_sum += p;
    out.metrics.emplace_back("auroc_" + name, a);
    out.metrics.emplace_back("aupr_" + name, p);
  }
  out.metrics.emplace_back("mean_auroc", auroc_sum / 3.0);
  out.metrics.emplace_back("mean_aupr", aupr_sum / 3.0);
  out.metrics.emplace_back("test_error", error_rate(net, world.test));

  const auto before = calibration_samples(net, world.test, 1.0);
  const Temperature t = temperature_tune(net, parts[1]);
  const auto after = calibration_samples(net, world.test, t.t);
  out.metrics.emplace_back("rms_calibration_error", rms_calibration_error(before, cfg.bin_size));
  out.metrics.emplace_back("mad_calibration_error", mad_calibration_error(before, cfg.bin_size));
  out.metrics.emplace_back("temperature", t.t);
  out.metrics.emplace_back("rms_calibration_error_tuned", rms_calibration_error(after, cfg.bin_size));
  out.metrics.emplace_back("mad_calibration_error_tuned", mad_calibration_error(after, cfg.bin_size));
  return out;
}

std::string method_label(const ExperimentConfig& cfg, ExperimentKind kind) {
  return kind == ExperimentKind::adversarial ? "adversarial" : std::string(to_string(cfg.method));
}

}  // namespace

double error_curve_auc(std::span<const double> strengths, std::span<const double> errors) {
  if (strengths.size() != errors.size() || strengths.size() < 2) {
    throw DataError("error curve: need at least two points and equal lengths");
  }
  // Accumulated relative to the first error so a flat curve returns it exactly.
  const long double base = errors.front();
  long double area = 0.0L;
  long double width = 0.0L;
  for (std::size_t i = 1; i < strengths.size(); ++i) {
    const long double w = static_cast<long double>(strengths[i]) - strengths[i - 1];
    if (!(w > 0.0L)) throw DataError("error curve: strengths must be strictly increasing");
    area += 0.5L * w * ((errors[i] - base) + (errors[i - 1] - base));
    width += w;
  }
  return static_cast<double>(base + area / width);
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "corruption") return ExperimentKind::corruption;
  if (name == "imbalance") return ExperimentKind::imbalance;
  if (name == "memorize") return ExperimentKind::memorize;
  if (name == "adversarial") return ExperimentKind::adversarial;
  if (name == "uncertainty") return ExperimentKind::uncertainty;
  throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::corruption: return "corruption";
    case ExperimentKind::imbalance: return "imbalance";
    case ExperimentKind::memorize: return "memorize";
    case ExperimentKind::adversarial: return "adversarial";
    case ExperimentKind::uncertainty: return "uncertainty";
  }
  return "corruption";
}

World make_world(const ExperimentConfig& cfg, std::uint64_t seed) {
  World w;
  Rng task(derive_seed(seed, "task"));
  w.target_spec = make_mixture_spec(cfg.task.classes, cfg.task.dim, cfg.task.sigma,
                                    cfg.task.train_per_class, cfg.task.latent_dim,
                                    cfg.task.mean_scale, task);
  Rng train_rng(derive_seed(seed, "train-data"));
  w.train = gen_mixture(w.target_spec, train_rng);
  MixtureSpec test_spec = w.target_spec;
  test_spec.samples_per_class.assign(test_spec.k, cfg.task.test_per_class);
  Rng test_rng(derive_seed(seed, "test-data"));
  w.test = gen_mixture(test_spec, test_rng);
  if (cfg.pretrain.enabled) {
    SourceTaskOptions opts;
    opts.extra_classes = cfg.pretrain.extra_classes;
    opts.remove_related = cfg.pretrain.remove_related;
    opts.related_radius = cfg.pretrain.related_radius;
    opts.samples_per_class = cfg.pretrain.samples_per_class;
    Rng source_task(derive_seed(seed, "source-task"));
    w.source_spec = make_source_task(w.target_spec, opts, source_task);
    Rng source_rng(derive_seed(seed, "source-data"));
    w.source = gen_mixture(w.source_spec, source_rng);
  }
  return w;
}

Mlp initial_model(const ExperimentConfig& cfg, const World& world, std::uint64_t seed,
                  bool pretrained) {
  return initial_model_impl(cfg, world, seed, pretrained, cfg.method == Method::adversarial);
}

double minority_error(std::span<const double> class_errors, std::span<const std::size_t> sizes) {
  if (class_errors.size() != sizes.size() || sizes.empty()) {
    throw DataError("minority_error: one error and one size per class required");
  }
  const double mean_size =
      static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0})) /
      static_cast<double>(sizes.size());
  double minority = 0.0, total = 0.0;
  std::size_t n_minority = 0, n_total = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (std::isnan(class_errors[c])) continue;
    total += class_errors[c];
    ++n_total;
    if (static_cast<double>(sizes[c]) < mean_size) {
      minority += class_errors[c];
      ++n_minority;
    }
  }
  if (n_total == 0) throw DataError("minority_error: no class has test examples");
  return n_minority ? minority / static_cast<double>(n_minority)
                    : total / static_cast<double>(n_total);
}

RunOutcome execute(const ExperimentConfig& cfg, const RunSpec& spec) {
  if (spec.pretrained && !cfg.pretrain.enabled) {
    throw ConfigError("pre-trained run requested but pretrain.enabled is false");
  }
  const World world = make_world(cfg, spec.seed);
  RunOutcome out;
  switch (spec.kind) {
    case ExperimentKind::corruption:
      // A negative point stands for the whole strength sweep.
      out = spec.point < 0.0 ? run_corruption_curve(cfg, spec, world)
                             : run_corruption(cfg, spec, world);
      break;
    case ExperimentKind::imbalance: out = run_imbalance(cfg, spec, world); break;
    case ExperimentKind::memorize: out = run_memorize(cfg, spec, world); break;
    case ExperimentKind::adversarial: out = run_adversarial(cfg, spec, world); break;
    case ExperimentKind::uncertainty: out = run_uncertainty(cfg, spec, world); break;
  }
  record_data(out, "train", world.train);
  record_data(out, "test", world.test);
  if (cfg.pretrain.enabled) record_data(out, "source", world.source);
  return out;
}

std::string make_run_id(const std::string& config_hash, const RunSpec& spec,
                        std::string_view method) {
  const std::string key = config_hash + "|" + std::string(to_string(spec.kind)) + "|" +
                          std::to_string(spec.seed) + "|" + std::string(method) + "|" +
                          (spec.pretrained ? "1" : "0") + "|" + fmt_double(spec.point);
  return hex64(derive_seed(0, key));
}

RunRecord run_record(const ExperimentConfig& cfg, const RunSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome = execute(cfg, spec);
  const auto stop = std::chrono::steady_clock::now();
  RunRecord r;
  r.config_hash = cfg.hash();
  r.method = method_label(cfg, spec.kind);
  r.run_id = make_run_id(r.config_hash, spec, r.method);
  r.seed = spec.seed;
  r.pretrained = spec.pretrained;
  r.metrics = std::move(outcome.metrics);
  r.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count();
  r.timestamp_utc = utc_timestamp();
  r.experiment = std::string(to_string(spec.kind));
  r.point = spec.point;
  r.config_text = cfg.to_kv().to_text();
  r.provenance = std::move(outcome.provenance);
  r.series = std::move(outcome.series);
  r.validate();
  return r;
}

RunRecord rerun(const RunRecord& recorded) {
  const ExperimentConfig cfg = ExperimentConfig::from(KeyValueConfig::parse(recorded.config_text));
  if (cfg.hash() != recorded.config_hash) {
    throw ConfigError("run " + recorded.run_id + ": stored config does not match its hash");
  }
  RunSpec spec;
  spec.kind = parse_experiment_kind(recorded.experiment);
  spec.seed = recorded.seed;
  spec.pretrained = recorded.pretrained;
  spec.point = recorded.point;
  return run_record(cfg, spec);
}

CorruptionSweep corruption_sweep(const ExperimentConfig& cfg, std::uint64_t seed, bool pretrained) {
  CorruptionSweep out;
  if (cfg.sweep.strengths.size() < 2) throw ConfigError("sweep.strengths needs at least two values");
  RunSpec spec{ExperimentKind::corruption, seed, pretrained, 0.0};
  const auto start = std::chrono::steady_clock::now();
  RunRecord curve;
  for (double s : cfg.sweep.strengths) {
    spec.point = s;
    out.records.push_back(run_record(cfg, spec));
    out.curve.strengths.push_back(s);
    out.curve.errors.push_back(out.records.back().metric("test_error"));
    curve.metrics.emplace_back(point_name(s), out.curve.errors.back());
  }
  out.curve.auc = error_curve_auc(out.curve.strengths, out.curve.errors);

  // The curve record holds exactly what execute() with point -1 computes.
  spec.point = -1.0;
  curve.config_hash = cfg.hash();
  curve.method = method_label(cfg, spec.kind);
  curve.run_id = make_run_id(curve.config_hash, spec, curve.method);
  curve.seed = seed;
  curve.pretrained = pretrained;
  curve.metrics.emplace_back("error_curve_auc", out.curve.auc);
  curve.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  curve.timestamp_utc = utc_timestamp();
  curve.experiment = "corruption";
  curve.point = -1.0;
  curve.config_text = cfg.to_kv().to_text();
  curve.provenance = out.records.front().provenance;
  curve.series = out.curve.errors;
  out.records.push_back(std::move(curve));
  return out;
}

ImbalanceSweep imbalance_sweep(const ExperimentConfig& cfg, std::uint64_t seed) {
  ImbalanceSweep out;
  for (double g : cfg.sweep.gammas) {
    RunRecord r = run_record(cfg, {ExperimentKind::imbalance, seed, false, g});
    out.rows.push_back({g, r.metric("total_error"), r.metric("minority_error")});
    out.records.push_back(std::move(r));
  }
  return out;
}

RunRecord memorization_curve(const ExperimentConfig& cfg, std::uint64_t seed) {
  return run_record(cfg, {ExperimentKind::memorize, seed, false, 0.0});
}

PairedRuns pretrain_compare(const ExperimentConfig& cfg, ExperimentKind kind, std::uint64_t seed,
                            std::vector<RunRecord>* all_records) {
  if (!cfg.pretrain.enabled) throw ConfigError("compare-pretrain needs pretrain.enabled = true");
  PairedRuns out;
  auto arm = [&](bool pretrained) {
    if (kind == ExperimentKind::corruption) {
      CorruptionSweep sweep = corruption_sweep(cfg, seed, pretrained);
      RunRecord curve = sweep.records.back();
      if (all_records) {
        for (auto& r : sweep.records) all_records->push_back(std::move(r));
      }
      return curve;
    }
    RunRecord r = run_record(cfg, {kind, seed, pretrained, 0.0});
    if (all_records) all_records->push_back(r);
    return r;
  };
  out.scratch = arm(false);
  out.pretrained = arm(true);
  for (const auto& [name, v] : out.pretrained.metrics) {
    for (const auto& [sname, sv] : out.scratch.metrics) {
      if (sname == name) out.deltas.emplace_back(name, v - sv);
    }
  }
  return out;
}

}  // namespace prl
