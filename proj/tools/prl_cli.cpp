// prl: command-line front end for the experiment harness.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prl/config.hpp"
#include "prl/corrections.hpp"
#include "prl/dataset_io.hpp"
#include "prl/error.hpp"
#include "prl/experiments.hpp"
#include "prl/records.hpp"
#include "prl/svg_plot.hpp"
#include "prl/uncertainty.hpp"

namespace fs = std::filesystem;
using namespace prl;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

ExperimentConfig load_config(const Globals& g) {
  ExperimentConfig cfg =
      g.config_path.empty() ? ExperimentConfig::defaults() : ExperimentConfig::load(g.config_path);
  if (g.seed) cfg.seeds = {*g.seed};
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  return cfg;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw DataError("cannot write " + path.string());
}

std::string xy_csv(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::string out = "x,y\n";
  char buf[80];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", xs[i], ys[i]);
    out += buf;
  }
  return out;
}

Series read_xy_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "x,y") {
    throw DataError(path.string() + ": expected header 'x,y'");
  }
  Series s;
  s.name = path.stem().string();
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(line);
      s.xs.push_back(std::stod(line.substr(0, comma)));
      s.ys.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw DataError(path.string() + " line " + std::to_string(lineno) + ": malformed row");
    }
  }
  return s;
}

void print_metrics(const RunRecord& r) {
  std::printf("run %s seed %llu method %s%s\n", r.run_id.c_str(),
              static_cast<unsigned long long>(r.seed), r.method.c_str(),
              r.pretrained ? " (pre-trained)" : "");
  for (const auto& [k, v] : r.metrics) std::printf("  %-28s %.6f\n", k.c_str(), v);
}

std::vector<double> iota_epochs(std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = static_cast<double>(i + 1);
  return xs;
}

int cmd_gen(const Globals& g, double strength) {
  const ExperimentConfig cfg = load_config(g);
  const fs::path dir = cfg.output_dir;
  for (std::uint64_t seed : cfg.seeds) {
    const World w = make_world(cfg, seed);
    const fs::path sub = dir / ("seed-" + std::to_string(seed));
    fs::create_directories(sub);
    write_dataset(w.train, sub / "train.prlb");
    write_dataset(w.test, sub / "test.prlb");
    if (cfg.pretrain.enabled) write_dataset(w.source, sub / "source.prlb");
    if (strength > 0.0) {
      const TransitionMatrix c = make_uniform_noise_matrix(w.train.k, strength);
      Rng rng(derive_seed(seed, "corrupt"));
      write_dataset(corrupt_labels(w.train, c, rng), sub / "train_noisy.prlb");
      write_file(sub / "transition.csv", transition_to_csv(c));
    }
    std::printf("seed %llu: %zu train, %zu test examples -> %s\n",
                static_cast<unsigned long long>(seed), w.train.n, w.test.n, sub.c_str());
  }
  return 0;
}

int cmd_train(const Globals& g, const std::string& kind_name, double point, bool pretrained) {
  const ExperimentConfig cfg = load_config(g);
  const ExperimentKind kind = parse_experiment_kind(kind_name);
  std::vector<RunRecord> records;
  for (std::uint64_t seed : cfg.seeds) {
    records.push_back(run_record(cfg, {kind, seed, pretrained, point}));
    print_metrics(records.back());
  }
  write_records(records, cfg.output_dir);
  return 0;
}

int cmd_sweep_corruption(const Globals& g, bool pretrained) {
  const ExperimentConfig cfg = load_config(g);
  std::vector<Series> series;
  for (std::uint64_t seed : cfg.seeds) {
    CorruptionSweep sweep = corruption_sweep(cfg, seed, pretrained);
    std::printf("seed %llu  error-curve AUC %.6f\n", static_cast<unsigned long long>(seed),
                sweep.curve.auc);
    for (std::size_t i = 0; i < sweep.curve.strengths.size(); ++i) {
      std::printf("  s=%.2f  test error %.4f\n", sweep.curve.strengths[i], sweep.curve.errors[i]);
    }
    write_records(sweep.records, cfg.output_dir);
    const std::string name = "corruption-seed-" + std::to_string(seed);
    write_file(fs::path(cfg.output_dir) / (name + ".csv"),
               xy_csv(sweep.curve.strengths, sweep.curve.errors));
    series.push_back({name, sweep.curve.strengths, sweep.curve.errors});
  }
  emit_plot(series, fs::path(cfg.output_dir) / "corruption.svg",
            {"Test error vs corruption strength", "corruption strength", "test error"});
  return 0;
}

int cmd_sweep_imbalance(const Globals& g) {
  const ExperimentConfig cfg = load_config(g);
  for (std::uint64_t seed : cfg.seeds) {
    ImbalanceSweep sweep = imbalance_sweep(cfg, seed);
    std::printf("seed %llu  method %s\n  gamma  total_error  minority_error\n",
                static_cast<unsigned long long>(seed), std::string(to_string(cfg.method)).c_str());
    for (const auto& row : sweep.rows) {
      std::printf("  %5.2f  %11.4f  %14.4f\n", row.gamma, row.total_error, row.minority_error);
    }
    write_records(sweep.records, cfg.output_dir);
  }
  return 0;
}

int cmd_memorize(const Globals& g) {
  const ExperimentConfig cfg = load_config(g);
  std::vector<Series> series;
  std::vector<RunRecord> records;
  for (std::uint64_t seed : cfg.seeds) {
    records.push_back(memorization_curve(cfg, seed));
    print_metrics(records.back());
    const auto& ys = records.back().series;
    const std::string name = "memorize-seed-" + std::to_string(seed);
    write_file(fs::path(cfg.output_dir) / (name + ".csv"), xy_csv(iota_epochs(ys.size()), ys));
    series.push_back({name, iota_epochs(ys.size()), ys});
  }
  write_records(records, cfg.output_dir);
  emit_plot(series, fs::path(cfg.output_dir) / "memorize.svg",
            {"Test error during training on noisy labels", "epoch", "test error"});
  return 0;
}

int cmd_compare(const Globals& g, const std::string& kind_name) {
  const ExperimentConfig cfg = load_config(g);
  const ExperimentKind kind = parse_experiment_kind(kind_name);
  std::vector<RunRecord> records;
  for (std::uint64_t seed : cfg.seeds) {
    PairedRuns p = pretrain_compare(cfg, kind, seed, &records);
    std::printf("seed %llu  (pre-trained minus scratch)\n", static_cast<unsigned long long>(seed));
    for (const auto& [k, d] : p.deltas) {
      std::printf("  %-28s scratch %.6f  pre-trained %.6f  delta %+.6f\n", k.c_str(),
                  p.scratch.metric(k), p.pretrained.metric(k), d);
    }
  }
  write_records(records, cfg.output_dir);
  return 0;
}

int cmd_attack(const Globals& g, bool pretrained) {
  return cmd_train(g, "adversarial", 0.0, pretrained);
}

int cmd_metrics(const std::string& scores_path, const std::string& calib_path,
                std::size_t bin_size) {
  if (scores_path.empty() && calib_path.empty()) {
    throw ConfigError("metrics: pass --scores and/or --calibration");
  }
  if (!scores_path.empty()) {
    const auto scores = scores_from_csv(read_file(scores_path));
    std::vector<double> in, out;
    for (const auto& s : scores) (s.is_ood ? out : in).push_back(s.anomaly_score);
    std::printf("auroc %.17g\naupr %.17g\n", auroc(in, out), aupr(in, out));
  }
  if (!calib_path.empty()) {
    const auto samples = calibration_from_csv(read_file(calib_path));
    std::printf("rms_calibration_error %.17g\nmad_calibration_error %.17g\n",
                rms_calibration_error(samples, bin_size), mad_calibration_error(samples, bin_size));
  }
  return 0;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out,
             const PlotLabels& labels) {
  std::vector<Series> series;
  for (const auto& p : inputs) series.push_back(read_xy_csv(p));
  emit_plot(series, out, labels);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_rerun(const Globals& g, const std::string& run_id) {
  const fs::path dir = g.out_dir.empty() ? load_config(g).output_dir : g.out_dir;
  const RunRecord recorded = read_record_json(dir / "runs" / (run_id + ".json"));
  const RunRecord fresh = rerun(recorded);
  bool same = fresh.metrics.size() == recorded.metrics.size();
  for (std::size_t i = 0; same && i < fresh.metrics.size(); ++i) {
    same = fresh.metrics[i].first == recorded.metrics[i].first &&
           fresh.metrics[i].second == recorded.metrics[i].second;
  }
  print_metrics(fresh);
  std::printf("%s\n", same ? "identical to the recorded run" : "DIFFERS from the recorded run");
  return same ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness and uncertainty experiments on synthetic tasks"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Experiment config file (key = value)");
  app.add_option("--seed", g.seed, "Run this single seed instead of the configured list");
  app.add_option("--out", g.out_dir, "Output directory");

  double strength = 0.0;
  auto* gen = app.add_subcommand("gen", "Write the generated datasets");
  gen->add_option("--strength", strength, "Also write labels corrupted at this strength");

  std::string kind = "corruption";
  double point = 0.0;
  bool pretrained = false;
  auto* train = app.add_subcommand("train", "Train and evaluate one experiment point");
  train->add_option("--kind", kind, "corruption | imbalance | uncertainty | adversarial | memorize");
  train->add_option("--point", point, "Corruption strength or imbalance gamma");
  train->add_flag("--pretrained", pretrained, "Start from the pre-trained source network");

  auto* attack = app.add_subcommand("attack", "Adversarial training and PGD robust accuracy");
  attack->add_flag("--pretrained", pretrained, "Adversarially pre-train on the source task first");

  auto* sweep_c = app.add_subcommand("sweep-corruption", "Error curve over corruption strengths");
  sweep_c->add_flag("--pretrained", pretrained, "Fine-tune the pre-trained source network");
  auto* sweep_i = app.add_subcommand("sweep-imbalance", "Total and minority error over gamma");
  auto* memorize = app.add_subcommand("memorize", "Per-epoch test error on noisy labels");

  std::string compare_kind = "corruption";
  auto* compare = app.add_subcommand("compare-pretrain", "Pre-trained vs scratch, paired seeds");
  compare->add_option("--kind", compare_kind, "corruption | adversarial | uncertainty | memorize");

  std::string scores, calib;
  std::size_t bin_size = 100;
  auto* metrics = app.add_subcommand("metrics", "Detection and calibration metrics from CSV");
  metrics->add_option("--scores", scores, "CSV with header score,is_ood");
  metrics->add_option("--calibration", calib, "CSV with header confidence,correct");
  metrics->add_option("--bin-size", bin_size, "Examples per calibration bin");

  std::vector<std::string> inputs;
  std::string plot_out = "plot.svg";
  PlotLabels labels{"", "x", "y"};
  auto* plot = app.add_subcommand("plot", "SVG line chart from x,y CSV files");
  plot->add_option("--input", inputs, "CSV file with header x,y (repeatable)")->required();
  plot->add_option("--svg", plot_out, "Output SVG path");
  plot->add_option("--title", labels.title);
  plot->add_option("--xlabel", labels.x_label);
  plot->add_option("--ylabel", labels.y_label);

  std::string run_id;
  auto* rerun_cmd = app.add_subcommand("rerun", "Recompute a recorded run and compare metrics");
  rerun_cmd->add_option("run_id", run_id, "run_id from runs.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen(g, strength);
    if (*train) return cmd_train(g, kind, point, pretrained);
    if (*attack) return cmd_attack(g, pretrained);
    if (*sweep_c) return cmd_sweep_corruption(g, pretrained);
    if (*sweep_i) return cmd_sweep_imbalance(g);
    if (*memorize) return cmd_memorize(g);
    if (*compare) return cmd_compare(g, compare_kind);
    if (*metrics) return cmd_metrics(scores, calib, bin_size);
    if (*plot) return cmd_plot(inputs, plot_out, labels);
    if (*rerun_cmd) return cmd_rerun(g, run_id);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  }
  return 0;
}
