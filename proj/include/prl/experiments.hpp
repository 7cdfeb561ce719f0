#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prl/config.hpp"
#include "prl/dataset.hpp"
#include "prl/mlp.hpp"
#include "prl/records.hpp"
#include "prl/synthetic.hpp"

namespace prl {

struct ErrorCurve {
  std::vector<double> strengths;
  std::vector<double> errors;
  double auc = 0.0;
};

/// Trapezoid integral of errors over strengths divided by the strength range
/// (strictly increasing, at least two points). Over [0, 1] this is the plain
/// integral.
double error_curve_auc(std::span<const double> strengths, std::span<const double> errors);

enum class ExperimentKind { corruption, imbalance, memorize, adversarial, uncertainty };

ExperimentKind parse_experiment_kind(std::string_view name);
std::string_view to_string(ExperimentKind kind);

/// Everything besides the config that determines a run.
struct RunSpec {
  ExperimentKind kind = ExperimentKind::corruption;
  std::uint64_t seed = 0;
  bool pretrained = false;
  /// Corruption strength or imbalance gamma; unused by the other kinds.
  double point = 0.0;
};

struct RunOutcome {
  std::vector<std::pair<std::string, double>> metrics;
  /// Dataset checksums (hex) of every dataset the run consumed.
  std::map<std::string, std::string> provenance;
  /// Per-epoch test error for memorization runs.
  std::vector<double> series;
};

/// Target and source data of one seed. Paired arms of a comparison build
/// the same World and so see identical data.
struct World {
  MixtureSpec target_spec;
  Dataset train;
  Dataset test;
  MixtureSpec source_spec;
  Dataset source;
};

World make_world(const ExperimentConfig& cfg, std::uint64_t seed);

/// Fresh network for the target task, or the pre-trained source network with
/// a new head. Pre-trained source networks are cached per process.
Mlp initial_model(const ExperimentConfig& cfg, const World& world, std::uint64_t seed,
                  bool pretrained);

/// Runs one experiment point. A pure function of (cfg, spec): the same inputs
/// give bit-identical metrics.
RunOutcome execute(const ExperimentConfig& cfg, const RunSpec& spec);

/// execute() plus timing and the record bookkeeping.
RunRecord run_record(const ExperimentConfig& cfg, const RunSpec& spec);

std::string make_run_id(const std::string& config_hash, const RunSpec& spec,
                        std::string_view method);

/// Recomputes a recorded run from the config text and spec stored in its
/// JSON mirror.
RunRecord rerun(const RunRecord& recorded);

struct CorruptionSweep {
  ErrorCurve curve;
  std::vector<RunRecord> records;
};
CorruptionSweep corruption_sweep(const ExperimentConfig& cfg, std::uint64_t seed, bool pretrained);

struct ImbalanceRow {
  double gamma = 0.0;
  double total_error = 0.0;
  double minority_error = 0.0;
};
struct ImbalanceSweep {
  std::vector<ImbalanceRow> rows;
  std::vector<RunRecord> records;
};
ImbalanceSweep imbalance_sweep(const ExperimentConfig& cfg, std::uint64_t seed);

/// Minority classes are those strictly smaller than the mean class size.
/// Without any, the total (mean per-class) error is reported.
double minority_error(std::span<const double> class_errors, std::span<const std::size_t> sizes);

RunRecord memorization_curve(const ExperimentConfig& cfg, std::uint64_t seed);

struct PairedRuns {
  RunRecord scratch;
  RunRecord pretrained;
  /// pretrained minus scratch, per metric present in both.
  std::vector<std::pair<std::string, double>> deltas;
};
/// For corruption the arms are whole sweeps and the records carry the
/// error-curve AUC; other kinds compare single runs.
PairedRuns pretrain_compare(const ExperimentConfig& cfg, ExperimentKind kind, std::uint64_t seed,
                            std::vector<RunRecord>* all_records = nullptr);

}  // namespace prl
