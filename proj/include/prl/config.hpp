#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "prl/adversary.hpp"
#include "prl/training.hpp"

namespace prl {

/// Flat `section.key = value` text with `#` comments. Keys are unique and
/// order does not matter.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::int64_t> get_ints(const std::string& key, std::vector<std::int64_t> fallback) const;

  /// Sorted `key = value` lines.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

enum class Method { none, forward, glc, oversample, smote, cost_sensitive, adversarial };

Method parse_method(std::string_view name);
std::string_view to_string(Method method);

struct TaskConfig {
  std::size_t dim = 16;
  std::size_t classes = 10;
  std::size_t train_per_class = 500;
  std::size_t test_per_class = 200;
  /// Calibration knob: sets the class overlap and hence the clean error.
  double sigma = 0.3;
  /// Class means live in a random subspace of this dimension (0: anywhere
  /// in the unit box).
  std::size_t latent_dim = 0;
  double mean_scale = 0.5;
};

/// TrainSpec plus the dropout rate used for the network it trains.
struct PhaseConfig {
  TrainSpec spec;
  double dropout = 0.0;
};

struct PretrainConfig {
  bool enabled = false;
  std::size_t extra_classes = 20;
  std::size_t samples_per_class = 0;
  bool remove_related = false;
  double related_radius = 0.5;
  PhaseConfig train;
};

struct FinetuneConfig {
  PhaseConfig train;
  FinetuneMode mode = FinetuneMode::all;
};

struct SweepConfig {
  std::vector<double> strengths;
  std::vector<double> gammas;
  std::size_t n_max = 5000;
  std::size_t n_min = 250;
};

/// Everything an experiment needs, resolved from a KeyValueConfig with the
/// defaults filled in.
struct ExperimentConfig {
  TaskConfig task;
  std::vector<std::size_t> hidden = {64, 64};
  PhaseConfig train;
  Method method = Method::none;
  double trusted_fraction = 0.1;
  std::size_t smote_k = 5;
  PretrainConfig pretrain;
  FinetuneConfig finetune;
  AttackSpec attack = AttackSpec::linf(8.0 / 255.0, 10);
  AttackSpec eval_attack = AttackSpec::linf(8.0 / 255.0, 20);
  SweepConfig sweep;
  double memorize_strength = 0.6;
  std::size_t ood_samples = 1000;
  std::size_t ood_block_size = 4;
  double holdout_fraction = 0.1;
  std::size_t bin_size = 100;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "runs";

  /// Throws ConfigError on unknown keys or invalid values.
  static ExperimentConfig from(const KeyValueConfig& kv);
  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig defaults() { return from(KeyValueConfig{}); }

  /// Every resolved field as key/value text; from(to_kv()) reproduces *this.
  KeyValueConfig to_kv() const;
  /// 16 hex digits identifying the resolved configuration.
  std::string hash() const;
};

}  // namespace prl
