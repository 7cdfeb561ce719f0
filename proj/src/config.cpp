#include "prl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "prl/error.hpp"

namespace prl {
namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt_double(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

// Reads keys from a KeyValueConfig and remembers which ones were consumed.
class Reader {
 public:
  explicit Reader(const KeyValueConfig& kv) : kv_(kv) {}

  std::string str(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    return kv_.get_string(key, fallback);
  }
  double num(const std::string& key, double fallback) {
    used_.insert(key);
    return kv_.get_double(key, fallback);
  }
  std::size_t count(const std::string& key, std::size_t fallback) {
    used_.insert(key);
    const auto v = kv_.get_int(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw ConfigError("config key '" + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
  }
  bool flag(const std::string& key, bool fallback) {
    used_.insert(key);
    return kv_.get_bool(key, fallback);
  }
  std::vector<double> nums(const std::string& key, std::vector<double> fallback) {
    used_.insert(key);
    return kv_.get_doubles(key, std::move(fallback));
  }
  std::vector<std::int64_t> ints(const std::string& key, std::vector<std::int64_t> fallback) {
    used_.insert(key);
    return kv_.get_ints(key, std::move(fallback));
  }
  bool has(const std::string& key) const { return kv_.has(key); }

  void reject_unknown() const {
    for (const auto& [key, value] : kv_.entries()) {
      if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  const KeyValueConfig& kv_;
  std::set<std::string> used_;
};

PhaseConfig read_phase(Reader& r, const std::string& p, const PhaseConfig& d) {
  PhaseConfig out;
  out.spec.epochs = static_cast<int>(r.count(p + ".epochs", static_cast<std::size_t>(d.spec.epochs)));
  out.spec.lr0 = r.num(p + ".lr0", d.spec.lr0);
  const std::string sched =
      r.str(p + ".schedule", d.spec.schedule == LrSchedule::cosine ? "cosine" : "step");
  if (sched == "cosine") {
    out.spec.schedule = LrSchedule::cosine;
  } else if (sched == "step") {
    out.spec.schedule = LrSchedule::step_drops;
  } else {
    throw ConfigError("config key '" + p + ".schedule': expected cosine or step");
  }
  std::vector<std::int64_t> drops_default(d.spec.drop_epochs.begin(), d.spec.drop_epochs.end());
  for (auto e : r.ints(p + ".drop_epochs", drops_default)) {
    out.spec.drop_epochs.push_back(static_cast<int>(e));
  }
  out.spec.drop_factor = r.num(p + ".drop_factor", d.spec.drop_factor);
  out.spec.momentum = r.num(p + ".momentum", d.spec.momentum);
  out.spec.weight_decay = r.num(p + ".weight_decay", d.spec.weight_decay);
  out.spec.batch_size = r.count(p + ".batch_size", d.spec.batch_size);
  out.dropout = r.num(p + ".dropout", d.dropout);
  if (out.spec.lr0 < 0.0 || out.spec.batch_size == 0) {
    throw ConfigError("config section '" + p + "': lr0 must be >= 0 and batch_size > 0");
  }
  if (!(out.dropout >= 0.0 && out.dropout < 1.0)) {
    throw ConfigError("config key '" + p + ".dropout' must lie in [0, 1)");
  }
  if (!(out.spec.momentum >= 0.0 && out.spec.momentum < 1.0)) {
    throw ConfigError("config key '" + p + ".momentum' must lie in [0, 1)");
  }
  return out;
}

void write_phase(KeyValueConfig& kv, const std::string& p, const PhaseConfig& ph) {
  kv.set(p + ".epochs", std::to_string(ph.spec.epochs));
  kv.set(p + ".lr0", fmt_double(ph.spec.lr0));
  kv.set(p + ".schedule", ph.spec.schedule == LrSchedule::cosine ? "cosine" : "step");
  kv.set(p + ".drop_epochs", join(ph.spec.drop_epochs));
  kv.set(p + ".drop_factor", fmt_double(ph.spec.drop_factor));
  kv.set(p + ".momentum", fmt_double(ph.spec.momentum));
  kv.set(p + ".weight_decay", fmt_double(ph.spec.weight_decay));
  kv.set(p + ".batch_size", std::to_string(ph.spec.batch_size));
  kv.set(p + ".dropout", fmt_double(ph.dropout));
}

AttackSpec read_attack(Reader& r, const std::string& p, const AttackSpec& d) {
  const double eps = r.num(p + ".epsilon", d.epsilon);
  const int steps = static_cast<int>(r.count(p + ".steps", static_cast<std::size_t>(d.steps)));
  AttackSpec a = AttackSpec::linf(eps, steps, static_cast<int>(r.count(p + ".restarts", 1)),
                                  r.flag(p + ".random_init", d.random_init));
  if (r.has(p + ".step_size")) a.step_size = r.num(p + ".step_size", a.step_size);
  else r.num(p + ".step_size", a.step_size);
  try {
    a.validate();
  } catch (const Error& e) {
    throw ConfigError("config section '" + p + "': " + e.what());
  }
  return a;
}

void write_attack(KeyValueConfig& kv, const std::string& p, const AttackSpec& a) {
  kv.set(p + ".epsilon", fmt_double(a.epsilon));
  kv.set(p + ".steps", std::to_string(a.steps));
  kv.set(p + ".step_size", fmt_double(a.step_size));
  kv.set(p + ".restarts", std::to_string(a.restarts));
  kv.set(p + ".random_init", a.random_init ? "true" : "false");
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (kv.has(key)) {
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    kv.set(key, value);
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : to_double(key, it->second);
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : to_int(key, it->second);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + it->second + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key,
                                                std::vector<double> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(it->second)) out.push_back(to_double(key, item));
  return out;
}

std::vector<std::int64_t> KeyValueConfig::get_ints(const std::string& key,
                                                   std::vector<std::int64_t> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(it->second)) out.push_back(to_int(key, item));
  return out;
}

std::string KeyValueConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

Method parse_method(std::string_view name) {
  if (name == "none") return Method::none;
  if (name == "forward") return Method::forward;
  if (name == "glc") return Method::glc;
  if (name == "oversample") return Method::oversample;
  if (name == "smote") return Method::smote;
  if (name == "cost_sensitive") return Method::cost_sensitive;
  if (name == "adversarial") return Method::adversarial;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::none: return "none";
    case Method::forward: return "forward";
    case Method::glc: return "glc";
    case Method::oversample: return "oversample";
    case Method::smote: return "smote";
    case Method::cost_sensitive: return "cost_sensitive";
    case Method::adversarial: return "adversarial";
  }
  return "none";
}

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& kv) {
  Reader r(kv);
  ExperimentConfig c;

  c.task.dim = r.count("task.dim", c.task.dim);
  c.task.classes = r.count("task.classes", c.task.classes);
  c.task.train_per_class = r.count("task.train_per_class", c.task.train_per_class);
  c.task.test_per_class = r.count("task.test_per_class", c.task.test_per_class);
  c.task.sigma = r.num("task.sigma", c.task.sigma);
  c.task.latent_dim = r.count("task.latent_dim", c.task.latent_dim);
  c.task.mean_scale = r.num("task.mean_scale", c.task.mean_scale);
  if (c.task.dim == 0 || c.task.classes < 2 || !(c.task.sigma >= 0.0)) {
    throw ConfigError("task: need dim >= 1, classes >= 2, sigma >= 0");
  }

  std::vector<std::int64_t> hidden_default(c.hidden.begin(), c.hidden.end());
  c.hidden.clear();
  for (auto h : r.ints("model.hidden", hidden_default)) {
    if (h <= 0) throw ConfigError("model.hidden: widths must be positive");
    c.hidden.push_back(static_cast<std::size_t>(h));
  }

  PhaseConfig scratch;
  scratch.spec.epochs = 100;
  scratch.spec.lr0 = 0.1;
  scratch.spec.drop_epochs = {80, 120, 160};
  scratch.spec.batch_size = 128;
  scratch.dropout = 0.3;
  c.train = read_phase(r, "train", scratch);

  c.method = parse_method(r.str("method.name", "none"));
  c.trusted_fraction = r.num("method.trusted_fraction", c.trusted_fraction);
  c.smote_k = r.count("method.smote_k", c.smote_k);
  if (!(c.trusted_fraction > 0.0 && c.trusted_fraction < 1.0)) {
    throw ConfigError("method.trusted_fraction must lie in (0, 1)");
  }

  c.pretrain.enabled = r.flag("pretrain.enabled", false);
  c.pretrain.extra_classes = r.count("pretrain.extra_classes", c.pretrain.extra_classes);
  c.pretrain.samples_per_class = r.count("pretrain.samples_per_class", 0);
  c.pretrain.remove_related = r.flag("pretrain.remove_related", false);
  c.pretrain.related_radius = r.num("pretrain.related_radius", c.pretrain.related_radius);
  c.pretrain.train = read_phase(r, "pretrain", scratch);

  PhaseConfig tune;
  tune.spec.epochs = 10;
  tune.spec.lr0 = 0.001;
  tune.spec.batch_size = 128;
  tune.dropout = 0.0;
  c.finetune.train = read_phase(r, "finetune", tune);
  const std::string mode = r.str("finetune.mode", "all");
  if (mode == "all") {
    c.finetune.mode = FinetuneMode::all;
  } else if (mode == "last") {
    c.finetune.mode = FinetuneMode::last_layer;
  } else {
    throw ConfigError("finetune.mode: expected all or last");
  }

  c.attack = read_attack(r, "attack", AttackSpec::linf(8.0 / 255.0, 10));
  c.eval_attack = read_attack(r, "eval_attack", AttackSpec::linf(c.attack.epsilon, 20));

  c.sweep.strengths = r.nums("sweep.strengths", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  c.sweep.gammas = r.nums("sweep.gammas", {0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0});
  c.sweep.n_max = r.count("sweep.n_max", c.sweep.n_max);
  c.sweep.n_min = r.count("sweep.n_min", c.sweep.n_min);
  if (!std::is_sorted(c.sweep.strengths.begin(), c.sweep.strengths.end()) ||
      std::adjacent_find(c.sweep.strengths.begin(), c.sweep.strengths.end()) != c.sweep.strengths.end()) {
    throw ConfigError("sweep.strengths must be strictly increasing");
  }
  for (double s : c.sweep.strengths) {
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("sweep.strengths must lie in [0, 1]");
  }
  if (c.sweep.n_min < 1 || c.sweep.n_max < c.sweep.n_min) {
    throw ConfigError("sweep: need n_max >= n_min >= 1");
  }

  c.memorize_strength = r.num("memorize.strength", c.memorize_strength);
  c.ood_samples = r.count("ood.samples", c.ood_samples);
  c.ood_block_size = r.count("ood.block_size", c.ood_block_size);
  c.holdout_fraction = r.num("calibration.holdout_fraction", c.holdout_fraction);
  c.bin_size = r.count("calibration.bin_size", c.bin_size);
  if (c.bin_size == 0 || c.ood_block_size == 0 || c.ood_samples == 0) {
    throw ConfigError("calibration.bin_size, ood.samples and ood.block_size must be positive");
  }

  std::vector<std::int64_t> seeds_default(c.seeds.begin(), c.seeds.end());
  c.seeds.clear();
  for (auto s : r.ints("seeds", seeds_default)) c.seeds.push_back(static_cast<std::uint64_t>(s));
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  c.output_dir = r.str("output.dir", c.output_dir);

  r.reject_unknown();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return from(KeyValueConfig::load(path));
}

KeyValueConfig ExperimentConfig::to_kv() const {
  KeyValueConfig kv;
  kv.set("task.dim", std::to_string(task.dim));
  kv.set("task.classes", std::to_string(task.classes));
  kv.set("task.train_per_class", std::to_string(task.train_per_class));
  kv.set("task.test_per_class", std::to_string(task.test_per_class));
  kv.set("task.sigma", fmt_double(task.sigma));
  kv.set("task.latent_dim", std::to_string(task.latent_dim));
  kv.set("task.mean_scale", fmt_double(task.mean_scale));
  kv.set("model.hidden", join(hidden));
  write_phase(kv, "train", train);
  kv.set("method.name", std::string(to_string(method)));
  kv.set("method.trusted_fraction", fmt_double(trusted_fraction));
  kv.set("method.smote_k", std::to_string(smote_k));
  kv.set("pretrain.enabled", pretrain.enabled ? "true" : "false");
  kv.set("pretrain.extra_classes", std::to_string(pretrain.extra_classes));
  kv.set("pretrain.samples_per_class", std::to_string(pretrain.samples_per_class));
  kv.set("pretrain.remove_related", pretrain.remove_related ? "true" : "false");
  kv.set("pretrain.related_radius", fmt_double(pretrain.related_radius));
  write_phase(kv, "pretrain", pretrain.train);
  write_phase(kv, "finetune", finetune.train);
  kv.set("finetune.mode", finetune.mode == FinetuneMode::all ? "all" : "last");
  write_attack(kv, "attack", attack);
  write_attack(kv, "eval_attack", eval_attack);
  kv.set("sweep.strengths", join(sweep.strengths));
  kv.set("sweep.gammas", join(sweep.gammas));
  kv.set("sweep.n_max", std::to_string(sweep.n_max));
  kv.set("sweep.n_min", std::to_string(sweep.n_min));
  kv.set("memorize.strength", fmt_double(memorize_strength));
  kv.set("ood.samples", std::to_string(ood_samples));
  kv.set("ood.block_size", std::to_string(ood_block_size));
  kv.set("calibration.holdout_fraction", fmt_double(holdout_fraction));
  kv.set("calibration.bin_size", std::to_string(bin_size));
  kv.set("seeds", join(seeds));
  kv.set("output.dir", output_dir);
  return kv;
}

std::string ExperimentConfig::hash() const {
  // Seeds and the output directory do not change what a run computes.
  KeyValueConfig kv = to_kv();
  kv.set("seeds", "");
  kv.set("output.dir", "");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(kv.to_text())));
  return buf;
}

}  // namespace prl
