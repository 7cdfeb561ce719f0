#include "prl/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "prl/error.hpp"

namespace prl {
namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (double v : xs) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite score");
  }
}

// Neumaier compensated sum.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct BinGap {
  double weight;  // |bin| / n
  double gap;     // mean confidence - accuracy
};

std::vector<BinGap> adaptive_bins(std::span<const CalibrationSample> samples, std::size_t bin_size) {
  if (samples.empty()) throw NumericError("calibration error: no samples");
  if (bin_size == 0) throw NumericError("calibration error: bin size must be positive");
  std::vector<CalibrationSample> sorted(samples.begin(), samples.end());
  for (const auto& s : sorted) {
    if (!(s.confidence >= 0.0 && s.confidence <= 1.0)) {
      throw NumericError("calibration error: confidence outside [0, 1]");
    }
  }
  // Sorting on the full key makes the bins independent of input order.
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.confidence != b.confidence ? a.confidence < b.confidence : a.correct < b.correct;
  });
  const double n = static_cast<double>(sorted.size());
  std::vector<BinGap> bins;
  for (std::size_t lo = 0; lo < sorted.size(); lo += bin_size) {
    const std::size_t hi = std::min(sorted.size(), lo + bin_size);
    Accumulator conf;
    std::size_t hits = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      conf.add(sorted[i].confidence);
      hits += sorted[i].correct;
    }
    const double m = static_cast<double>(hi - lo);
    bins.push_back({m / n, conf.value() / m - static_cast<double>(hits) / m});
  }
  return bins;
}

std::vector<std::string> csv_lines(const std::string& text, const char* header) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> out;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == header) continue;
    }
    out.push_back(line);
  }
  return out;
}

std::pair<double, bool> parse_pair(const std::string& line) {
  const auto comma = line.find(',');
  if (comma == std::string::npos) throw DataError("score CSV: expected two columns: " + line);
  try {
    const double v = std::stod(line.substr(0, comma));
    const std::string flag = line.substr(comma + 1);
    if (flag != "0" && flag != "1") throw DataError("score CSV: flag must be 0 or 1: " + line);
    return {v, flag == "1"};
  } catch (const std::invalid_argument&) {
    throw DataError("score CSV: bad number: " + line);
  } catch (const std::out_of_range&) {
    throw DataError("score CSV: number out of range: " + line);
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<double> msp_scores(const Tensor& logits) {
  const Tensor p = softmax(logits);
  std::vector<double> out(p.rows());
  for (std::size_t r = 0; r < p.rows(); ++r) {
    auto row = p.row(r);
    out[r] = -*std::max_element(row.begin(), row.end());
  }
  return out;
}

std::vector<double> msp_scores(const Mlp& net, const Tensor& x) {
  return msp_scores(predict_logits(net, x));
}

double auroc(std::span<const double> in_scores, std::span<const double> out_scores) {
  if (in_scores.empty() || out_scores.empty()) throw NumericError("auroc: empty score list");
  require_finite(in_scores, "auroc");
  require_finite(out_scores, "auroc");
  std::vector<std::pair<double, bool>> all;
  all.reserve(in_scores.size() + out_scores.size());
  for (double s : in_scores) all.emplace_back(s, false);
  for (double s : out_scores) all.emplace_back(s, true);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  // Twice the Mann-Whitney U of the OOD scores, kept in integers.
  std::int64_t twice_rank_sum = 0;
  for (std::size_t a = 0; a < all.size();) {
    std::size_t b = a;
    while (b < all.size() && all[b].first == all[a].first) ++b;
    const auto twice_mid_rank = static_cast<std::int64_t>(a + 1 + b);
    for (std::size_t i = a; i < b; ++i) {
      if (all[i].second) twice_rank_sum += twice_mid_rank;
    }
    a = b;
  }
  const auto n_out = static_cast<std::int64_t>(out_scores.size());
  const auto n_in = static_cast<std::int64_t>(in_scores.size());
  const std::int64_t twice_u = twice_rank_sum - n_out * (n_out + 1);
  return static_cast<double>(twice_u) / static_cast<double>(2 * n_in * n_out);
}

double aupr(std::span<const double> in_scores, std::span<const double> out_scores) {
  if (out_scores.empty()) throw NumericError("aupr: no positive (OOD) scores");
  require_finite(in_scores, "aupr");
  require_finite(out_scores, "aupr");
  std::vector<std::pair<double, bool>> all;
  for (double s : in_scores) all.emplace_back(s, false);
  for (double s : out_scores) all.emplace_back(s, true);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  const double positives = static_cast<double>(out_scores.size());
  double tp = 0.0, fp = 0.0, prev_recall = 0.0, area = 0.0;
  for (std::size_t a = 0; a < all.size();) {
    std::size_t b = a;
    while (b < all.size() && all[b].first == all[a].first) {
      (all[b].second ? tp : fp) += 1.0;
      ++b;
    }
    const double recall = tp / positives;
    const double precision = tp / (tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    a = b;
  }
  return area;
}

double rms_calibration_error(std::span<const CalibrationSample> samples, std::size_t bin_size) {
  double total = 0.0;
  for (const auto& b : adaptive_bins(samples, bin_size)) total += b.weight * b.gap * b.gap;
  return std::sqrt(total);
}

double mad_calibration_error(std::span<const CalibrationSample> samples, std::size_t bin_size) {
  double total = 0.0;
  for (const auto& b : adaptive_bins(samples, bin_size)) total += b.weight * std::abs(b.gap);
  return total;
}

std::vector<CalibrationSample> calibration_samples(const Mlp& net, const Dataset& data,
                                                   double temperature) {
  if (!(temperature > 0.0)) throw NumericError("calibration_samples: temperature must be positive");
  Tensor logits = predict_logits(net, data.to_tensor());
  for (double& v : logits.values()) v /= temperature;
  const Tensor p = softmax(logits);
  std::vector<CalibrationSample> out(data.n);
  for (std::size_t r = 0; r < data.n; ++r) {
    auto row = p.row(r);
    const auto it = std::max_element(row.begin(), row.end());
    out[r] = {*it, static_cast<std::size_t>(it - row.begin()) == data.labels[r]};
  }
  return out;
}

double temperature_nll(const Tensor& logits, std::span<const std::uint16_t> labels, double t) {
  Tensor scaled = logits;
  for (double& v : scaled.values()) v /= t;
  const auto losses = per_example_xent(scaled, labels);
  Accumulator acc;
  for (double l : losses) acc.add(l);
  return acc.value() / static_cast<double>(losses.size());
}

Temperature temperature_tune(const Tensor& logits, std::span<const std::uint16_t> labels) {
  if (logits.rows() == 0) throw NumericError("temperature_tune: empty holdout");
  if (labels.size() != logits.rows()) throw NumericError("temperature_tune: label count mismatch");
  if (std::all_of(labels.begin(), labels.end(), [&](auto y) { return y == labels[0]; })) {
    return {1.0, true};
  }
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -3.0, b = 3.0;
  auto f = [&](double s) { return temperature_nll(logits, labels, std::exp(s)); };
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-4) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return {std::exp(0.5 * (a + b)), false};
}

Temperature temperature_tune(const Mlp& net, const Dataset& holdout) {
  if (holdout.n == 0) throw NumericError("temperature_tune: empty holdout");
  return temperature_tune(predict_logits(net, holdout.to_tensor()), holdout.labels);
}

std::string scores_to_csv(std::span<const ScoredExample> scores) {
  std::string out = "score,is_ood\n";
  for (const auto& s : scores) out += format_double(s.anomaly_score) + (s.is_ood ? ",1\n" : ",0\n");
  return out;
}

std::vector<ScoredExample> scores_from_csv(const std::string& text) {
  std::vector<ScoredExample> out;
  for (const auto& line : csv_lines(text, "score,is_ood")) {
    auto [v, flag] = parse_pair(line);
    if (!std::isfinite(v)) throw DataError("score CSV: non-finite score");
    out.push_back({v, flag});
  }
  return out;
}

std::string calibration_to_csv(std::span<const CalibrationSample> samples) {
  std::string out = "confidence,correct\n";
  for (const auto& s : samples) out += format_double(s.confidence) + (s.correct ? ",1\n" : ",0\n");
  return out;
}

std::vector<CalibrationSample> calibration_from_csv(const std::string& text) {
  std::vector<CalibrationSample> out;
  for (const auto& line : csv_lines(text, "confidence,correct")) {
    auto [v, flag] = parse_pair(line);
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("calibration CSV: confidence outside [0, 1]");
    out.push_back({v, flag});
  }
  return out;
}

}  // namespace prl
