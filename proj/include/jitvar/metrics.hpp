#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jitvar/model.hpp"
#include "jitvar/seedctl.hpp"

namespace jitvar {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  /// tp / (tp + fn)
  double acc_faulty() const;
  /// tn / (tn + fp)
  double acc_clean() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

enum class Metric { auc, acc_faulty, acc_clean };

inline constexpr Metric kAllMetrics[] = {Metric::auc, Metric::acc_faulty, Metric::acc_clean};

std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view name);

enum class RunStatus { ok, failed };

/// Evaluation of one trained model.
struct RunRecord {
  std::string setting_id;
  std::uint64_t run_index = 0;
  RunStatus status = RunStatus::ok;
  double auc = 0.0;
  double acc_faulty = 0.0;
  double acc_clean = 0.0;
  ConfusionMatrix confusion;
  double runtime_seconds = 0.0;
  SeedPlan seeds;
  StreamDigests digests;
  std::string started_at;
  std::string finished_at;
  std::string error;  // set when status == failed

  double value(Metric m) const;
};

struct MetricSpread {
  double max_diff = 0.0;
  double std_dev = 0.0;
};

struct VarianceSummary {
  std::string setting_id;
  MetricSpread auc;
  MetricSpread acc_faulty;
  MetricSpread acc_clean;
  double runtime_mean = 0.0;
  double runtime_std = 0.0;
  std::size_t n_runs = 0;

  const MetricSpread& spread(Metric m) const;
};

/// Probability that a random positive outscores a random negative, ties
/// counted half. Midrank computation in O(n log n); the result is the same
/// rational number as the pairwise definition.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Predicted faulty iff score >= threshold.
ConfusionMatrix classify_and_count(std::span<const double> scores, std::span<const int> labels,
                                   double threshold = 0.5);

/// max - min; needs at least two values.
double max_diff(std::span<const double> values);

/// Sample standard deviation (divisor n - 1), two-pass.
double std_dev(std::span<const double> values);

double mean(std::span<const double> values);

/// Builds the RunRecord metric fields from test-set scores.
RunRecord evaluate_run(std::span<const double> scores, std::span<const int> labels,
                       double threshold = 0.5);

/// MaxDiff and StdDev of every metric plus runtime mean/StdDev.
/// All records must share one setting id and be successful; n >= 2.
VarianceSummary summarize_setting(std::span<const RunRecord> records);

}  // namespace jitvar
