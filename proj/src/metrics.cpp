#include "jitvar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace jitvar {

double ConfusionMatrix::acc_faulty() const {
  if (tp + fn == 0) throw std::domain_error("acc_faulty undefined: no faulty examples");
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double ConfusionMatrix::acc_clean() const {
  if (tn + fp == 0) throw std::domain_error("acc_clean undefined: no clean examples");
  return static_cast<double>(tn) / static_cast<double>(tn + fp);
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::auc: return "auc";
    case Metric::acc_faulty: return "acc_faulty";
    case Metric::acc_clean: return "acc_clean";
  }
  return "auc";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (metric_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown metric '" + std::string(name) +
                              "' (expected auc, acc_faulty or acc_clean)");
}

double RunRecord::value(Metric m) const {
  switch (m) {
    case Metric::auc: return auc;
    case Metric::acc_faulty: return acc_faulty;
    case Metric::acc_clean: return acc_clean;
  }
  return auc;
}

const MetricSpread& VarianceSummary::spread(Metric m) const {
  switch (m) {
    case Metric::auc: return auc;
    case Metric::acc_faulty: return acc_faulty;
    case Metric::acc_clean: return acc_clean;
  }
  return auc;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the midrank sum of the positives, kept in integers so the
  // result is exact before the final division.
  std::uint64_t rank2_sum = 0;
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1..j share midrank (i+1+j)/2.
    const std::uint64_t rank2 = i + 1 + j;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank2_sum += rank2;
        ++pos;
      }
    }
    i = j;
  }
  const std::uint64_t neg = n - pos;
  if (pos == 0 || neg == 0) throw std::domain_error("AUC undefined: need both classes");
  // 2U = 2 * sum(ranks) - P(P+1)
  const std::uint64_t u2 = rank2_sum - pos * (pos + 1);
  return static_cast<double>(u2) / static_cast<double>(2 * pos * neg);
}

ConfusionMatrix classify_and_count(std::span<const double> scores, std::span<const int> labels,
                                   double threshold) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("classify_and_count: length mismatch");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted_faulty = scores[i] >= threshold;
    if (labels[i] == 1) {
      (predicted_faulty ? cm.tp : cm.fn) += 1;
    } else {
      (predicted_faulty ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

double max_diff(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("max_diff needs at least two values");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sequence");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double std_dev(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("std_dev needs at least two values");
  // A rounded mean of equal values can sit one ulp off them.
  if (max_diff(values) == 0.0) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

RunRecord evaluate_run(std::span<const double> scores, std::span<const int> labels,
                       double threshold) {
  RunRecord r;
  r.auc = auc(scores, labels);
  r.confusion = classify_and_count(scores, labels, threshold);
  r.acc_faulty = r.confusion.acc_faulty();
  r.acc_clean = r.confusion.acc_clean();
  return r;
}

VarianceSummary summarize_setting(std::span<const RunRecord> records) {
  if (records.size() < 2) throw std::invalid_argument("summarize_setting needs at least two runs");
  VarianceSummary s;
  s.setting_id = records.front().setting_id;
  for (const auto& r : records) {
    if (r.setting_id != s.setting_id) {
      throw std::invalid_argument("summarize_setting: mixed setting ids '" + s.setting_id +
                                  "' and '" + r.setting_id + "'");
    }
    if (r.status != RunStatus::ok) {
      throw std::invalid_argument("summarize_setting: failed run in input");
    }
  }
  std::vector<double> v(records.size());
  auto spread = [&](auto field) {
    std::transform(records.begin(), records.end(), v.begin(), field);
    return MetricSpread{max_diff(v), std_dev(v)};
  };
  s.auc = spread([](const RunRecord& r) { return r.auc; });
  s.acc_faulty = spread([](const RunRecord& r) { return r.acc_faulty; });
  s.acc_clean = spread([](const RunRecord& r) { return r.acc_clean; });
  std::transform(records.begin(), records.end(), v.begin(),
                 [](const RunRecord& r) { return r.runtime_seconds; });
  s.runtime_mean = mean(v);
  s.runtime_std = std_dev(v);
  s.n_runs = records.size();
  return s;
}

}  // namespace jitvar
