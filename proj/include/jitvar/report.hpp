#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jitvar/harness.hpp"
#include "jitvar/metrics.hpp"

namespace jitvar::report {

/// Rounds the shortest round-trip decimal form of `value` half-to-even at
/// `places` decimals. 0.0045 is treated as the decimal 0.0045, not its
/// binary neighbour.
std::string format_decimal(double value, int places);

/// value * 100 with 2 decimals, shifted in decimal so no binary rounding
/// sneaks in (0.0045 -> "0.45").
std::string format_percent(double ratio);

/// Shortest round-trip representation.
std::string format_exact(double value);

struct Table {
  std::string markdown;
  std::string csv;
};

enum class PFilter { all, off, on };

/// MaxDiff/StdDev triplets for AUC, per-class faulty and per-class clean
/// accuracy, in percent with 2 decimals. Rows in canonical setting order;
/// markdown bolds column maxima (never in an all-zero column). With
/// PFilter::all the markdown holds one section per P state.
Table emit_variance_table(const std::vector<VarianceSummary>& summaries,
                          PFilter filter = PFilter::all);

/// Mean/StdDev of training time in minutes. `contended` marks tables whose
/// runs were co-scheduled.
Table emit_runtime_table(const std::vector<VarianceSummary>& summaries, bool contended);

Table emit_significance_table(const std::vector<ComparisonResult>& results, double alpha);

struct FiveNumber {
  double min, q1, median, q3, max;
};

/// Quantile at p in [0, 1] of sorted data: linear interpolation between the
/// closest ranks at position (n - 1) * p (numpy "linear", R type 7).
double quantile_linear(const std::vector<double>& sorted, double p);

FiveNumber five_number_summary(std::vector<double> values);

/// Per setting (canonical order): n, five-number summary, raw values.
std::string emit_boxplot_data(const std::vector<RunRecord>& records, Metric metric);

struct ReportOptions {
  bool markdown = true;
  bool csv = true;
  double alpha = 0.05;
};

/// Reads <exp_dir>/runs.jsonl (and experiment.json when present) and writes
/// variance, runtime and significance tables plus boxplot_<metric>.csv into
/// out_dir. Returns the written file names.
std::vector<std::string> write_report(const std::filesystem::path& exp_dir,
                                      const std::filesystem::path& out_dir,
                                      const ReportOptions& options,
                                      std::vector<std::string>* warnings = nullptr);

/// Significance tables only.
std::vector<std::string> write_significance(const std::filesystem::path& exp_dir,
                                            const std::filesystem::path& out_dir,
                                            const ReportOptions& options,
                                            std::vector<std::string>* warnings = nullptr);

std::vector<ComparisonResult> compare_all_metrics(const std::vector<RunRecord>& records,
                                                  double alpha,
                                                  std::vector<std::string>* warnings = nullptr);

}  // namespace jitvar::report
