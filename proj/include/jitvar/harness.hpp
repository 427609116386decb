#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jitvar/dataset.hpp"
#include "jitvar/metrics.hpp"
#include "jitvar/model.hpp"
#include "jitvar/seedctl.hpp"
#include "jitvar/stats.hpp"

namespace jitvar {

/// Master seed used when none is given. The committed regression fixture
/// for the N-vs-X significance checks was produced with it.
inline constexpr std::uint64_t kDefaultMasterSeed = 7;

/// Either a JSON-lines file or a synthetic preset.
struct DatasetSource {
  std::optional<std::filesystem::path> path;
  Preset preset = Preset::openstack_like;
  std::size_t n_commits = 2000;
  std::optional<double> faulty_fraction;  // preset default when empty
  std::uint64_t gen_seed = 1;

  std::vector<CommitRecord> materialize() const;
};

struct ExperimentConfig {
  DatasetSource data;
  TokenizerConfig tokenizer;
  Hyperparams hp;
  std::vector<SettingSpec> settings = default_settings();
  std::size_t runs_per_setting = 16;
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::filesystem::path output_dir;
  std::size_t max_parallel = 1;
  /// On-factors draw their seeds from std::random_device instead of the master seed.
  bool entropy = false;
  /// P-on shard combine order; the default is not replayable.
  CombineOrderSource combine_order = CombineOrderSource::entropy;
  /// Writes models/<setting>_<run>.ckpt for every successful run.
  bool save_checkpoints = false;
  double threshold = 0.5;

  void validate() const;
};

struct ExperimentResult {
  std::vector<RunRecord> records;  // everything in runs.jsonl after the call
  std::size_t trained = 0;         // runs executed by this call
  std::size_t skipped = 0;         // (setting, run) pairs already present
  std::vector<std::string> warnings;
};

/// Trains every (setting, run_index) pair not yet present in
/// <output_dir>/runs.jsonl and appends one line per run, in task order,
/// flushing after each. Writes <output_dir>/experiment.json first.
/// Progress and the completion summary go to `log` when given.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

// ---- persistence --------------------------------------------------------

std::string record_to_json(const RunRecord& r);
RunRecord record_from_json(const std::string& line);

/// Reads runs.jsonl. A truncated final line (no trailing newline) is ignored
/// and reported through `warnings`; any other malformed line throws.
std::vector<RunRecord> read_runs(const std::filesystem::path& runs_jsonl,
                                 std::vector<std::string>* warnings = nullptr);

std::string config_to_json(const ExperimentConfig& config);

std::string utc_timestamp();

// ---- aggregation --------------------------------------------------------

struct SummaryResult {
  std::vector<VarianceSummary> summaries;
  std::vector<std::string> warnings;
};

/// One summary per setting with >= 2 successful runs. Summaries follow
/// `order`; when it is empty, the order of first appearance in `records`.
SummaryResult summarize(const std::vector<RunRecord>& records,
                        const std::vector<std::string>& order = {});

enum class ComparisonKind { algorithmic, implementation };

std::string_view comparison_kind_name(ComparisonKind k);

struct ComparisonPair {
  std::string baseline;
  std::string treatment;
  ComparisonKind kind = ComparisonKind::algorithmic;

  bool operator==(const ComparisonPair&) const = default;
};

struct ComparisonPlan {
  std::vector<ComparisonPair> pairs;
};

/// Algorithmic pairs (N, X) and (PN, PX) for X in W, D, B, A, then
/// implementation pairs (X, PX) for X in N, A, W, D, B. Pairs with a
/// setting missing from `setting_ids` are left out.
ComparisonPlan default_plan(const std::vector<std::string>& setting_ids);

struct ComparisonResult {
  ComparisonPair pair;
  Metric metric = Metric::auc;
  stats::TestResult result;
  bool significant = false;
};

struct CompareResult {
  std::vector<ComparisonResult> results;
  std::vector<std::string> warnings;
};

/// Levene and Mann-Whitney results for every pair, in plan order.
/// significant iff p < alpha.
CompareResult compare(const std::vector<RunRecord>& records, const ComparisonPlan& plan,
                      Metric metric, double alpha = 0.05);

/// Successful records of one setting, ordered by run index.
std::vector<RunRecord> records_for(const std::vector<RunRecord>& records,
                                   const std::string& setting_id);

/// Canonical table order: N, A, W, D, B, PN, PA, PW, PD, PB, then any
/// other ids in order of first appearance.
std::vector<std::string> canonical_setting_order(const std::vector<RunRecord>& records);

}  // namespace jitvar
