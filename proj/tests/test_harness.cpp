#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "jitvar/harness.hpp"
#include "test_util.hpp"

using namespace jitvar;
using testutil::TempDir;

namespace {

ExperimentConfig small_config(const std::filesystem::path& dir, const std::string& settings) {
  ExperimentConfig c;
  c.data.n_commits = 300;
  c.tokenizer = {12, 16, 400};
  c.hp.embed_dim = 6;
  c.hp.filters_per_width = 3;
  c.hp.hidden_units = 6;
  c.hp.epochs = 2;
  c.settings = parse_settings(settings);
  c.runs_per_setting = 3;
  c.output_dir = dir;
  c.combine_order = CombineOrderSource::seeded;
  return c;
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Metric fields only: timestamps and runtimes differ between executions.
std::string metric_key(const RunRecord& r) {
  std::ostringstream s;
  s.precision(17);
  s << r.setting_id << "/" << r.run_index << " " << r.auc << " " << r.acc_faulty << " "
    << r.acc_clean << " " << r.confusion.tp << " " << r.confusion.fp << " " << r.confusion.tn
    << " " << r.confusion.fn;
  return s.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config validation") {
  ExperimentConfig c = small_config("/tmp/unused", "N");
  CHECK_NOTHROW(c.validate());
  c.runs_per_setting = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config("", "N");
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config("/tmp/unused", "N");
  c.tokenizer.message_len = 2;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("run_experiment writes one record per run, resumes and is idempotent") {
  TempDir dir("exp");
  const auto cfg = small_config(dir.path(), "N,W,PN");
  const auto first = run_experiment(cfg);
  CHECK(first.trained == 9);
  CHECK(first.skipped == 0);
  REQUIRE(first.records.size() == 9);
  CHECK(std::filesystem::exists(dir / "experiment.json"));
  // Task order: setting by setting, run index ascending.
  CHECK(first.records[0].setting_id == "N");
  CHECK(first.records[3].setting_id == "W");
  CHECK(first.records[5].run_index == 2);
  for (const auto& r : first.records) CHECK(r.status == RunStatus::ok);

  const auto again = run_experiment(cfg);
  CHECK(again.trained == 0);
  CHECK(again.skipped == 9);
  CHECK(lines_of(dir / "runs.jsonl").size() == 9);

  // Drop the W runs; only they are retrained and they reproduce their metrics.
  std::vector<std::string> kept;
  std::vector<std::string> w_before;
  for (const auto& line : lines_of(dir / "runs.jsonl")) {
    const auto rec = record_from_json(line);
    if (rec.setting_id == "W") {
      w_before.push_back(metric_key(rec));
    } else {
      kept.push_back(line);
    }
  }
  {
    std::ofstream out(dir / "runs.jsonl", std::ios::trunc);
    for (const auto& l : kept) out << l << "\n";
  }
  const auto resumed = run_experiment(cfg);
  CHECK(resumed.trained == 3);
  CHECK(resumed.skipped == 6);
  std::vector<std::string> w_after;
  for (const auto& r : records_for(resumed.records, "W")) w_after.push_back(metric_key(r));
  CHECK(w_after == w_before);
}

TEST_CASE("a truncated final line is dropped and its run retrained") {
  TempDir dir("trunc");
  const auto cfg = small_config(dir.path(), "N");
  run_experiment(cfg);
  const auto full = testutil::slurp(dir / "runs.jsonl");
  const auto last_start = full.rfind('\n', full.size() - 2) + 1;
  testutil::spit(dir / "runs.jsonl", full.substr(0, last_start + 20));

  std::vector<std::string> warnings;
  CHECK(read_runs(dir / "runs.jsonl", &warnings).size() == 2);
  CHECK(warnings.size() == 1);

  const auto res = run_experiment(cfg);
  CHECK(res.trained == 1);
  CHECK(res.records.size() == 3);
  CHECK(lines_of(dir / "runs.jsonl").size() == 3);

  testutil::spit(dir / "runs.jsonl", "{broken\n" + full);
  CHECK_THROWS(read_runs(dir / "runs.jsonl"));
}

TEST_CASE("records round trip through JSON") {
  RunRecord r;
  r.setting_id = "PA";
  r.run_index = 11;
  r.auc = 0.8123456789012345;
  r.acc_faulty = 1.0 / 3.0;
  r.acc_clean = 0.1 + 0.2;
  r.confusion = {3, 4, 5, 6};
  r.runtime_seconds = 12.25;
  r.seeds = plan_for_run(SettingSpec::from_id("PA"), 7, 11);
  r.digests = {0xffffffffffffffffULL, 1, 0x0123456789abcdefULL, 0};
  r.started_at = "2026-01-01T00:00:00.000Z";
  r.finished_at = "2026-01-01T00:00:12.250Z";
  const auto back = record_from_json(record_to_json(r));
  CHECK(back.setting_id == r.setting_id);
  CHECK(back.run_index == r.run_index);
  CHECK(back.auc == r.auc);
  CHECK(back.acc_faulty == r.acc_faulty);
  CHECK(back.acc_clean == r.acc_clean);
  CHECK(back.confusion == r.confusion);
  CHECK(back.runtime_seconds == r.runtime_seconds);
  CHECK(back.seeds == r.seeds);
  CHECK(back.digests == r.digests);
  CHECK(back.started_at == r.started_at);
  CHECK(record_to_json(back) == record_to_json(r));

  RunRecord failed = r;
  failed.status = RunStatus::failed;
  failed.error = "non-finite loss";
  const auto json = record_to_json(failed);
  CHECK(json.find("\"auc\":null") != std::string::npos);
  const auto fb = record_from_json(json);
  CHECK(fb.status == RunStatus::failed);
  CHECK(fb.error == "non-finite loss");
}

TEST_CASE("parallel execution matches serial for P-free settings") {
  TempDir serial("serial");
  TempDir parallel("parallel");
  auto cfg = small_config(serial.path(), "N,W,D");
  const auto a = run_experiment(cfg);
  cfg.output_dir = parallel.path();
  cfg.max_parallel = 3;
  const auto b = run_experiment(cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(metric_key(a.records[i]) == metric_key(b.records[i]));
    CHECK(a.records[i].digests == b.records[i].digests);
  }
}

TEST_CASE("checkpoints of setting N are byte-identical") {
  TempDir dir("ckpt");
  auto cfg = small_config(dir.path(), "N");
  cfg.save_checkpoints = true;
  run_experiment(cfg);
  const auto c0 = testutil::slurp(dir / "models/N_0.ckpt");
  CHECK(!c0.empty());
  CHECK(testutil::slurp(dir / "models/N_1.ckpt") == c0);
  CHECK(testutil::slurp(dir / "models/N_2.ckpt") == c0);
}

TEST_CASE("diverged runs are recorded and excluded") {
  TempDir dir("diverge");
  auto cfg = small_config(dir.path(), "N");
  cfg.hp.learning_rate = 1e200;
  const auto res = run_experiment(cfg);
  REQUIRE(res.records.size() == 3);
  for (const auto& r : res.records) CHECK(r.status == RunStatus::failed);
  CHECK(!res.warnings.empty());
  const auto s = summarize(res.records);
  CHECK(s.summaries.empty());
  CHECK(s.warnings.size() == 1);
}

TEST_CASE("an unusable output directory fails before training") {
  TempDir dir("blocked");
  testutil::spit(dir / "file", "x");
  const auto cfg = small_config(dir / "file/sub", "N");
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("comparison plan") {
  const auto all = default_plan({"N", "A", "W", "D", "B", "PN", "PA", "PW", "PD", "PB"});
  const std::vector<ComparisonPair> expected{
      {"N", "W", ComparisonKind::algorithmic},     {"N", "D", ComparisonKind::algorithmic},
      {"N", "B", ComparisonKind::algorithmic},     {"N", "A", ComparisonKind::algorithmic},
      {"PN", "PW", ComparisonKind::algorithmic},   {"PN", "PD", ComparisonKind::algorithmic},
      {"PN", "PB", ComparisonKind::algorithmic},   {"PN", "PA", ComparisonKind::algorithmic},
      {"N", "PN", ComparisonKind::implementation}, {"A", "PA", ComparisonKind::implementation},
      {"W", "PW", ComparisonKind::implementation}, {"D", "PD", ComparisonKind::implementation},
      {"B", "PB", ComparisonKind::implementation}};
  CHECK(all.pairs == expected);
  CHECK(default_plan({"N", "W"}).pairs.size() == 1);
}

TEST_CASE("compare and summarize") {
  std::vector<RunRecord> rs;
  for (int k = 0; k < 16; ++k) {
    RunRecord n;
    n.setting_id = "N";
    n.run_index = static_cast<std::uint64_t>(k);
    n.auc = 0.8;
    n.acc_faulty = 0.5;
    n.acc_clean = 0.9;
    rs.push_back(n);
    RunRecord w = n;
    w.setting_id = "W";
    w.auc = 0.78 + 0.0025 * k;
    rs.push_back(w);
  }
  const auto cmp = compare(rs, default_plan({"N", "W"}), Metric::auc);
  REQUIRE(cmp.results.size() == 2);
  CHECK(cmp.results[0].result.test == stats::TestKind::levene);
  CHECK(cmp.results[0].significant);
  CHECK(cmp.results[1].result.test == stats::TestKind::mann_whitney_u);

  const auto self = compare(rs, ComparisonPlan{{{"N", "N", ComparisonKind::algorithmic}}}, Metric::auc);
  for (const auto& r : self.results) CHECK(r.result.p_value == 1.0);

  const auto missing = compare(rs, default_plan({"N", "W", "PN", "PW"}), Metric::auc);
  CHECK(missing.results.size() == 2);

  const auto sum = summarize(rs, {"W", "N"});
  REQUIRE(sum.summaries.size() == 2);
  CHECK(sum.summaries[0].setting_id == "W");
  CHECK(sum.summaries[1].auc.std_dev == 0.0);
  CHECK(canonical_setting_order(rs) == std::vector<std::string>{"N", "W"});
}

}  // TEST_SUITE
