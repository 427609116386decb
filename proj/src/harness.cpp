#include "jitvar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "jitvar/digest.hpp"

namespace jitvar {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::vector<CommitRecord> DatasetSource::materialize() const {
  if (path) return load_jsonl(*path);
  const double frac = faulty_fraction ? *faulty_fraction : preset_faulty_fraction(preset);
  return generate_synthetic(preset, n_commits, frac, gen_seed);
}

void ExperimentConfig::validate() const {
  hp.validate();
  if (runs_per_setting < 2) throw std::invalid_argument("runs_per_setting must be >= 2");
  if (settings.empty()) throw std::invalid_argument("at least one setting is required");
  std::set<std::string> ids;
  for (const auto& s : settings) {
    if (!ids.insert(s.id).second) throw std::invalid_argument("duplicate setting '" + s.id + "'");
  }
  if (max_parallel < 1) throw std::invalid_argument("max_parallel must be >= 1");
  if (output_dir.empty()) throw std::invalid_argument("output directory is required");
  if (tokenizer.message_len < hp.filter_widths.back() ||
      tokenizer.code_len < hp.filter_widths.back()) {
    throw std::invalid_argument("sequence lengths must be at least the widest filter");
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms.count()));
  return buf;
}

// ---- persistence --------------------------------------------------------

std::string record_to_json(const RunRecord& r) {
  ojson j;
  j["setting"] = r.setting_id;
  j["run"] = r.run_index;
  const bool ok = r.status == RunStatus::ok;
  j["status"] = ok ? "ok" : "failed";
  if (ok) {
    j["auc"] = r.auc;
    j["acc_faulty"] = r.acc_faulty;
    j["acc_clean"] = r.acc_clean;
    j["tp"] = r.confusion.tp;
    j["fp"] = r.confusion.fp;
    j["tn"] = r.confusion.tn;
    j["fn"] = r.confusion.fn;
    j["runtime_seconds"] = r.runtime_seconds;
  } else {
    for (const char* k : {"auc", "acc_faulty", "acc_clean", "tp", "fp", "tn", "fn",
                          "runtime_seconds"}) {
      j[k] = nullptr;
    }
  }
  ojson seeds;
  ojson digests;
  for (NiFactor f : kAllFactors) seeds[std::string(factor_name(f))] = r.seeds.seed(f);
  digests["W"] = to_hex(r.digests.w);
  digests["D"] = to_hex(r.digests.d);
  digests["B"] = to_hex(r.digests.b);
  digests["P"] = to_hex(r.digests.p);
  j["seeds"] = seeds;
  j["master_seed"] = r.seeds.master_seed;
  j["digests"] = digests;
  j["started_at"] = r.started_at;
  j["finished_at"] = r.finished_at;
  if (!ok) j["error"] = r.error;
  return j.dump();
}

namespace {

std::uint64_t parse_hex(const std::string& s) {
  std::size_t used = 0;
  const std::uint64_t v = std::stoull(s, &used, 16);
  if (used != s.size()) throw std::invalid_argument("bad hex digest '" + s + "'");
  return v;
}

}  // namespace

RunRecord record_from_json(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  RunRecord r;
  r.setting_id = j.at("setting").get<std::string>();
  r.run_index = j.at("run").get<std::uint64_t>();
  const auto status = j.at("status").get<std::string>();
  if (status != "ok" && status != "failed") throw std::invalid_argument("bad status '" + status + "'");
  r.status = status == "ok" ? RunStatus::ok : RunStatus::failed;
  if (r.status == RunStatus::ok) {
    r.auc = j.at("auc").get<double>();
    r.acc_faulty = j.at("acc_faulty").get<double>();
    r.acc_clean = j.at("acc_clean").get<double>();
    r.confusion.tp = j.at("tp").get<std::size_t>();
    r.confusion.fp = j.at("fp").get<std::size_t>();
    r.confusion.tn = j.at("tn").get<std::size_t>();
    r.confusion.fn = j.at("fn").get<std::size_t>();
    r.runtime_seconds = j.at("runtime_seconds").get<double>();
  } else {
    r.error = j.value("error", std::string{});
  }
  const auto& seeds = j.at("seeds");
  for (NiFactor f : kAllFactors) {
    r.seeds.seeds[static_cast<std::size_t>(f)] =
        seeds.at(std::string(factor_name(f))).get<std::uint64_t>();
  }
  r.seeds.master_seed = j.value("master_seed", std::uint64_t{0});
  r.seeds.run_index = r.run_index;
  if (j.contains("digests")) {
    const auto& d = j.at("digests");
    r.digests.w = parse_hex(d.at("W").get<std::string>());
    r.digests.d = parse_hex(d.at("D").get<std::string>());
    r.digests.b = parse_hex(d.at("B").get<std::string>());
    r.digests.p = parse_hex(d.at("P").get<std::string>());
  }
  r.started_at = j.value("started_at", std::string{});
  r.finished_at = j.value("finished_at", std::string{});
  return r;
}

std::vector<RunRecord> read_runs(const fs::path& runs_jsonl, std::vector<std::string>* warnings) {
  std::vector<RunRecord> out;
  if (!fs::exists(runs_jsonl)) return out;
  std::ifstream in(runs_jsonl, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + runs_jsonl.string() + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    ++line_no;
    const std::size_t nl = content.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    std::string line = content.substr(pos, terminated ? nl - pos : std::string::npos);
    pos = terminated ? nl + 1 : content.size();
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const std::exception& e) {
      if (!terminated) {
        if (warnings) {
          warnings->push_back(runs_jsonl.string() + ": ignoring truncated final line " +
                              std::to_string(line_no));
        }
        break;
      }
      throw std::runtime_error(runs_jsonl.string() + ": line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return out;
}

std::string config_to_json(const ExperimentConfig& c) {
  ojson j;
  ojson data;
  if (c.data.path) {
    data["path"] = c.data.path->string();
  } else {
    data["preset"] = std::string(preset_name(c.data.preset));
    data["n_commits"] = c.data.n_commits;
    data["faulty_fraction"] = c.data.faulty_fraction ? *c.data.faulty_fraction
                                                     : preset_faulty_fraction(c.data.preset);
    data["gen_seed"] = c.data.gen_seed;
  }
  j["dataset"] = data;
  j["tokenizer"] = {{"message_len", c.tokenizer.message_len},
                    {"code_len", c.tokenizer.code_len},
                    {"vocab_cap", c.tokenizer.vocab_cap}};
  j["hyperparams"] = {{"embed_dim", c.hp.embed_dim},
                      {"filter_widths", c.hp.filter_widths},
                      {"filters_per_width", c.hp.filters_per_width},
                      {"hidden_units", c.hp.hidden_units},
                      {"dropout_p", c.hp.dropout_p},
                      {"learning_rate", c.hp.learning_rate},
                      {"batch_size", c.hp.batch_size},
                      {"epochs", c.hp.epochs},
                      {"workers", c.hp.workers}};
  std::vector<std::string> ids;
  for (const auto& s : c.settings) ids.push_back(s.id);
  j["settings"] = ids;
  j["runs_per_setting"] = c.runs_per_setting;
  j["master_seed"] = c.master_seed;
  j["max_parallel"] = c.max_parallel;
  j["entropy"] = c.entropy;
  j["combine_order"] = c.combine_order == CombineOrderSource::entropy ? "entropy" : "seeded";
  j["save_checkpoints"] = c.save_checkpoints;
  j["threshold"] = c.threshold;
  j["p_factor"] = "P (GPU analog): nondeterministic order of shard gradient sums";
  return j.dump(2);
}

// ---- run_experiment -----------------------------------------------------

namespace {

struct Task {
  const SettingSpec* setting;
  std::uint64_t run_index;
};

RunRecord execute(const Task& task, const ExperimentConfig& config, const SplitDataset& split,
                  const std::vector<int>& test_labels) {
  const SettingSpec& setting = *task.setting;
  RunRecord rec;
  rec.setting_id = setting.id;
  rec.run_index = task.run_index;
  rec.seeds = config.entropy ? plan_for_run_entropy(setting, config.master_seed, task.run_index)
                             : plan_for_run(setting, config.master_seed, task.run_index);
  rec.started_at = utc_timestamp();
  try {
    TrainOptions opts;
    opts.order_source = config.combine_order;
    TrainOutcome outcome = train(split, config.hp, rec.seeds, setting.is_on(NiFactor::P), opts);
    const std::vector<double> scores = predict(outcome.params, split.test);
    RunRecord metrics = evaluate_run(scores, test_labels, config.threshold);
    rec.auc = metrics.auc;
    rec.acc_faulty = metrics.acc_faulty;
    rec.acc_clean = metrics.acc_clean;
    rec.confusion = metrics.confusion;
    rec.runtime_seconds = outcome.runtime_seconds;
    rec.digests = outcome.digests;
    if (config.save_checkpoints) {
      save_checkpoint(outcome.params, config.output_dir / "models" /
                                          (setting.id + "_" + std::to_string(task.run_index) +
                                           ".ckpt"));
    }
  } catch (const TrainingDiverged& e) {
    rec.status = RunStatus::failed;
    rec.error = e.what();
  }
  rec.finished_at = utc_timestamp();
  return rec;
}

/// Drops a partial final line so appends start on a fresh line.
void repair_tail(const fs::path& file) {
  if (!fs::exists(file)) return;
  std::ifstream in(file, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  if (content.empty() || content.back() == '\n') return;
  const std::size_t last_nl = content.rfind('\n');
  fs::resize_file(file, last_nl == std::string::npos ? 0 : last_nl + 1);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  ExperimentResult result;

  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    throw std::invalid_argument("cannot create output directory '" + config.output_dir.string() +
                             "': " + ec.message());
  }
  if (config.save_checkpoints) fs::create_directories(config.output_dir / "models");
  const fs::path runs_path = config.output_dir / "runs.jsonl";
  {
    std::ofstream probe(runs_path, std::ios::binary | std::ios::app);
    if (!probe) throw std::invalid_argument("output directory not writable: '" + runs_path.string() + "'");
  }
  {
    std::ofstream exp(config.output_dir / "experiment.json", std::ios::binary | std::ios::trunc);
    if (!exp) throw std::runtime_error("cannot write experiment.json");
    exp << config_to_json(config) << '\n';
  }

  std::vector<RunRecord> existing = read_runs(runs_path, &result.warnings);
  repair_tail(runs_path);
  std::set<std::pair<std::string, std::uint64_t>> done;
  for (const auto& r : existing) done.emplace(r.setting_id, r.run_index);

  std::vector<Task> tasks;
  for (const auto& s : config.settings) {
    for (std::uint64_t k = 0; k < config.runs_per_setting; ++k) {
      if (done.count({s.id, k})) {
        ++result.skipped;
      } else {
        tasks.push_back({&s, k});
      }
    }
  }

  if (!tasks.empty()) {
    const SplitDataset split = build_vocab_and_tokenize(config.data.materialize(), config.tokenizer);
    std::vector<int> test_labels;
    for (const auto& t : split.test) test_labels.push_back(t.label);

    std::ofstream out(runs_path, std::ios::binary | std::ios::app);
    std::vector<std::optional<RunRecord>> slots(tasks.size());
    std::size_t next_to_write = 0;
    std::mutex mu;
    std::atomic<std::size_t> next_task{0};
    std::exception_ptr first_error;

    auto worker = [&] {
      for (;;) {
        const std::size_t i = next_task.fetch_add(1);
        if (i >= tasks.size()) return;
        RunRecord rec;
        try {
          rec = execute(tasks[i], config, split, test_labels);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first_error) first_error = std::current_exception();
          next_task = tasks.size();
          return;
        }
        std::lock_guard lock(mu);
        if (log) {
          *log << "[" << rec.setting_id << " run " << rec.run_index << "] "
               << (rec.status == RunStatus::ok ? "auc=" + std::to_string(rec.auc) : "FAILED: " + rec.error)
               << "\n";
        }
        slots[i] = std::move(rec);
        while (next_to_write < slots.size() && slots[next_to_write]) {
          out << record_to_json(*slots[next_to_write]) << '\n';
          out.flush();
          ++next_to_write;
        }
      }
    };

    const std::size_t n_threads = std::min(config.max_parallel, tasks.size());
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);
    if (!out) throw std::runtime_error("write to '" + runs_path.string() + "' failed");
    result.trained = tasks.size();
    for (auto& s : slots) {
      if (s && s->status == RunStatus::failed) {
        result.warnings.push_back("run " + s->setting_id + "/" + std::to_string(s->run_index) +
                                  " failed and is excluded from aggregation: " + s->error);
      }
    }
  }

  result.records = read_runs(runs_path, &result.warnings);
  if (log) {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : result.records) ++counts[r.setting_id];
    *log << "trained " << result.trained << " run(s), skipped " << result.skipped
         << " already recorded; records per setting:";
    for (const auto& s : config.settings) *log << " " << s.id << "=" << counts[s.id];
    *log << "\n";
    for (const auto& w : result.warnings) *log << "warning: " << w << "\n";
  }
  return result;
}

// ---- aggregation --------------------------------------------------------

std::vector<RunRecord> records_for(const std::vector<RunRecord>& records,
                                   const std::string& setting_id) {
  std::vector<RunRecord> out;
  for (const auto& r : records) {
    if (r.setting_id == setting_id && r.status == RunStatus::ok) out.push_back(r);
  }
  std::sort(out.begin(), out.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.run_index < b.run_index; });
  return out;
}

std::vector<std::string> canonical_setting_order(const std::vector<RunRecord>& records) {
  std::vector<std::string> present;
  for (const auto& r : records) {
    if (std::find(present.begin(), present.end(), r.setting_id) == present.end()) {
      present.push_back(r.setting_id);
    }
  }
  std::vector<std::string> out;
  for (const char* id : {"N", "A", "W", "D", "B", "PN", "PA", "PW", "PD", "PB"}) {
    if (std::find(present.begin(), present.end(), id) != present.end()) out.emplace_back(id);
  }
  for (const auto& id : present) {
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  return out;
}

SummaryResult summarize(const std::vector<RunRecord>& records,
                        const std::vector<std::string>& order) {
  std::vector<std::string> ids = order;
  if (ids.empty()) {
    for (const auto& r : records) {
      if (std::find(ids.begin(), ids.end(), r.setting_id) == ids.end()) ids.push_back(r.setting_id);
    }
  }
  SummaryResult out;
  for (const auto& id : ids) {
    const auto group = records_for(records, id);
    if (group.size() < 2) {
      out.warnings.push_back("setting " + id + " has " + std::to_string(group.size()) +
                             " successful run(s); skipped");
      continue;
    }
    out.summaries.push_back(summarize_setting(group));
  }
  return out;
}

std::string_view comparison_kind_name(ComparisonKind k) {
  return k == ComparisonKind::algorithmic ? "algorithmic" : "implementation";
}

ComparisonPlan default_plan(const std::vector<std::string>& setting_ids) {
  auto has = [&](const std::string& id) {
    return std::find(setting_ids.begin(), setting_ids.end(), id) != setting_ids.end();
  };
  ComparisonPlan plan;
  auto add = [&](std::string a, std::string b, ComparisonKind k) {
    if (has(a) && has(b)) plan.pairs.push_back({std::move(a), std::move(b), k});
  };
  for (const char* x : {"W", "D", "B", "A"}) add("N", x, ComparisonKind::algorithmic);
  for (const char* x : {"W", "D", "B", "A"}) {
    add("PN", std::string("P") + x, ComparisonKind::algorithmic);
  }
  for (const char* x : {"N", "A", "W", "D", "B"}) {
    add(x, std::string("P") + x, ComparisonKind::implementation);
  }
  return plan;
}

CompareResult compare(const std::vector<RunRecord>& records, const ComparisonPlan& plan,
                      Metric metric, double alpha) {
  CompareResult out;
  for (const auto& pair : plan.pairs) {
    const auto base = records_for(records, pair.baseline);
    const auto treat = records_for(records, pair.treatment);
    if (base.size() < 2 || treat.size() < 2) {
      out.warnings.push_back("pair (" + pair.baseline + ", " + pair.treatment +
                             ") skipped: a group has fewer than two successful runs");
      continue;
    }
    std::vector<double> a, b;
    for (const auto& r : base) a.push_back(r.value(metric));
    for (const auto& r : treat) b.push_back(r.value(metric));
    for (auto test : {stats::levene(a, b), stats::mann_whitney_u(a, b)}) {
      const bool sig = test.p_value < alpha;
      out.results.push_back({pair, metric, std::move(test), sig});
    }
  }
  return out;
}

}  // namespace jitvar
