#include "jitvar/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "jitvar/dataset.hpp"
#include "jitvar/harness.hpp"
#include "jitvar/report.hpp"

namespace jitvar {

namespace {

struct DataFlags {
  std::string preset = "openstack-like";
  std::size_t n = 2000;
  std::optional<double> faulty_frac;
  std::uint64_t seed = 1;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--preset", f.preset, "Synthetic preset: openstack-like, qt-like or custom")
      ->capture_default_str();
  cmd->add_option("--n", f.n, "Number of synthetic commits")->capture_default_str();
  cmd->add_option("--faulty-frac", f.faulty_frac,
                  "Faulty fraction (defaults to the preset's: openstack-like 0.13, qt-like 0.08)");
  cmd->add_option("--seed", f.seed, "Seed of the synthetic generator")->capture_default_str();
}

DatasetSource to_source(const DataFlags& f) {
  DatasetSource src;
  src.preset = parse_preset(f.preset);
  src.n_commits = f.n;
  src.faulty_fraction = f.faulty_frac;
  if (src.preset == Preset::custom && !src.faulty_fraction) {
    throw std::invalid_argument("preset 'custom' requires --faulty-frac");
  }
  src.gen_seed = f.seed;
  return src;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

report::ReportOptions report_options(const std::string& format, double alpha) {
  report::ReportOptions o;
  o.alpha = alpha;
  if (format == "md") {
    o.csv = false;
  } else if (format == "csv") {
    o.markdown = false;
  } else if (!format.empty()) {
    throw std::invalid_argument("--format must be md or csv");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("--alpha must lie in (0, 1)");
  return o;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nondeterminism variance lab for just-in-time fault prediction", "jitvar"};
  app.require_subcommand(1);

  // gen-data
  DataFlags gen_flags;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic JSON-lines commit dataset");
  add_data_flags(gen, gen_flags);
  gen->add_option("--out", gen_out, "Output .jsonl file")->required();

  // run
  DataFlags run_data;
  std::string dataset_path;
  std::string run_out;
  std::string settings_csv = "N,A,W,D,B,PN,PA,PW,PD,PB";
  std::size_t runs = 16;
  std::size_t epochs = 10;
  std::size_t workers = 4;
  std::size_t parallel = 1;
  std::uint64_t master_seed = kDefaultMasterSeed;
  bool entropy = false;
  bool save_models = false;
  bool seeded_p = false;
  auto* run = app.add_subcommand("run", "Train every setting runs times and record runs.jsonl");
  run->add_option("--dataset", dataset_path, "JSON-lines dataset (otherwise a synthetic preset)");
  add_data_flags(run, run_data);
  run->add_option("--runs", runs, "Identical runs per setting")->capture_default_str();
  run->add_option("--settings", settings_csv, "Comma-separated setting ids")->capture_default_str();
  run->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
  run->add_option("--workers", workers, "Gradient shards when P is on")->capture_default_str();
  run->add_option("--parallel", parallel, "Runs trained concurrently")->capture_default_str();
  run->add_option("--master-seed", master_seed, "Master seed of every factor stream")
      ->capture_default_str();
  run->add_option("--out", run_out, "Experiment directory")->required();
  run->add_flag("--entropy", entropy, "Seed factors that are on from OS entropy (not replayable)");
  run->add_flag("--save-models", save_models, "Write a checkpoint per run under models/");
  run->add_flag("--seeded-p", seeded_p,
                "Draw the P combine order from the P seed instead of OS entropy (replayable)");

  // report / compare
  std::string exp_dir;
  std::string report_out;
  std::string format;
  double alpha = 0.05;
  auto* rep = app.add_subcommand("report", "Write variance, runtime, significance and boxplot files");
  rep->add_option("--exp", exp_dir, "Experiment directory")->required();
  rep->add_option("--out", report_out, "Output directory (defaults to --exp)");
  rep->add_option("--format", format, "md or csv (default: both)");
  rep->add_option("--alpha", alpha, "Significance level")->capture_default_str();

  auto* cmp = app.add_subcommand("compare", "Write and print the significance table");
  cmp->add_option("--exp", exp_dir, "Experiment directory")->required();
  cmp->add_option("--out", report_out, "Output directory (defaults to --exp)");
  cmp->add_option("--format", format, "md or csv (default: both)");
  cmp->add_option("--alpha", alpha, "Significance level")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      const DatasetSource src = to_source(gen_flags);
      const auto records = src.materialize();
      write_jsonl(records, std::filesystem::path(gen_out));
      std::size_t faulty = 0;
      for (const auto& r : records) faulty += static_cast<std::size_t>(r.label);
      out << "wrote " << records.size() << " commits (" << faulty << " faulty) to " << gen_out
          << "\n";
    } else if (*run) {
      ExperimentConfig cfg;
      if (!dataset_path.empty()) {
        cfg.data.path = dataset_path;
      } else {
        cfg.data = to_source(run_data);
      }
      cfg.settings = parse_settings(settings_csv);
      cfg.runs_per_setting = runs;
      cfg.hp.epochs = epochs;
      cfg.hp.workers = workers;
      cfg.max_parallel = parallel;
      cfg.master_seed = master_seed;
      cfg.output_dir = run_out;
      cfg.entropy = entropy;
      cfg.save_checkpoints = save_models;
      cfg.combine_order = seeded_p ? CombineOrderSource::seeded : CombineOrderSource::entropy;
      const ExperimentResult res = run_experiment(cfg, &err);
      out << "runs.jsonl holds " << res.records.size() << " record(s) in " << run_out << "\n";
    } else if (*rep || *cmp) {
      const auto opts = report_options(format, alpha);
      const std::filesystem::path dst = report_out.empty() ? exp_dir : report_out;
      std::vector<std::string> warnings;
      std::vector<std::string> written;
      if (*rep) {
        written = report::write_report(exp_dir, dst, opts, &warnings);
      } else {
        written = report::write_significance(exp_dir, dst, opts, &warnings);
        const auto file = dst / (opts.markdown ? "significance.md" : "significance.csv");
        std::ifstream in(file);
        out << in.rdbuf();
      }
      print_warnings(warnings, err);
      for (const auto& f : written) out << "wrote " << (dst / f).string() << "\n";
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DatasetError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace jitvar
