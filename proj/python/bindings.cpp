#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "jitvar/cli.hpp"
#include "jitvar/dataset.hpp"
#include "jitvar/harness.hpp"
#include "jitvar/metrics.hpp"
#include "jitvar/report.hpp"
#include "jitvar/seedctl.hpp"
#include "jitvar/stats.hpp"

namespace py = pybind11;
using namespace jitvar;

namespace {

py::dict test_dict(const stats::TestResult& r) {
  py::dict d;
  d["test"] = std::string(stats::test_name(r.test));
  d["statistic"] = r.statistic;
  d["p_value"] = r.p_value;
  d["n1"] = r.n1;
  d["n2"] = r.n2;
  d["degenerate"] = r.degenerate;
  d["method"] = r.method_note;
  return d;
}

py::dict commit_dict(const CommitRecord& c) {
  py::dict d;
  d["id"] = c.id;
  d["message"] = c.message;
  d["added"] = c.added_lines;
  d["removed"] = c.removed_lines;
  d["label"] = c.label;
  return d;
}

py::dict record_dict(const RunRecord& r) {
  py::dict d;
  d["setting"] = r.setting_id;
  d["run"] = r.run_index;
  d["status"] = r.status == RunStatus::ok ? "ok" : "failed";
  d["auc"] = r.auc;
  d["acc_faulty"] = r.acc_faulty;
  d["acc_clean"] = r.acc_clean;
  d["runtime_seconds"] = r.runtime_seconds;
  d["error"] = r.error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Nondeterminism variance lab for just-in-time fault prediction";

  m.def("mix", &mix, py::arg("a"), py::arg("b"), py::arg("c"));
  m.def(
      "derive_seed",
      [](std::uint64_t master, const std::string& factor, std::uint64_t run, bool on) {
        static const std::map<std::string, NiFactor> names{
            {"W", NiFactor::W}, {"D", NiFactor::D}, {"B", NiFactor::B}, {"P", NiFactor::P}};
        const auto it = names.find(factor);
        if (it == names.end()) throw py::value_error("factor must be one of W, D, B, P");
        return derive_seed(master, it->second, run, on);
      },
      py::arg("master"), py::arg("factor"), py::arg("run_index"), py::arg("on"));
  m.def("settings", [] {
    std::vector<std::string> ids;
    for (const auto& s : default_settings()) ids.push_back(s.id);
    return ids;
  });

  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) { return auc(scores, labels); },
      py::arg("scores"), py::arg("labels"));
  m.def("max_diff", [](const std::vector<double>& v) { return max_diff(v); });
  m.def("std_dev", [](const std::vector<double>& v) { return std_dev(v); });
  m.def("levene", [](const std::vector<double>& a, const std::vector<double>& b) {
    return test_dict(stats::levene(a, b));
  });
  m.def("mann_whitney_u", [](const std::vector<double>& a, const std::vector<double>& b) {
    return test_dict(stats::mann_whitney_u(a, b));
  });
  m.def("reg_inc_beta", &stats::reg_inc_beta, py::arg("x"), py::arg("a"), py::arg("b"));
  m.def("std_normal_cdf", &stats::std_normal_cdf, py::arg("z"));

  m.def(
      "generate_synthetic",
      [](const std::string& preset, std::size_t n, std::optional<double> faulty_fraction,
         std::uint64_t seed) {
        const Preset p = parse_preset(preset);
        const double f = faulty_fraction ? *faulty_fraction : preset_faulty_fraction(p);
        py::list out;
        for (const auto& c : generate_synthetic(p, n, f, seed)) out.append(commit_dict(c));
        return out;
      },
      py::arg("preset") = "openstack-like", py::arg("n") = 2000,
      py::arg("faulty_fraction") = py::none(), py::arg("seed") = 1);

  m.def(
      "run_experiment",
      [](const std::filesystem::path& out_dir, const std::string& settings, std::size_t runs,
         std::size_t n_commits, std::size_t epochs, std::uint64_t master_seed,
         std::size_t max_parallel) {
        ExperimentConfig cfg;
        cfg.output_dir = out_dir;
        cfg.settings = parse_settings(settings);
        cfg.runs_per_setting = runs;
        cfg.data.n_commits = n_commits;
        cfg.hp.epochs = epochs;
        cfg.master_seed = master_seed;
        cfg.max_parallel = max_parallel;
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(cfg);
        }
        py::list out;
        for (const auto& r : res.records) out.append(record_dict(r));
        return out;
      },
      py::arg("out_dir"), py::arg("settings") = "N,A,W,D,B,PN,PA,PW,PD,PB", py::arg("runs") = 16,
      py::arg("n_commits") = 2000, py::arg("epochs") = 10,
      py::arg("master_seed") = kDefaultMasterSeed, py::arg("max_parallel") = 1);

  m.def(
      "write_report",
      [](const std::filesystem::path& exp_dir, std::optional<std::filesystem::path> out_dir,
         double alpha) {
        report::ReportOptions opts;
        opts.alpha = alpha;
        return report::write_report(exp_dir, out_dir ? *out_dir : exp_dir, opts);
      },
      py::arg("exp_dir"), py::arg("out_dir") = py::none(), py::arg("alpha") = 0.05);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli_dispatch(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));

  py::register_exception<DatasetError>(m, "DatasetError", PyExc_ValueError);
}
