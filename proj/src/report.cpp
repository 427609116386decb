#include "jitvar/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace jitvar::report {

namespace fs = std::filesystem;

namespace {

/// Decimal string of |value| split at the point, shifted `shift` places left
/// (i.e. multiplied by 10^shift).
void decimal_parts(double value, int shift, std::string& int_part, std::string& frac_part) {
  char buf[512];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, std::abs(value), std::chars_format::fixed);
  if (ec != std::errc{}) throw std::runtime_error("format_decimal: to_chars failed");
  std::string s(buf, end);
  const std::size_t dot = s.find('.');
  int_part = dot == std::string::npos ? s : s.substr(0, dot);
  frac_part = dot == std::string::npos ? "" : s.substr(dot + 1);
  for (int k = 0; k < shift; ++k) {
    if (frac_part.empty()) {
      int_part += '0';
    } else {
      int_part += frac_part.front();
      frac_part.erase(0, 1);
    }
  }
}

std::string round_half_even(bool negative, std::string int_part, std::string frac_part, int places) {
  const auto keep = static_cast<std::size_t>(places);
  std::string digits = int_part;
  bool round_up = false;
  if (frac_part.size() <= keep) {
    frac_part.append(keep - frac_part.size(), '0');
    digits += frac_part;
  } else {
    digits += frac_part.substr(0, keep);
    const std::string rest = frac_part.substr(keep);
    const bool tail_nonzero = rest.find_first_not_of('0', 1) != std::string::npos;
    if (rest[0] > '5' || (rest[0] == '5' && tail_nonzero)) {
      round_up = true;
    } else if (rest[0] == '5') {
      round_up = ((digits.back() - '0') % 2) == 1;
    }
  }
  if (round_up) {
    std::size_t i = digits.size();
    while (i > 0) {
      --i;
      if (digits[i] == '9') {
        digits[i] = '0';
      } else {
        ++digits[i];
        break;
      }
      if (i == 0) digits.insert(digits.begin(), '1');
    }
  }
  std::string ip = digits.substr(0, digits.size() - keep);
  const std::string fp = digits.substr(digits.size() - keep);
  const std::size_t nz = ip.find_first_not_of('0');
  ip = nz == std::string::npos ? "0" : ip.substr(nz);
  const bool is_zero = ip == "0" && fp.find_first_not_of('0') == std::string::npos;
  std::string out = (negative && !is_zero) ? "-" : "";
  out += ip;
  if (keep > 0) out += "." + fp;
  return out;
}

std::string format_shifted(double value, int shift, int places) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::string ip, fp;
  decimal_parts(value, shift, ip, fp);
  return round_half_even(std::signbit(value), ip, fp, places);
}

const char* kVarianceCsvHeader =
    "setting,auc_maxdiff_pct,auc_stddev_pct,faulty_maxdiff_pct,faulty_stddev_pct,"
    "clean_maxdiff_pct,clean_stddev_pct,n_runs\n";

int setting_rank(const std::string& id) {
  static const char* kOrder[] = {"N", "A", "W", "D", "B", "PN", "PA", "PW", "PD", "PB"};
  for (int i = 0; i < 10; ++i) {
    if (id == kOrder[i]) return i;
  }
  return 10;
}

std::vector<VarianceSummary> ordered(std::vector<VarianceSummary> s) {
  std::stable_sort(s.begin(), s.end(), [](const auto& a, const auto& b) {
    return setting_rank(a.setting_id) < setting_rank(b.setting_id);
  });
  return s;
}

bool p_on(const std::string& id) { return id.size() == 2 && id.front() == 'P'; }

std::string markdown_variance(const std::vector<VarianceSummary>& rows) {
  std::ostringstream md;
  md << "| Setting | AUC score (%) MaxDiff | AUC score (%) StdDev | per-class: faulty (%) MaxDiff "
        "| per-class: faulty (%) StdDev | per-class: clean (%) MaxDiff | per-class: clean (%) "
        "StdDev |\n";
  md << "|---|---:|---:|---:|---:|---:|---:|\n";
  std::vector<double> cols[6];
  for (const auto& s : rows) {
    int c = 0;
    for (Metric m : kAllMetrics) {
      cols[c++].push_back(s.spread(m).max_diff);
      cols[c++].push_back(s.spread(m).std_dev);
    }
  }
  double col_max[6];
  for (int c = 0; c < 6; ++c) {
    col_max[c] = cols[c].empty() ? 0.0 : *std::max_element(cols[c].begin(), cols[c].end());
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    md << "| " << rows[r].setting_id;
    for (int c = 0; c < 6; ++c) {
      const double v = cols[c][r];
      const std::string cell = format_percent(v);
      if (col_max[c] > 0.0 && v == col_max[c]) {
        md << " | **" << cell << "**";
      } else {
        md << " | " << cell;
      }
    }
    md << " |\n";
  }
  return md.str();
}

}  // namespace

std::string format_decimal(double value, int places) {
  if (places < 0) throw std::invalid_argument("format_decimal: negative places");
  return format_shifted(value, 0, places);
}

std::string format_percent(double ratio) { return format_shifted(ratio, 2, 2); }

std::string format_exact(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("format_exact: to_chars failed");
  return std::string(buf, end);
}

Table emit_variance_table(const std::vector<VarianceSummary>& summaries, PFilter filter) {
  const auto all = ordered(summaries);
  std::vector<VarianceSummary> off_rows, on_rows;
  for (const auto& s : all) (p_on(s.setting_id) ? on_rows : off_rows).push_back(s);

  Table t;
  std::ostringstream md;
  const bool show_off = filter != PFilter::on && !off_rows.empty();
  const bool show_on = filter != PFilter::off && !on_rows.empty();
  if (show_off) {
    md << "### Variance, P off (serial gradient reduction)\n\n" << markdown_variance(off_rows);
  }
  if (show_on) {
    if (show_off) md << "\n";
    md << "### Variance, P on (GPU analog: parallel reduction order)\n\n"
       << markdown_variance(on_rows);
  }
  t.markdown = md.str();

  std::ostringstream csv;
  csv << kVarianceCsvHeader;
  for (const auto& s : all) {
    if ((filter == PFilter::off && p_on(s.setting_id)) ||
        (filter == PFilter::on && !p_on(s.setting_id))) {
      continue;
    }
    csv << s.setting_id;
    for (Metric m : kAllMetrics) {
      csv << ',' << format_percent(s.spread(m).max_diff) << ',' << format_percent(s.spread(m).std_dev);
    }
    csv << ',' << s.n_runs << '\n';
  }
  t.csv = csv.str();
  return t;
}

Table emit_runtime_table(const std::vector<VarianceSummary>& summaries, bool contended) {
  const auto rows = ordered(summaries);
  Table t;
  std::ostringstream md, csv;
  md << "### Training time in minutes\n\n";
  if (contended) {
    md << "Runs were co-scheduled (max parallel > 1): timings are contended.\n\n";
  }
  md << "| Setting | Mean | StdDev | Runs |\n|---|---:|---:|---:|\n";
  csv << "setting,mean_minutes,stddev_minutes,n_runs,contended\n";
  for (const auto& s : rows) {
    const std::string mean_min = format_decimal(s.runtime_mean / 60.0, 2);
    const std::string std_min = format_decimal(s.runtime_std / 60.0, 2);
    md << "| " << s.setting_id << " | " << mean_min << " | " << std_min << " | " << s.n_runs
       << " |\n";
    csv << s.setting_id << ',' << mean_min << ',' << std_min << ',' << s.n_runs << ','
        << (contended ? "true" : "false") << '\n';
  }
  t.markdown = md.str();
  t.csv = csv.str();
  return t;
}

Table emit_significance_table(const std::vector<ComparisonResult>& results, double alpha) {
  Table t;
  std::ostringstream md, csv;
  md << "### Significance (alpha = " << format_exact(alpha) << ")\n\n";
  md << "| Baseline | Treatment | Kind | Metric | Test | Statistic | p-value | Significant | Method "
        "|\n|---|---|---|---|---|---:|---:|---|---|\n";
  csv << "baseline,treatment,kind,metric,test,statistic,p_value,significant,n1,n2,method\n";
  for (const auto& r : results) {
    const std::string stat = format_decimal(r.result.statistic, 4);
    const std::string p = format_decimal(r.result.p_value, 4);
    md << "| " << r.pair.baseline << " | " << r.pair.treatment << " | "
       << comparison_kind_name(r.pair.kind) << " | " << metric_name(r.metric) << " | "
       << stats::test_name(r.result.test) << " | " << stat << " | " << p << " | "
       << (r.significant ? "yes" : "no") << " | " << r.result.method_note << " |\n";
    csv << r.pair.baseline << ',' << r.pair.treatment << ',' << comparison_kind_name(r.pair.kind)
        << ',' << metric_name(r.metric) << ',' << stats::test_name(r.result.test) << ','
        << format_exact(r.result.statistic) << ',' << format_exact(r.result.p_value) << ','
        << (r.significant ? "true" : "false") << ',' << r.result.n1 << ',' << r.result.n2 << ",\""
        << r.result.method_note << "\"\n";
  }
  t.markdown = md.str();
  t.csv = csv.str();
  return t;
}

double quantile_linear(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double pos = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

FiveNumber five_number_summary(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return {values.front(), quantile_linear(values, 0.25), quantile_linear(values, 0.5),
          quantile_linear(values, 0.75), values.back()};
}

std::string emit_boxplot_data(const std::vector<RunRecord>& records, Metric metric) {
  std::ostringstream csv;
  csv << "# metric=" << metric_name(metric)
      << " (ratio); quartiles by linear interpolation between closest ranks at position "
         "(n-1)*p\n";
  csv << "setting,n,min,q1,median,q3,max,values\n";
  for (const auto& id : canonical_setting_order(records)) {
    const auto group = records_for(records, id);
    if (group.size() < 2) continue;
    std::vector<double> v;
    for (const auto& r : group) v.push_back(r.value(metric));
    const FiveNumber f = five_number_summary(v);
    csv << id << ',' << v.size() << ',' << format_exact(f.min) << ',' << format_exact(f.q1) << ','
        << format_exact(f.median) << ',' << format_exact(f.q3) << ',' << format_exact(f.max)
        << ",\"";
    for (std::size_t i = 0; i < v.size(); ++i) csv << (i ? " " : "") << format_exact(v[i]);
    csv << "\"\n";
  }
  return csv.str();
}

std::vector<ComparisonResult> compare_all_metrics(const std::vector<RunRecord>& records,
                                                  double alpha, std::vector<std::string>* warnings) {
  const ComparisonPlan plan = default_plan(canonical_setting_order(records));
  std::vector<ComparisonResult> all;
  for (Metric m : kAllMetrics) {
    auto res = compare(records, plan, m, alpha);
    all.insert(all.end(), res.results.begin(), res.results.end());
    if (warnings && m == Metric::auc) {
      warnings->insert(warnings->end(), res.warnings.begin(), res.warnings.end());
    }
  }
  return all;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

std::vector<RunRecord> load_records(const fs::path& exp_dir, std::vector<std::string>* warnings) {
  const fs::path runs = exp_dir / "runs.jsonl";
  if (!fs::exists(runs)) {
    throw std::invalid_argument("no runs.jsonl in '" + exp_dir.string() + "'");
  }
  return read_runs(runs, warnings);
}

bool contended(const fs::path& exp_dir) {
  std::ifstream in(exp_dir / "experiment.json");
  if (!in) return false;
  try {
    const auto j = nlohmann::json::parse(in);
    return j.value("max_parallel", std::size_t{1}) > 1;
  } catch (const nlohmann::json::exception&) {
    return false;
  }
}

}  // namespace

std::vector<std::string> write_significance(const fs::path& exp_dir, const fs::path& out_dir,
                                            const ReportOptions& options,
                                            std::vector<std::string>* warnings) {
  const auto records = load_records(exp_dir, warnings);
  fs::create_directories(out_dir);
  const Table sig = emit_significance_table(compare_all_metrics(records, options.alpha, warnings),
                                            options.alpha);
  std::vector<std::string> written;
  if (options.markdown) {
    write_file(out_dir / "significance.md", sig.markdown);
    written.push_back("significance.md");
  }
  if (options.csv) {
    write_file(out_dir / "significance.csv", sig.csv);
    written.push_back("significance.csv");
  }
  return written;
}

std::vector<std::string> write_report(const fs::path& exp_dir, const fs::path& out_dir,
                                      const ReportOptions& options,
                                      std::vector<std::string>* warnings) {
  const auto records = load_records(exp_dir, warnings);
  fs::create_directories(out_dir);
  SummaryResult sum = summarize(records, canonical_setting_order(records));
  if (warnings) warnings->insert(warnings->end(), sum.warnings.begin(), sum.warnings.end());

  const Table variance = emit_variance_table(sum.summaries);
  const Table runtime = emit_runtime_table(sum.summaries, contended(exp_dir));
  std::vector<std::string> written;
  if (options.markdown) {
    write_file(out_dir / "variance.md", variance.markdown);
    write_file(out_dir / "runtime.md", runtime.markdown);
    written.insert(written.end(), {"variance.md", "runtime.md"});
  }
  if (options.csv) {
    write_file(out_dir / "variance.csv", variance.csv);
    write_file(out_dir / "runtime.csv", runtime.csv);
    written.insert(written.end(), {"variance.csv", "runtime.csv"});
  }
  for (auto& f : write_significance(exp_dir, out_dir, options)) written.push_back(std::move(f));
  for (Metric m : kAllMetrics) {
    const std::string name = "boxplot_" + std::string(metric_name(m)) + ".csv";
    write_file(out_dir / name, emit_boxplot_data(records, m));
    written.push_back(name);
  }
  return written;
}

}  // namespace jitvar::report
