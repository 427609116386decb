#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "jitvar/harness.hpp"

namespace fixtures {

/// 16 hand-made runs for each of the ten settings. N and PN are constant;
/// the others spread by a per-setting step so every column has a unique maximum.
inline std::vector<jitvar::RunRecord> fixture_records() {
  const char* ids[] = {"N", "A", "W", "D", "B", "PN", "PA", "PW", "PD", "PB"};
  std::vector<jitvar::RunRecord> out;
  for (int s = 0; s < 10; ++s) {
    const bool flat = s == 0 || s == 5;
    for (int k = 0; k < 16; ++k) {
      jitvar::RunRecord r;
      r.setting_id = ids[s];
      r.run_index = static_cast<std::uint64_t>(k);
      const double wobble = flat ? 0.0 : static_cast<double>((k * 7) % 16) - 7.5;
      r.auc = 0.80 + 0.0003 * (s + 1) * wobble;
      r.acc_faulty = 0.50 + 0.0011 * (s + 1) * wobble;
      r.acc_clean = 0.90 - 0.0007 * (11 - s) * wobble;
      r.confusion = {26, 35, 313, 26};
      r.runtime_seconds = 30.0 + s + (flat ? 0.0 : 0.5 * wobble);
      r.seeds = jitvar::plan_for_run(jitvar::SettingSpec::from_id(ids[s]), 7, r.run_index);
      r.started_at = "2026-01-01T00:00:00.000Z";
      r.finished_at = "2026-01-01T00:00:30.000Z";
      out.push_back(r);
    }
  }
  return out;
}

inline void write_fixture_experiment(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "runs.jsonl", std::ios::binary | std::ios::trunc);
  for (const auto& r : fixture_records()) out << jitvar::record_to_json(r) << '\n';
}

/// Long double MaxDiff and sample StdDev, independent of the library code.
struct OracleSpread {
  long double max_diff;
  long double std_dev;
};

inline OracleSpread oracle_spread(const std::vector<double>& v) {
  long double lo = v[0], hi = v[0], sum = 0;
  for (double x : v) {
    lo = std::min<long double>(lo, x);
    hi = std::max<long double>(hi, x);
    sum += x;
  }
  const long double m = sum / v.size();
  long double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return {hi - lo, std::sqrt(ss / (v.size() - 1))};
}

inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') {
        quoted = !quoted;
      } else if (c == ',' && !quoted) {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace fixtures
