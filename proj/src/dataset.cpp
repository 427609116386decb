#include "jitvar/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "jitvar/seedctl.hpp"

namespace jitvar {

namespace {

using ojson = nlohmann::ordered_json;

std::string line_error(std::size_t line_no, std::string_view what) {
  return "line " + std::to_string(line_no) + ": " + std::string(what);
}

const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                    std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DatasetError(line_error(line_no, std::string("missing field ") + key));
  return *it;
}

std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  const auto& v = require_field(obj, key, line_no);
  if (!v.is_string()) {
    throw DatasetError(line_error(line_no, std::string("field ") + key + " must be a string"));
  }
  return v.get<std::string>();
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

// ---- JSON lines ---------------------------------------------------------

std::vector<CommitRecord> parse_jsonl(std::istream& in) {
  std::vector<CommitRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DatasetError(line_error(line_no, std::string("malformed JSON (") + e.what() + ")"));
    }
    if (!obj.is_object()) throw DatasetError(line_error(line_no, "expected a JSON object"));

    CommitRecord r;
    r.id = require_string(obj, "id", line_no);
    r.message = require_string(obj, "message", line_no);
    r.added_lines = require_string(obj, "added", line_no);
    r.removed_lines = require_string(obj, "removed", line_no);
    const auto& label = require_field(obj, "label", line_no);
    if (!label.is_number_integer() || (label.get<long long>() != 0 && label.get<long long>() != 1)) {
      throw DatasetError(line_error(line_no, "label must be 0 or 1"));
    }
    r.label = label.get<int>();
    if (!seen.insert(r.id).second) {
      throw DatasetError(line_error(line_no, "duplicate id '" + r.id + "'"));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CommitRecord> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset file '" + path.string() + "'");
  return parse_jsonl(in);
}

void write_jsonl(const std::vector<CommitRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    ojson obj;
    obj["id"] = r.id;
    obj["message"] = r.message;
    obj["added"] = r.added_lines;
    obj["removed"] = r.removed_lines;
    obj["label"] = r.label;
    out << obj.dump() << '\n';
  }
}

void write_jsonl(const std::vector<CommitRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write dataset file '" + path.string() + "'");
  write_jsonl(records, out);
  if (!out) throw DatasetError("write failed for '" + path.string() + "'");
}

// ---- synthetic data -----------------------------------------------------

Preset parse_preset(std::string_view name) {
  if (name == "openstack-like") return Preset::openstack_like;
  if (name == "qt-like") return Preset::qt_like;
  if (name == "custom") return Preset::custom;
  throw std::invalid_argument("unknown preset '" + std::string(name) +
                              "' (expected openstack-like, qt-like or custom)");
}

std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::openstack_like: return "openstack-like";
    case Preset::qt_like: return "qt-like";
    case Preset::custom: return "custom";
  }
  return "custom";
}

double preset_faulty_fraction(Preset p) {
  switch (p) {
    case Preset::openstack_like: return 0.13;
    case Preset::qt_like: return 0.08;
    case Preset::custom: break;
  }
  throw std::invalid_argument("preset 'custom' has no default faulty fraction");
}

namespace {

constexpr std::array<std::string_view, 48> kMessageWords{
    "fix",     "add",      "update",  "remove",  "refactor", "test",    "docs",    "cleanup",
    "support", "config",   "bug",     "issue",   "handle",   "error",   "build",   "merge",
    "version", "api",      "client",  "server",  "network",  "port",    "volume",  "image",
    "instance", "driver",  "patch",   "change",  "use",      "move",    "rename",  "improve",
    "allow",   "check",    "return",  "value",   "default",  "option",  "path",    "file",
    "widget",  "layout",   "signal",  "model",   "view",     "scheduler", "quota", "token"};

constexpr std::array<std::string_view, 40> kCodeWords{
    "get",    "set",    "init",   "load",   "save",   "read",    "write",  "parse",
    "node",   "list",   "item",   "count",  "size",   "buf",     "data",   "ctx",
    "self",   "result", "index",  "name",   "key",    "config",  "request", "response",
    "return", "if",     "else",   "for",    "while",  "const",   "auto",   "int",
    "string", "vector", "append", "update", "log",    "debug",   "assert", "true"};

constexpr std::array<std::string_view, 20> kRiskyWords{
    "strcpy", "malloc",  "realloc", "memcpy",   "mutex",  "unlock", "race",
    "overflow", "volatile", "goto",  "reinterpret", "unsafe", "hack", "workaround",
    "nullptr", "threading", "deadlock", "retry",  "timeout", "legacy"};

constexpr double kSignalProbFaulty = 0.8;
constexpr double kSignalProbClean = 0.1;

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& words) {
  return words[static_cast<std::size_t>(rng.below(N))];
}

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

std::string code_line(Rng& rng) {
  std::string line = std::string(pick(rng, kCodeWords));
  line += " = ";
  line += pick(rng, kCodeWords);
  line += '(';
  std::size_t args = between(rng, 1, 5);
  for (std::size_t a = 0; a < args; ++a) {
    if (a) line += ", ";
    line += pick(rng, kCodeWords);
    if (rng.uniform() < 0.3) {
      line += '_';
      line += pick(rng, kCodeWords);
    }
  }
  line += ");";
  return line;
}

}  // namespace

std::vector<CommitRecord> generate_synthetic(Preset preset, std::size_t n_commits,
                                             double faulty_fraction, std::uint64_t gen_seed) {
  if (n_commits < 10) throw std::invalid_argument("generate_synthetic: n_commits must be >= 10");
  if (!(faulty_fraction > 0.0 && faulty_fraction < 1.0)) {
    throw std::invalid_argument("generate_synthetic: faulty_fraction must lie in (0, 1)");
  }
  const auto n_faulty = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_commits) * faulty_fraction));
  if (n_faulty == 0 || n_faulty == n_commits) {
    throw std::invalid_argument("generate_synthetic: faulty_fraction " +
                                std::to_string(faulty_fraction) + " leaves one class empty for n=" +
                                std::to_string(n_commits));
  }

  Rng rng(mix(gen_seed, 0x6a69747661726461ULL, static_cast<std::uint64_t>(preset) + 1));

  std::vector<int> labels(n_commits, 0);
  std::fill_n(labels.begin(), n_faulty, 1);
  rng.shuffle(std::span<int>(labels));

  std::vector<CommitRecord> out;
  out.reserve(n_commits);
  const std::string prefix(preset_name(preset));
  for (std::size_t i = 0; i < n_commits; ++i) {
    CommitRecord r;
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "-%06zu", i);
    r.id = prefix + idbuf;
    r.label = labels[i];

    std::vector<std::string> msg;
    for (std::size_t w = between(rng, 4, 12); w > 0; --w) msg.emplace_back(pick(rng, kMessageWords));

    std::vector<std::string> added;
    for (std::size_t l = between(rng, 2, 8); l > 0; --l) added.push_back(code_line(rng));
    std::vector<std::string> removed;
    for (std::size_t l = between(rng, 0, 5); l > 0; --l) removed.push_back(code_line(rng));

    const double p_signal = r.label == 1 ? kSignalProbFaulty : kSignalProbClean;
    if (rng.uniform() < p_signal) {
      for (std::size_t k = between(rng, 2, 5); k > 0; --k) {
        std::string_view risky = pick(rng, kRiskyWords);
        if (rng.uniform() < 0.25) {
          msg.insert(msg.begin() + static_cast<std::ptrdiff_t>(rng.below(msg.size() + 1)),
                     std::string(risky));
        } else {
          auto& line = added[static_cast<std::size_t>(rng.below(added.size()))];
          line = std::string(risky) + "(" + line + ")";
        }
      }
    }

    for (std::size_t w = 0; w < msg.size(); ++w) {
      if (w) r.message += ' ';
      r.message += msg[w];
    }
    for (std::size_t l = 0; l < added.size(); ++l) {
      if (l) r.added_lines += '\n';
      r.added_lines += added[l];
    }
    for (std::size_t l = 0; l < removed.size(); ++l) {
      if (l) r.removed_lines += '\n';
      r.removed_lines += removed[l];
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---- tokenization -------------------------------------------------------

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      cur += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> code_tokens(const CommitRecord& r) {
  std::vector<std::string> out = tokenize(r.added_lines);
  for (auto& t : tokenize(r.removed_lines)) out.push_back("-" + t);
  return out;
}

std::uint64_t id_hash(std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : id) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return fmix64(h);
}

std::vector<bool> stratified_test_mask(const std::vector<CommitRecord>& records) {
  std::vector<bool> mask(records.size(), false);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].label == cls) idx.push_back(i);
    }
    std::vector<std::uint64_t> h(records.size());
    for (std::size_t i : idx) h[i] = id_hash(records[i].id);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (h[a] != h[b]) return h[a] < h[b];
      return records[a].id < records[b].id;
    });
    const auto n_test = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < n_test; ++k) mask[idx[k]] = true;
  }
  return mask;
}

namespace {

std::vector<std::int32_t> encode(const std::vector<std::string>& tokens, std::size_t len,
                                 const std::unordered_map<std::string, std::int32_t>& ids) {
  std::vector<std::int32_t> out(len, kPadId);
  for (std::size_t i = 0; i < len && i < tokens.size(); ++i) {
    auto it = ids.find(tokens[i]);
    out[i] = it == ids.end() ? kOovId : it->second;
  }
  return out;
}

void check_both_classes(const std::vector<TokenizedCommit>& side, const char* name) {
  std::size_t faulty = 0;
  for (const auto& t : side) faulty += static_cast<std::size_t>(t.label);
  if (faulty == 0 || faulty == side.size()) {
    throw DatasetError(std::string(name) +
                       " split has no faulty or no clean examples (AUC undefined)");
  }
}

}  // namespace

SplitDataset build_vocab_and_tokenize(const std::vector<CommitRecord>& records,
                                      const TokenizerConfig& config) {
  if (records.empty()) throw DatasetError("dataset is empty");
  if (config.message_len == 0 || config.code_len == 0) {
    throw std::invalid_argument("sequence lengths must be >= 1");
  }
  if (config.vocab_cap < 3) throw std::invalid_argument("vocab_cap must be >= 3");

  const std::vector<bool> is_test = stratified_test_mask(records);

  std::vector<std::vector<std::string>> msg_tokens(records.size());
  std::vector<std::vector<std::string>> code_toks(records.size());
  std::unordered_map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    msg_tokens[i] = tokenize(records[i].message);
    code_toks[i] = code_tokens(records[i]);
    if (is_test[i]) continue;
    for (const auto& t : msg_tokens[i]) ++counts[t];
    for (const auto& t : code_toks[i]) ++counts[t];
  }

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > config.vocab_cap - 2) ranked.resize(config.vocab_cap - 2);

  SplitDataset out;
  out.config = config;
  std::unordered_map<std::string, std::int32_t> ids;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    auto id = static_cast<std::int32_t>(k + 2);
    ids.emplace(ranked[k].first, id);
    out.vocab.emplace(ranked[k].first, id);
  }
  out.vocab_size = ranked.size() + 2;

  for (std::size_t i = 0; i < records.size(); ++i) {
    TokenizedCommit t;
    t.id = records[i].id;
    t.label = records[i].label;
    t.message_ids = encode(msg_tokens[i], config.message_len, ids);
    t.code_ids = encode(code_toks[i], config.code_len, ids);
    (is_test[i] ? out.test : out.train).push_back(std::move(t));
  }

  check_both_classes(out.train, "train");
  check_both_classes(out.test, "test");

  std::size_t faulty = 0;
  for (const auto& t : out.train) faulty += static_cast<std::size_t>(t.label);
  const std::size_t clean = out.train.size() - faulty;
  out.faulty_fraction_train = static_cast<double>(faulty) / static_cast<double>(out.train.size());
  out.class_weight = static_cast<double>(clean) / static_cast<double>(faulty);
  return out;
}

}  // namespace jitvar
