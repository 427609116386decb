#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jitvar {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One change commit. label: 1 = faulty, 0 = clean.
struct CommitRecord {
  std::string id;
  std::string message;
  std::string added_lines;
  std::string removed_lines;
  int label = 0;

  bool operator==(const CommitRecord&) const = default;
};

/// Reserved token ids.
inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kOovId = 1;

struct TokenizedCommit {
  std::string id;
  std::vector<std::int32_t> message_ids;  // exactly message_len entries
  std::vector<std::int32_t> code_ids;     // exactly code_len entries
  int label = 0;

  bool operator==(const TokenizedCommit&) const = default;
};

struct TokenizerConfig {
  std::size_t message_len = 32;
  std::size_t code_len = 64;
  std::size_t vocab_cap = 5000;
};

struct SplitDataset {
  std::vector<TokenizedCommit> train;
  std::vector<TokenizedCommit> test;
  std::map<std::string, std::int32_t> vocab;  // excludes the two reserved ids
  std::size_t vocab_size = 2;                 // reserved ids included
  double faulty_fraction_train = 0.0;
  double class_weight = 1.0;                  // #clean_train / #faulty_train
  TokenizerConfig config;
};

// ---- JSON lines ---------------------------------------------------------

/// Reads a JSON-lines dataset (keys: id, message, added, removed, label).
/// Blank lines are skipped. Errors name the 1-based line number.
std::vector<CommitRecord> load_jsonl(const std::filesystem::path& path);
std::vector<CommitRecord> parse_jsonl(std::istream& in);

void write_jsonl(const std::vector<CommitRecord>& records, std::ostream& out);
void write_jsonl(const std::vector<CommitRecord>& records, const std::filesystem::path& path);

// ---- synthetic data -----------------------------------------------------

enum class Preset { openstack_like, qt_like, custom };

Preset parse_preset(std::string_view name);
std::string_view preset_name(Preset p);

/// Faulty share of the preset (openstack-like 0.13, qt-like 0.08). Throws for custom.
double preset_faulty_fraction(Preset p);

/// Deterministic synthetic commits: exactly round(n * faulty_fraction) faulty.
/// Faulty commits carry 2..5 "risky" tokens with probability 0.8, clean ones
/// with probability 0.1.
std::vector<CommitRecord> generate_synthetic(Preset preset, std::size_t n_commits,
                                             double faulty_fraction, std::uint64_t gen_seed);

// ---- tokenization -------------------------------------------------------

/// Lowercases ASCII and splits on runs of characters that are not ASCII
/// letters or digits. Bytes >= 0x80 count as token characters so UTF-8 words
/// survive intact.
std::vector<std::string> tokenize(std::string_view text);

/// Code channel tokens: added-line tokens, then removed-line tokens each
/// prefixed with '-'.
std::vector<std::string> code_tokens(const CommitRecord& r);

/// Stable 64-bit hash of a commit id (FNV-1a followed by the splitmix64 finalizer).
std::uint64_t id_hash(std::string_view id);

/// true when the record belongs to the test side of the frozen split.
/// Per class, records are ordered by (id_hash, id) and the first
/// round(0.2 * class_count) go to test.
std::vector<bool> stratified_test_mask(const std::vector<CommitRecord>& records);

/// Splits, builds the vocabulary from the train side only, and encodes both sides.
SplitDataset build_vocab_and_tokenize(const std::vector<CommitRecord>& records,
                                      const TokenizerConfig& config = {});

}  // namespace jitvar
