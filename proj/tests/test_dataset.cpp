#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "jitvar/dataset.hpp"
#include "test_util.hpp"

using namespace jitvar;

namespace {

std::vector<CommitRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_jsonl(in);
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const DatasetError& e) {
    return e.what();
  }
  return "";
}

std::vector<CommitRecord> balanced(std::size_t n_per_class, const std::string& msg) {
  std::vector<CommitRecord> out;
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    CommitRecord r;
    r.id = "c" + std::to_string(i);
    r.message = msg;
    r.added_lines = "x = y";
    r.label = i < n_per_class ? 1 : 0;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("load_jsonl reads records in file order") {
  const auto rs = parse(
      R"({"id":"a","message":"fix null check","added":"if (p) {","removed":"","label":1})"
      "\n\n"
      R"({"id":"b","message":"docs","added":"","removed":"old","label":0})"
      "\n"
      R"({"id":"c","message":"","added":"","removed":"","label":0})"
      "\n");
  REQUIRE(rs.size() == 3);
  CHECK(rs[0].id == "a");
  CHECK(rs[0].message == "fix null check");
  CHECK(rs[0].added_lines == "if (p) {");
  CHECK(rs[0].label == 1);
  CHECK(rs[1].removed_lines == "old");
  CHECK(rs[2].message.empty());
  CHECK(parse("").empty());
}

TEST_CASE("load_jsonl errors name the line") {
  const std::string ok = R"({"id":"a","message":"m","added":"","removed":"","label":1})";
  CHECK(parse_error(ok + "\n" + R"({"id":"b","message":"m","added":"","removed":""})") ==
        "line 2: missing field label");
  CHECK(parse_error(ok + "\n" + ok + "\n") == "line 2: duplicate id 'a'");
  CHECK(parse_error(R"({"id":"a","message":"m","added":"","removed":"","label":2})") ==
        "line 1: label must be 0 or 1");
  CHECK(parse_error(ok + "\n{not json\n").rfind("line 2: malformed JSON", 0) == 0);
  CHECK_THROWS_AS(load_jsonl("/nonexistent/dir/data.jsonl"), DatasetError);
}

TEST_CASE("write_jsonl and load_jsonl round trip") {
  auto rs = generate_synthetic(Preset::qt_like, 50, 0.2, 3);
  rs[0].message = "caf\xc3\xa9 \"quoted\"\nnew line";
  testutil::TempDir dir("ds");
  write_jsonl(rs, dir / "d.jsonl");
  CHECK(load_jsonl(dir / "d.jsonl") == rs);
}

TEST_CASE("synthetic presets hit exact class counts") {
  const auto os = generate_synthetic(Preset::openstack_like, 2000, 0.13, 1);
  REQUIRE(os.size() == 2000);
  CHECK(std::count_if(os.begin(), os.end(), [](const auto& r) { return r.label == 1; }) == 260);
  CHECK(os.front().id.rfind("openstack-like-", 0) == 0);

  const auto qt = generate_synthetic(Preset::qt_like, 1000, 0.08, 1);
  CHECK(std::count_if(qt.begin(), qt.end(), [](const auto& r) { return r.label == 1; }) == 80);

  for (std::size_t n : {10, 37, 500, 1999}) {
    for (double f : {0.05, 0.13, 0.5, 0.77}) {
      const auto rs = generate_synthetic(Preset::custom, n, f, 9);
      const double faulty =
          static_cast<double>(std::count_if(rs.begin(), rs.end(), [](const auto& r) { return r.label == 1; }));
      CHECK(std::abs(faulty - static_cast<double>(n) * f) <= 0.5);
      std::set<std::string> ids;
      for (const auto& r : rs) ids.insert(r.id);
      CHECK(ids.size() == n);
    }
  }
  CHECK(preset_faulty_fraction(Preset::openstack_like) == 0.13);
  CHECK(preset_faulty_fraction(Preset::qt_like) == 0.08);
  CHECK_THROWS_AS(preset_faulty_fraction(Preset::custom), std::invalid_argument);
  CHECK(parse_preset("qt-like") == Preset::qt_like);
  CHECK_THROWS_AS(parse_preset("linux"), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(Preset::custom, 5, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(Preset::custom, 100, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(Preset::custom, 100, 1.0, 1), std::invalid_argument);
}

TEST_CASE("synthetic data is a pure function of its arguments") {
  std::ostringstream a;
  std::ostringstream b;
  write_jsonl(generate_synthetic(Preset::openstack_like, 300, 0.13, 5), a);
  write_jsonl(generate_synthetic(Preset::openstack_like, 300, 0.13, 5), b);
  CHECK(a.str() == b.str());
  std::ostringstream c;
  write_jsonl(generate_synthetic(Preset::openstack_like, 300, 0.13, 6), c);
  CHECK(a.str() != c.str());
}

TEST_CASE("tokenizer") {
  CHECK(tokenize("Fix NULL-check, in foo_bar()!") ==
        std::vector<std::string>{"fix", "null", "check", "in", "foo", "bar"});
  CHECK(tokenize("  ").empty());
  CHECK(tokenize("caf\xc3\xa9 ok") == std::vector<std::string>{"caf\xc3\xa9", "ok"});
  CommitRecord r;
  r.added_lines = "a = b";
  r.removed_lines = "c";
  CHECK(code_tokens(r) == std::vector<std::string>{"a", "b", "-c"});
}

TEST_CASE("truncation and padding") {
  auto rs = balanced(10, "fix fix fix");
  TokenizerConfig cfg;
  cfg.message_len = 2;
  cfg.code_len = 4;
  const auto split = build_vocab_and_tokenize(rs, cfg);
  const auto fix = split.vocab.at("fix");
  CHECK(fix >= 2);
  for (const auto& t : split.train) {
    CHECK(t.message_ids == std::vector<std::int32_t>{fix, fix});
    REQUIRE(t.code_ids.size() == 4);
    CHECK(t.code_ids[2] == kPadId);
    CHECK(t.code_ids[3] == kPadId);
  }
  CHECK(split.class_weight == 1.0);
}

TEST_CASE("tokens seen only in test map to OOV") {
  auto rs = balanced(20, "fix bug");
  const auto mask = stratified_test_mask(rs);
  const auto it = std::find(mask.begin(), mask.end(), true);
  REQUIRE(it != mask.end());
  const auto k = static_cast<std::size_t>(it - mask.begin());
  rs[k].message = "leak bug";
  const auto split = build_vocab_and_tokenize(rs);
  CHECK(split.vocab.count("leak") == 0);
  const auto t = std::find_if(split.test.begin(), split.test.end(),
                              [&](const auto& c) { return c.id == rs[k].id; });
  REQUIRE(t != split.test.end());
  CHECK(t->message_ids[0] == kOovId);
  CHECK(t->message_ids[1] == split.vocab.at("bug"));
}

TEST_CASE("vocabulary cap keeps the most frequent tokens, ties lexicographic") {
  auto rs = balanced(10, "");
  for (auto& r : rs) {
    r.message = "zz zz zz yy yy aa bb";
    r.added_lines = "";
  }
  TokenizerConfig cfg;
  cfg.vocab_cap = 5;  // 3 real tokens
  const auto split = build_vocab_and_tokenize(rs, cfg);
  CHECK(split.vocab_size == 5);
  CHECK(split.vocab.at("zz") == 2);
  CHECK(split.vocab.at("yy") == 3);
  CHECK(split.vocab.at("aa") == 4);
  CHECK(split.vocab.count("bb") == 0);
}

TEST_CASE("split is stratified, disjoint and reproducible") {
  const auto rs = generate_synthetic(Preset::openstack_like, 2000, 0.13, 1);
  const auto split = build_vocab_and_tokenize(rs);
  CHECK(split.train.size() + split.test.size() == 2000);
  auto frac = [](const std::vector<TokenizedCommit>& side) {
    double f = 0;
    for (const auto& t : side) f += t.label;
    return f / static_cast<double>(side.size());
  };
  CHECK(std::abs(frac(split.train) - 0.13) <= 0.02);
  CHECK(std::abs(frac(split.test) - 0.13) <= 0.02);
  CHECK(split.test.size() == 400);  // 52 faulty + 348 clean
  std::set<std::string> train_ids;
  for (const auto& t : split.train) train_ids.insert(t.id);
  for (const auto& t : split.test) CHECK(train_ids.count(t.id) == 0);
  CHECK(split.class_weight == doctest::Approx(1392.0 / 208.0));
  CHECK(split.faulty_fraction_train == doctest::Approx(0.13));

  const auto again = build_vocab_and_tokenize(rs);
  CHECK(again.train == split.train);
  CHECK(again.test == split.test);
  CHECK(again.vocab == split.vocab);

  // The split depends on ids, not on record order.
  auto reversed = rs;
  std::reverse(reversed.begin(), reversed.end());
  const auto mask_a = stratified_test_mask(rs);
  const auto mask_b = stratified_test_mask(reversed);
  for (std::size_t i = 0; i < rs.size(); ++i) CHECK(mask_a[i] == mask_b[rs.size() - 1 - i]);
}

TEST_CASE("degenerate datasets are rejected") {
  CHECK_THROWS_AS(build_vocab_and_tokenize({}), DatasetError);
  auto all_clean = balanced(10, "x");
  for (auto& r : all_clean) r.label = 0;
  CHECK_THROWS_AS(build_vocab_and_tokenize(all_clean), DatasetError);
  // Two faulty commits: round(0.2 * 2) = 0 faulty in test.
  auto few = balanced(10, "x");
  for (std::size_t i = 2; i < 10; ++i) few[i].label = 0;
  CHECK_THROWS_AS(build_vocab_and_tokenize(few), DatasetError);
}

}  // TEST_SUITE
