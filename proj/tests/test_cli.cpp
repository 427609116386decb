#include <doctest.h>

#include <sstream>

#include "jitvar/cli.hpp"
#include "jitvar/dataset.hpp"
#include "report_fixtures.hpp"
#include "test_util.hpp"

using namespace jitvar;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1, help exits 0") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"gen-data"}).code == kExitUsage);  // --out is required
  CHECK(run({"gen-data", "--out", "/tmp/x.jsonl", "--bogus"}).code == kExitUsage);
  CHECK(run({"gen-data", "--out", "/tmp/x.jsonl", "--n", "abc"}).code == kExitUsage);
  CHECK(run({"gen-data", "--out", "/tmp/x.jsonl", "--preset", "linux"}).code == kExitUsage);
  CHECK(run({"gen-data", "--out", "/tmp/x.jsonl", "--preset", "custom"}).code == kExitUsage);
  CHECK(run({"report", "--exp", "/nonexistent/exp"}).code == kExitUsage);
  CHECK(run({"run", "--out", "/tmp/x", "--settings", "N,Q"}).code == kExitUsage);
  CHECK(run({"run", "--out", "/tmp/x", "--dataset", "/nonexistent.jsonl"}).code == kExitUsage);
  const auto help = run({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("gen-data") != std::string::npos);
  CHECK(run({"run", "--help"}).code == kExitOk);
}

TEST_CASE("gen-data writes the preset dataset") {
  testutil::TempDir dir("cli");
  const auto path = (dir / "c.jsonl").string();
  const auto r = run({"gen-data", "--preset", "openstack-like", "--n", "2000", "--out", path});
  CHECK(r.code == kExitOk);
  const auto records = load_jsonl(path);
  CHECK(records.size() == 2000);
  std::size_t faulty = 0;
  for (const auto& c : records) faulty += static_cast<std::size_t>(c.label);
  CHECK(faulty == 260);
  std::size_t lines = 0;
  for (char c : testutil::slurp(path)) lines += c == '\n';
  CHECK(lines == 2000);
}

TEST_CASE("run then report and compare") {
  testutil::TempDir dir("clirun");
  const auto data = (dir / "d.jsonl").string();
  REQUIRE(run({"gen-data", "--preset", "qt-like", "--n", "300", "--faulty-frac", "0.2", "--out",
               data}).code == kExitOk);
  const auto exp = (dir / "exp").string();
  const auto r = run({"run", "--dataset", data, "--settings", "N,W", "--runs", "2", "--epochs",
                      "1", "--out", exp});
  CHECK(r.code == kExitOk);
  CHECK(r.err.find("trained 4 run(s)") != std::string::npos);

  const auto rep = run({"report", "--exp", exp, "--format", "csv"});
  CHECK(rep.code == kExitOk);
  const auto rows = fixtures::parse_csv(testutil::slurp(dir / "exp/variance.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[1] == std::vector<std::string>{"N", "0.00", "0.00", "0.00", "0.00", "0.00", "0.00", "2"});
  CHECK(!std::filesystem::exists(dir / "exp/variance.md"));

  const auto cmp = run({"compare", "--exp", exp, "--format", "md", "--out", (dir / "cmp").string()});
  CHECK(cmp.code == kExitOk);
  CHECK(cmp.out.find("| N | W | algorithmic | auc | levene |") != std::string::npos);
  CHECK(run({"report", "--exp", exp, "--format", "xml"}).code == kExitUsage);
  CHECK(run({"report", "--exp", exp, "--alpha", "2"}).code == kExitUsage);
}

}  // TEST_SUITE
