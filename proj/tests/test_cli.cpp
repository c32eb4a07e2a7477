#include <doctest.h>
#include <json.hpp>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dicetau/engine.hpp"
#include "dicetau/numerics.hpp"
#include "dicetau/targets.hpp"
#include "reference_values.hpp"

using namespace dicetau;
using njson = nlohmann::json;

namespace {

struct CmdResult {
  int status = -1;
  std::string out;
};

CmdResult run_cli(const std::string& args, bool merge_stderr = false) {
  const std::string cmd =
      std::string(DICETAU_BIN) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult res;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, got);
  const int rc = pclose(pipe);
  res.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return res;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

// Value of the plain-format line "key value...".
std::string plain_value(const std::string& text, const std::string& key) {
  for (const std::string& line : lines_of(text))
    if (line.size() > key.size() && line.compare(0, key.size(), key) == 0 &&
        line[key.size()] == ' ')
      return line.substr(key.size() + 1);
  return {};
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) return out;
    pos = comma + 1;
  }
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream(path) << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("landing csv reproduces the exact table") {
  const CmdResult r = run_cli("landing --max 10 --digits 12");
  REQUIRE(r.status == 0);
  const auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 11);
  CHECK(rows[0] == "n,lp,lp_decimal");
  for (int n = 0; n <= 9; ++n) {
    const auto cols = split_csv(rows[n + 1]);
    REQUIRE(cols.size() == 3);
    CHECK(cols[0] == std::to_string(n));
    CHECK(parse_rational(cols[1]) == parse_rational(refs::kLandingTable[n]));
  }
}

TEST_CASE("landing respects the start state") {
  const CmdResult r = run_cli("landing --start 5 --max 3");
  REQUIRE(r.status == 0);
  const auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(split_csv(rows[1])[0] == "5");
  CHECK(split_csv(rows[1])[1] == "1");
}

TEST_CASE("landing json rows carry exact and decimal forms") {
  const CmdResult r = run_cli("landing --max 3 --format json");
  REQUIRE(r.status == 0);
  const njson j = njson::parse(r.out);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 3);
  CHECK(j[0]["n"] == 0);
  CHECK(j[0]["lp"] == "1");
  CHECK(j[1]["lp"] == "1/6");
  CHECK(j[1]["lp_decimal"].get<std::string>().substr(0, 6) == "0.1666");
}

TEST_CASE("expect on an absorbing-complete file target is exact") {
  const TempFile f("cli_block_targets.txt", "7\n8\n9\n10\n11\n12\n");
  const CmdResult r =
      run_cli("expect --target file:" + f.path + " --cutoff 20 --bound 0,5");
  REQUIRE(r.status == 0);
  CHECK(plain_value(r.out, "width") == "0");
  CHECK(plain_value(r.out, "survival") == "0");
  const std::string exact = plain_value(r.out, "exact");
  REQUIRE(!exact.empty());

  const ProcessSpec spec(6, TargetSet::explicit_set({7, 8, 9, 10, 11, 12}), 0);
  const MomentReport rep =
      enclose_moments(spec, 20, {{Rational(0), Rational(5)}});
  CHECK(parse_rational(exact) == rep.mean.lower);
}

TEST_CASE("expect json at the smallest prime cutoff") {
  const CmdResult r = run_cli("expect --cutoff 4 --bound 0,412 --format json");
  REQUIRE(r.status == 0);
  const njson j = njson::parse(r.out);
  CHECK(j["target"] == "primes");
  CHECK(j["faces"] == 6);
  CHECK(j["cutoff"] == 4);
  CHECK(j["order"] == 1);
  CHECK(j["lower"] == "49/36");
  CHECK(j["upper"] == "9113/36");
  CHECK(j["survival"] == "11/18");
  CHECK(j["agreed_digits"] == 0);  // integer parts of the endpoints differ
  CHECK(j["value_prefix"] == "");
  REQUIRE(j["bounds_used"].is_array());
  CHECK(j["bounds_used"][0] == 0);
  CHECK(j["bounds_used"][1] == 412);
  CHECK(j.contains("elapsed_ms"));
  CHECK(parse_rational(j["lower"].get<std::string>()) == Rational(49, 36));
}

TEST_CASE("moments json carries per-order raw and central arrays") {
  const CmdResult r =
      run_cli("moments --cutoff 30 --order 2 --bound 0,20,0,500 --format json");
  REQUIRE(r.status == 0);
  const njson j = njson::parse(r.out);
  REQUIRE(j["raw"].is_array());
  REQUIRE(j["raw"].size() == 2);
  REQUIRE(j["central"].size() == 1);
  CHECK(j["raw"][0]["order"] == 1);
  CHECK(j["raw"][1]["order"] == 2);
  CHECK(j["central"][0]["order"] == 2);
  for (const char* key : {"lower", "upper", "agreed_digits", "value_prefix"}) {
    CHECK(j["raw"][0].contains(key));
    CHECK(j["central"][0].contains(key));
  }
  const Rational lo = parse_rational(j["central"][0]["lower"].get<std::string>());
  const Rational hi = parse_rational(j["central"][0]["upper"].get<std::string>());
  CHECK(lo <= hi);
  CHECK(lo >= 0);  // variance
}

TEST_CASE("survival plain output") {
  const CmdResult r = run_cli("survival --cutoff 4");
  REQUIRE(r.status == 0);
  CHECK(plain_value(r.out, "survival") == "6.111111111e-1");
  CHECK(plain_value(r.out, "cutoff") == "4");
}

TEST_CASE("bound json on a small cutoff") {
  const CmdResult r = run_cli("bound --cutoff 100 --order 1 --format json");
  REQUIRE(r.status == 0);
  const njson j = njson::parse(r.out);
  CHECK(j["order"] == 1);
  CHECK(j["split"] == 100003);
  CHECK(j["value"].is_number_integer());
  CHECK(j["value"].get<std::int64_t>() > 0);
  // 101 and 103 are prime: the block above this cutoff is not clear.
  CHECK(j["boundary_block_clear"] == false);
  const Rational fin = parse_rational(j["finite_part"].get<std::string>());
  const Rational tail = parse_rational(j["tail_part"].get<std::string>());
  CHECK(Rational(j["value"].get<std::int64_t>()) >= fin + tail);
}

TEST_CASE("profile marks targets, interior states and boundary states") {
  const CmdResult r = run_cli("profile --cutoff 20 --boundary 5/2 --from 18 --to 26");
  REQUIRE(r.status == 0);
  const auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 10);
  CHECK(rows[0] == "s,value,value_rational");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cols = split_csv(rows[i]);
    REQUIRE(cols.size() == 3);
    const std::uint64_t s = std::stoull(cols[0]);
    if (s == 19) CHECK(cols[2] == "0");            // prime below the cutoff
    if (s > 20) CHECK(cols[2] == "5/2");           // boundary value
    if (s == 18) CHECK(parse_rational(cols[2]) > 0);
  }
}

TEST_CASE("simulate is reproducible modulo timing") {
  const std::string args = "simulate --trials 20000 --seed 7 --max-rolls 500";
  const CmdResult a = run_cli(args);
  const CmdResult b = run_cli(args);
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  for (const char* key : {"absorbed", "mean", "variance", "raw2", "raw3", "raw4"})
    CHECK(plain_value(a.out, key) == plain_value(b.out, key));
  const double mean = std::stod(plain_value(a.out, "mean"));
  CHECK(mean > 2.0);
  CHECK(mean < 3.0);
}

TEST_CASE("fib-ratio flags the divergent regime") {
  const CmdResult r = run_cli("fib-ratio --faces 6 --format json");
  REQUIRE(r.status == 0);
  const njson j = njson::parse(r.out);
  CHECK(j["faces"] == 6);
  CHECK(j["divergent"] == true);
  CHECK(j["ratio"].get<double>() > 1.0);

  const CmdResult plain = run_cli("fib-ratio --faces 2");
  REQUIRE(plain.status == 0);
  CHECK(plain_value(plain.out, "divergent") == "false");
  CHECK(plain.out.find("conjecturally infinite expectation") == std::string::npos);

  const CmdResult plain6 = run_cli("fib-ratio --faces 6");
  CHECK(plain6.out.find("conjecturally infinite expectation") != std::string::npos);
}

TEST_CASE("float mode is fast and marked uncertified") {
  const CmdResult r = run_cli("expect --cutoff 1000 --mode float --precision 30");
  REQUIRE(r.status == 0);
  CHECK(plain_value(r.out, "mode") == "float");
  CHECK(plain_value(r.out, "certified") == "false");
  const std::string v = plain_value(r.out, "raw1");
  const std::string want(refs::kMeanLowPrecision);
  CHECK(v.substr(0, want.size()) == want);
}

TEST_CASE("exit codes") {
  SUBCASE("usage errors exit 1") {
    CHECK(run_cli("expect --cutoff 4 --bogus-flag").status == 1);
    CHECK(run_cli("expect").status == 1);  // missing required --cutoff
    CHECK(run_cli("").status == 1);        // missing subcommand
    CHECK(run_cli("moments --cutoff 30 --order 0").status == 1);
    CHECK(run_cli("moments --cutoff 30 --order 2 --bound 0,5").status == 1);
    const CmdResult auto_sq =
        run_cli("expect --target squares --cutoff 100", true);
    CHECK(auto_sq.status == 1);
    CHECK(auto_sq.out.find("usage error") != std::string::npos);
    CHECK(auto_sq.out.find("prime targets only") != std::string::npos);
  }
  SUBCASE("computation errors exit 2") {
    const CmdResult missing =
        run_cli("expect --target file:/no/such/file.txt --cutoff 10 --bound 0,5", true);
    CHECK(missing.status == 2);
    CHECK(missing.out.find("error:") != std::string::npos);
  }
  SUBCASE("help exits 0") {
    CHECK(run_cli("--help").status == 0);
    CHECK(run_cli("expect --help").status == 0);
  }
}
