#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "ops/common/json_io.hpp"
#include "ops/opsd/cli.hpp"

using namespace ops;
namespace fs = std::filesystem;

namespace {

const fs::path kScenario = fs::path(OPS_SOURCE_DIR) / "scenarios" / "triton_plume";

struct Run {
  int code = 0;
  std::string out, err;
};

Run ops_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ops");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = opsd::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string s(const fs::path& p) { return p.string(); }

}  // namespace

TEST_CASE("validate exit codes") {
  CHECK(ops_cli({"validate", s(kScenario / "net.json")}).code == 0);
  const auto bad = ops_cli({"validate", s(fs::path(OPS_SOURCE_DIR) / "tests/data/cyclic.net.json")});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("CyclicOrdering") != std::string::npos);
  const auto js = ops_cli({"validate", s(fs::path(OPS_SOURCE_DIR) / "tests/data/cyclic.net.json"), "--format", "json"});
  CHECK(js.code == 1);
  CHECK(Json::parse(js.out)["ok"] == false);
  CHECK(ops_cli({"validate", s(kScenario / "sem.json")}).code == 0);
  CHECK(ops_cli({"validate", s(kScenario / "gem.json"), "--sem", s(kScenario / "sem.json")}).code == 0);
  CHECK(ops_cli({"validate", s(kScenario / "config.json")}).code == 0);
  CHECK(ops_cli({"validate", s(kScenario / "spec.json")}).code == 0);
}

TEST_CASE("usage errors exit 2") {
  CHECK(ops_cli({}).code == 2);
  CHECK(ops_cli({"frobnicate"}).code == 2);
  CHECK(ops_cli({"validate"}).code == 2);
  CHECK(ops_cli({"predict", "--net", s(kScenario / "net.json")}).code == 2);
  CHECK(ops_cli({"validate", s(kScenario / "net.json"), "--format", "yaml"}).code == 2);
  CHECK(ops_cli({"--help"}).code == 0);
}

TEST_CASE("domain errors exit 1 with the machine code") {
  const fs::path tmp = fs::temp_directory_path() / "ops_cli_bad.json";
  write_file_atomic(tmp, "{\"schema\": \"tasknet/1\", ");
  const auto r = ops_cli({"validate", s(tmp)});
  CHECK(r.code == 1);
  CHECK(r.err.find("BAD_DOCUMENT") != std::string::npos);
  const auto set = ops_cli({"simulate", "--net", s(kScenario / "net.json"), "--config", s(kScenario / "config.json"),
                            "--set", "no.such.parameter=1"});
  CHECK(set.code == 1);
  CHECK(set.err.find("BAD_DOCUMENT") != std::string::npos);
}

TEST_CASE("predict twice gives identical clusters.json bytes") {
  const fs::path root = fs::temp_directory_path() / "ops_cli_predict";
  fs::remove_all(root);
  for (const char* name : {"a", "b"}) {
    const auto r = ops_cli({"predict", "--net", s(kScenario / "net.json"), "--config", s(kScenario / "config.json"), "--spec",
                            s(kScenario / "spec.json"), "-n", "100", "--workers", "4", "--seed", "3", "-o", s(root / name)});
    REQUIRE(r.code == 0);
  }
  CHECK(read_text_file(root / "a" / "clusters.json") == read_text_file(root / "b" / "clusters.json"));
  const auto c = ops_cli({"cluster", s(root / "a"), "--format", "json"});
  REQUIRE(c.code == 0);
  CHECK(canonical(Json::parse(c.out)) == read_text_file(root / "a" / "clusters.json"));
  const auto cmp = ops_cli({"compare", s(root / "a"), s(root / "b"), "--format", "json"});
  REQUIRE(cmp.code == 0);
  for (const auto& [goal, d] : Json::parse(cmp.out)["goal_executed"].items()) CHECK(d["delta"] == 0.0);
}

TEST_CASE("merge conflicts exit 1") {
  const fs::path root = fs::temp_directory_path() / "ops_cli_merge";
  fs::create_directories(root);
  Json base = read_json_file(kScenario / "net.json");
  Json ours = base, theirs = base;
  ours["revision"] = theirs["revision"] = 2;
  ours["goals"]["map_limb"]["priority"] = 75;
  theirs["goals"]["map_limb"]["priority"] = 65;
  write_json_file(root / "base.json", base);
  write_json_file(root / "ours.json", ours);
  write_json_file(root / "theirs.json", theirs);
  const auto r = ops_cli({"merge", "--base", s(root / "base.json"), "--ours", s(root / "ours.json"), "--theirs",
                          s(root / "theirs.json")});
  CHECK(r.code == 1);
  CHECK(r.out.find("map_limb") != std::string::npos);
  theirs["goals"]["map_limb"]["priority"] = 70;
  write_json_file(root / "theirs.json", theirs);
  CHECK(ops_cli({"merge", "--base", s(root / "base.json"), "--ours", s(root / "ours.json"), "--theirs",
                 s(root / "theirs.json"), "-o", s(root / "merged.json")})
            .code == 0);
  CHECK(read_json_file(root / "merged.json")["goals"]["map_limb"]["priority"] == 75);
}
