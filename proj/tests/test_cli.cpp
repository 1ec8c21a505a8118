#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "stategeo/cli.hpp"
#include "stategeo/errors.hpp"

using namespace stategeo;
using namespace stategeo::cli;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "stategeo_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("every command runs with its defaults") {
  for (const auto& name : commands()) {
    if (name == "distance" || name == "geodesic" || name == "oracle-verify") continue;
    INFO(name);
    const Outcome o = invoke({name});
    CHECK(o.code == kOk);
    CHECK(o.err.empty());
    const json rec = json::parse(o.out);
    CHECK(rec["schema_version"] == kSchemaVersion);
    CHECK(rec["command"] == name);
    CHECK(rec.contains("config"));
    CHECK(rec.contains("result"));
  }
}

TEST_CASE("distance between two deltas") {
  const Outcome o = invoke({"distance", "--delta", "0", "--delta", "6"});
  REQUIRE(o.code == kOk);
  const json rec = json::parse(o.out);
  CHECK(rec["result"]["sphere_angle"].get<double>() == doctest::Approx(1.5707963115649168).epsilon(1e-12));
}

TEST_CASE("states keep command-line order across flag kinds") {
  const Outcome o = invoke({"distance", "--kernel", "confined:0.1,1", "--wave", "0.5", "--delta", "0"});
  REQUIRE(o.code == kOk);
  const json rec = json::parse(o.out);
  const auto& states = rec["config"]["params"]["states"];
  REQUIRE(states.size() == 2);
  CHECK(states[0].dump().find("plane_wave") != std::string::npos);
  CHECK(states[1].dump().find("delta") != std::string::npos);
}

TEST_CASE("a run record replays through --config") {
  const Outcome first = invoke({"geodesic", "--delta", "0", "--delta", "1", "--seed", "7"});
  REQUIRE(first.code == kOk);
  const auto path = scratch("record.json");
  std::ofstream(path) << first.out;
  const Outcome second = invoke({"geodesic", "--config", path.string()});
  REQUIRE(second.code == kOk);
  CHECK(json::parse(first.out) == json::parse(second.out));

  const RunConfig cfg = RunConfig::from_json(json::parse(first.out));
  CHECK(cfg.command == "geodesic");
  CHECK(cfg.seed == 7);
  CHECK(RunConfig::from_json(cfg.to_json()).to_json() == cfg.to_json());
}

TEST_CASE("config files for another command are rejected") {
  const auto path = scratch("constants.json");
  std::ofstream(path) << invoke({"constants"}).out;
  const Outcome o = invoke({"metric", "--config", path.string()});
  CHECK(o.code == kInvalidInput);
}

TEST_CASE("invalid input maps to exit code 2 with a JSON error line") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"metric", "--param", "unknown_key=1"},
           {"metric", "--param", "step=\"big\""},
           {"metric", "--kernel", "bogus:1"},
           {"metric", "--param", "step=-1"},
           {"distance", "--delta", "0"},
           {"gram", "--point", "0", "--point", "0"},
           {"epr", "--measure-position", "0", "--measure-momentum", "0"},
           {"nonexistent"},
           {"constants", "--format", "xml"},
       }) {
    const Outcome o = invoke(args);
    INFO(args.front(), " ", args.size());
    CHECK(o.code == kInvalidInput);
    const json e = json::parse(o.err);
    CHECK(e.contains("error"));
    CHECK(e.contains("message"));
    CHECK(o.err.find('\n') == o.err.size() - 1);
  }
}

TEST_CASE("numerical failures map to exit code 3") {
  const Outcome o = invoke({"distance", "--wave", "0", "--wave", "1"});
  CHECK(o.code == kNumericalFailure);
  CHECK(json::parse(o.err)["error"] == "divergence");

  const Outcome anti = invoke({"geodesic", "--delta", "0", "--param",
                               R"(states=[{"terms":[{"coeff":[1,0],"prim":{"type":"delta","center":[0]}}]},{"terms":[{"coeff":[-1,0],"prim":{"type":"delta","center":[0]}}]}])"});
  CHECK(anti.code != kOk);
}

TEST_CASE("CSV output has a fixed header per command") {
  const std::map<std::string, std::string> headers{
      {"constants", "parameter,value"}, {"metric", "entry,value"},     {"gram", "index,eigenvalue"},
      {"double-slit", "x,intensity"},   {"epr", "b,overlap"},
  };
  for (const auto& [cmd, header] : headers) {
    const Outcome o = invoke({cmd, "--format", "csv"});
    REQUIRE(o.code == kOk);
    CHECK(o.out.substr(0, o.out.find('\n')) == header);
  }
  const Outcome d = invoke({"distance", "--format", "csv", "--delta", "0", "--delta", "1"});
  CHECK(d.out.substr(0, d.out.find('\n')) == "parameter,value");
  const Outcome g = invoke({"geodesic", "--format", "csv", "--delta", "0", "--delta", "1"});
  CHECK(g.out.substr(0, g.out.find('\n')) == "t,angle_from_start,angle_to_end,norm_error");
}

TEST_CASE("output files are written whole") {
  const auto path = scratch("metric.json");
  std::filesystem::remove(path);
  const Outcome o = invoke({"metric", "--output", path.string()});
  REQUIRE(o.code == kOk);
  CHECK(o.out.empty());
  const json rec = json::parse(slurp(path));
  CHECK(rec["command"] == "metric");

  const auto csv = scratch("gram.csv");
  const Outcome c = invoke({"gram", "--format", "csv", "--output", csv.string()});
  REQUIRE(c.code == kOk);
  CHECK(json::parse(c.out)["command"] == "gram");
  CHECK(slurp(csv).rfind("index,eigenvalue", 0) == 0);
}

TEST_CASE("seeded runs are reproducible") {
  const Outcome a = invoke({"gram", "--seed", "99"});
  const Outcome b = invoke({"gram", "--seed", "99"});
  const Outcome c = invoke({"gram", "--seed", "100"});
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
}

TEST_CASE("resolve merges parameters over defaults and rejects unknown keys") {
  RunConfig cfg;
  cfg.command = "metric";
  cfg.params = {{"step", 2e-3}};
  const RunConfig r = resolve(cfg);
  CHECK(r.params["step"] == 2e-3);
  CHECK(r.params.contains("kernel"));
  cfg.params = {{"nope", 1}};
  CHECK_THROWS_AS((void)resolve(cfg), DomainError);
  CHECK_THROWS_AS((void)default_params("nope"), DomainError);
}

TEST_CASE("oracle-verify reports agreement") {
  const Outcome o = invoke({"oracle-verify", "--count", "5"});
  REQUIRE(o.code == kOk);
  const json rec = json::parse(o.out);
  CHECK(rec["result"]["max_relative_error"].get<double>() < 1e-6);
}

TEST_CASE("help exits cleanly") {
  const Outcome o = invoke({"--help"});
  CHECK(o.code == kOk);
  CHECK(o.out.find("double-slit") != std::string::npos);
}
