#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coop2/cli.hpp"

using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "coop2");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = coop2::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path tmp(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("coop2_test_" + name);
}

}  // namespace

TEST_CASE("certify goodwin") {
  const Run r = cli({"certify", "--model", "goodwin", "--alpha", "0.5", "--beta", "0.4", "--gamma", "0.6", "--m", "10"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["model"] == "goodwin");
  for (const char* k : {"params", "certification", "invariant_set", "timing"}) CHECK(j.contains(k));
  CHECK(std::fabs(j["certification"]["equilibrium"][2].get<double>() - 1.1956) < 1e-3);
  CHECK(j["certification"]["conclusion"] == "Certified");
  CHECK(j["invariant_set"]["eta"].get<double>() > 0.0);
}

TEST_CASE("certify field-noyes") {
  const Run r = cli({"certify", "--model", "field-noyes", "--s", "0.3", "--q", "8.375e-6", "--f", "1", "--w", "0.2934"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(std::fabs(j["certification"]["det"].get<double>() + 1.1722) < 1e-3);
}

TEST_CASE("certify refuted and bad config") {
  CHECK(cli({"certify", "--model", "goodwin", "--alpha", "1", "--beta", "1", "--gamma", "1", "--m", "1"}).code == 2);
  CHECK(cli({"certify", "--model", "goodwin", "--m", "2.5"}).code == 1);
  CHECK(cli({"certify", "--model", "nope"}).code == 1);
  CHECK(cli({"certify"}).code == 1);
  CHECK(cli({"certify", "--model", "goodwin", "--alpha", "-1"}).code == 1);
  CHECK(cli({"certify", "--model-file", tmp("missing.json").string()}).code == 1);
  CHECK(cli({}).code == 1);
}

TEST_CASE("certify with verification is seed-reproducible") {
  const auto a = cli({"certify", "--model", "goodwin", "--verify", "5", "--horizon", "50", "--seed", "3"});
  const auto b = cli({"certify", "--model", "goodwin", "--verify", "5", "--horizon", "50", "--seed", "3"});
  REQUIRE(a.code == 0);
  json ja = json::parse(a.out), jb = json::parse(b.out);
  CHECK(ja["invariant_set"]["verification"]["ok"] == true);
  ja.erase("timing");
  jb.erase("timing");
  CHECK(ja == jb);
}

TEST_CASE("certify a JSON model file") {
  const auto path = tmp("model.json");
  std::ofstream(path) << R"js({"name": "gw", "params": {"a": 0.5, "b": 0.4, "g": 0.6},
    "f": ["-a*x1 + 1/(1 + x3^10)", "x1 - b*x2", "x2 - g*x3"],
    "box": {"lower": [0, 0, 0], "upper": [2, 5, 8.333333333333334]}})js";
  const Run r = cli({"certify", "--model-file", path.string(), "--grid-n", "6"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["model"] == "gw");
  std::ofstream(path) << "{ not json";
  CHECK(cli({"certify", "--model-file", path.string()}).code == 1);
  std::filesystem::remove(path);
}

TEST_CASE("simulate writes csv") {
  Run r = cli({"simulate", "--model", "goodwin", "--x0", "0.1,0.1,0.1", "--t-end", "10", "--uniform", "11"});
  CHECK(r.code == 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,x1,x2,x3");
  std::getline(is, line);
  CHECK(line == "0,0.1,0.1,0.1");
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 11);

  r = cli({"simulate", "--model", "goodwin", "--t-end", "0"});
  CHECK(r.code == 0);
  CHECK(r.out == "t,x1,x2,x3\n");

  CHECK(cli({"simulate", "--model", "goodwin", "--x0", "5,5,5"}).code == 1);
  CHECK(cli({"simulate", "--model", "goodwin", "--x0", "1,1"}).code == 1);
  CHECK(cli({"simulate", "--model", "goodwin", "--rtol", "0"}).code == 1);
}

TEST_CASE("simulate with orbit detection") {
  const auto csv = tmp("orbit.csv");
  const Run r = cli({"simulate", "--model", "goodwin", "--t-end", "2000", "--detect-orbit", "--out", csv.string()});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["converged"] == true);
  CHECK(j["closure_distance"].get<double>() <= 1e-3 * j["orbit_diameter"].get<double>());
  CHECK(std::filesystem::file_size(csv) > 0);
  std::filesystem::remove(csv);
}

TEST_CASE("sweep") {
  const Run r = cli({"sweep", "--model", "goodwin", "--param", "m", "--from", "1", "--to", "12", "--steps", "12", "--grid-n", "6"});
  CHECK(r.code == 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  CHECK(line == "m,certified,conclusion,period");
  std::vector<std::string> rows;
  while (std::getline(is, line)) rows.push_back(line);
  REQUIRE(rows.size() == 12);
  CHECK(rows.front().rfind("1,0,Refuted,", 0) == 0);
  CHECK(rows[9].rfind("10,1,Certified,", 0) == 0);

  CHECK(cli({"sweep", "--model", "goodwin", "--param", "m", "--from", "1", "--to", "2", "--steps", "0"}).code == 1);
  CHECK(cli({"sweep", "--model", "goodwin", "--param", "m", "--from", "1.5", "--to", "2", "--steps", "2"}).code == 1);
  CHECK(cli({"sweep", "--model", "goodwin", "--param", "zeta", "--from", "1", "--to", "2", "--steps", "2"}).code == 1);

  const auto a = cli({"sweep", "--model", "goodwin", "--param", "alpha", "--from", "0.3", "--to", "0.6", "--steps", "3",
                      "--detect-orbit", "--horizon", "1500", "--seed", "4"});
  const auto b = cli({"sweep", "--model", "goodwin", "--param", "alpha", "--from", "0.3", "--to", "0.6", "--steps", "3",
                      "--detect-orbit", "--horizon", "1500", "--seed", "4"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}
