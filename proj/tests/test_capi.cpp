// Exercises the shared-library surface only (covsched.h, no core headers).

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "covsched.h"

namespace {

using nlohmann::json;

struct SessionDeleter {
  void operator()(covsched_session* s) const { covsched_session_free(s); }
};
using Session = std::unique_ptr<covsched_session, SessionDeleter>;

const char* kStudyConfig = R"({
  "model": {"A": [[1.1, 0.2], [0.2, 0.8]], "Q": [[1, 0], [0, 1]]},
  "sensors": [{"C": [1, 1], "R": 1, "lambda": 0.8, "energy_cost": 1}],
  "solver": {"beta": 0.05, "N": 20}
})";

std::string work_dir(const char* leaf) {
  const auto dir = std::filesystem::temp_directory_path() / "covsched_capi" / leaf;
  std::filesystem::create_directories(dir);
  return dir.string();
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return json::parse(in);
}

}  // namespace

TEST_CASE("config errors come back as COVSCHED_ERR_CONFIG") {
  Session s(covsched_session_new());
  CHECK(covsched_load_config(s.get(), "{ not json") == COVSCHED_ERR_CONFIG);
  CHECK(covsched_load_config(s.get(), R"({"model": {}})") == COVSCHED_ERR_CONFIG);
  CHECK(std::string(covsched_last_message(s.get())).size() > 0);
  CHECK(covsched_run(s.get(), "solve", "out") == COVSCHED_ERR_CONFIG);  // nothing loaded
}

TEST_CASE("stability failures exit with the precondition code and cite the bound") {
  Session s(covsched_session_new());
  const char* low_lambda = R"({
    "model": {"A": [[1.1, 0.2], [0.2, 0.8]], "Q": [[1, 0], [0, 1]]},
    "sensors": [{"C": [1, 1], "R": 1, "lambda": 0.2, "energy_cost": 1}],
    "solver": {"beta": 0.05}
  })";
  REQUIRE(covsched_load_config(s.get(), low_lambda) == COVSCHED_OK);
  const int rc = covsched_run(s.get(), "solve", work_dir("low_lambda").c_str());
  CHECK(rc == COVSCHED_ERR_PRECONDITION);
  CHECK(std::string(covsched_last_message(s.get())).find("0.30") != std::string::npos);
}

TEST_CASE("solve writes an artifact with the study threshold") {
  Session s(covsched_session_new());
  REQUIRE(covsched_load_config(s.get(), kStudyConfig) == COVSCHED_OK);
  const std::string out = work_dir("solve");
  REQUIRE(covsched_run(s.get(), "solve", out.c_str()) == COVSCHED_OK);
  const json report = json::parse(covsched_last_report_json(s.get()));
  REQUIRE(report.contains("artifacts"));
  const json doc = read_json(report["artifacts"][0].get<std::string>());
  CHECK(doc["kind"] == "solve");
  CHECK(doc["thresholds"]["threshold_hops"] == 3);
  CHECK(doc["bellman_residual"].get<double>() < 1e-8);
  CHECK(doc["config_hash"].get<std::string>().size() == 40);
  CHECK(doc["config"]["solver"]["beta"].get<double>() == 0.05);
}

TEST_CASE("simulate is deterministic across repeated invocations") {
  const char* cfg = R"({
    "model": {"A": [[1.1, 0.2], [0.2, 0.8]], "Q": [[1, 0], [0, 1]]},
    "sensors": [{"C": [1, 1], "R": 1, "lambda": 0.8, "energy_cost": 1}],
    "simulation": {"steps": 20000, "policy": {"kind": "threshold", "t": 3},
                   "seeds": {"plant": 3, "measurement": 4, "channel": 5}}
  })";
  std::string first, second;
  for (int run = 0; run < 2; ++run) {
    Session s(covsched_session_new());
    REQUIRE(covsched_load_config(s.get(), cfg) == COVSCHED_OK);
    const std::string out = work_dir(run == 0 ? "sim_a" : "sim_b");
    REQUIRE(covsched_run(s.get(), "simulate", out.c_str()) == COVSCHED_OK);
    const json report = json::parse(covsched_last_report_json(s.get()));
    std::ifstream in(report["artifacts"][0].get<std::string>());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    (run == 0 ? first : second) = text;
  }
  CHECK(first == second);
  CHECK(first.find("avg_energy") != std::string::npos);
}

TEST_CASE("seed override feeds through to the echoed config") {
  Session s(covsched_session_new());
  REQUIRE(covsched_load_config(s.get(), kStudyConfig) == COVSCHED_OK);
  REQUIRE(covsched_set_seed(s.get(), 1234) == COVSCHED_OK);
  const json echo = json::parse(covsched_config_echo_json(s.get()));
  CHECK(echo["simulation"]["seeds"]["plant"] == 1234);
  CHECK(echo["table1"]["seed"] == 1234);
}

TEST_CASE("counterexamples command reproduces both examples") {
  Session s(covsched_session_new());
  REQUIRE(covsched_load_config(s.get(), kStudyConfig) == COVSCHED_OK);
  const std::string out = work_dir("ce");
  REQUIRE(covsched_run(s.get(), "counterexamples", out.c_str()) == COVSCHED_OK);
  const json report = json::parse(covsched_last_report_json(s.get()));
  const json doc = read_json(report["artifacts"][0].get<std::string>());
  CHECK(doc["reproduced"] == true);
  CHECK(doc["example1"]["trace_gap_at_P"].get<double>() ==
        doctest::Approx(1.2862).epsilon(1e-3));
  CHECK(doc["example2"]["boundaries"][2].get<double>() ==
        doctest::Approx(3.9005).epsilon(1e-3));
}

TEST_CASE("unknown command is a usage error") {
  Session s(covsched_session_new());
  REQUIRE(covsched_load_config(s.get(), kStudyConfig) == COVSCHED_OK);
  CHECK(covsched_run(s.get(), "frobnicate", "out") == COVSCHED_ERR_CONFIG);
  CHECK(std::string(covsched_version()).size() > 0);
}
