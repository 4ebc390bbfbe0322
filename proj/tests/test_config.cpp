#include "covsched/config.hpp"

#include <doctest.h>

#include "covsched/errors.hpp"
#include "covsched/output.hpp"

using namespace covsched;
using nlohmann::json;

namespace {

json minimal_config() {
  return json::parse(R"({
    "model": {"A": [[1.1, 0.2], [0.2, 0.8]], "Q": [[1, 0], [0, 1]]},
    "sensors": [{"C": [1, 1], "R": 1, "lambda": 0.8, "energy_cost": 1}]
  })");
}

}  // namespace

TEST_CASE("minimal config parses with defaults materialized") {
  const ExperimentConfig cfg = parse_experiment_config(minimal_config());
  CHECK(cfg.model.n == 2);
  CHECK(cfg.sensors.size() == 1);
  CHECK(cfg.sensors[0].lambda == 0.8);
  CHECK(cfg.N == 20);
  CHECK(cfg.horizon == "infinite");
  CHECK(cfg.policy_kind == "never");
  // Echo holds every default.
  CHECK(cfg.echo["solver"]["N"] == 20);
  CHECK(cfg.echo["solver"]["epsilon"].get<double>() == 1e-9);
  CHECK(cfg.echo["simulation"]["burn_in_fraction"].get<double>() == 0.01);
  CHECK(cfg.echo["simulation"]["initial"]["sensor"] == 1);
  CHECK(cfg.echo["channel"]["kind"] == "iid");
  // Shorthands normalized to nested arrays.
  CHECK(cfg.echo["sensors"][0]["C"] == json::parse("[[1.0, 1.0]]"));
  CHECK(cfg.echo["sensors"][0]["R"] == json::parse("[[1.0]]"));
}

TEST_CASE("unknown keys are rejected with a field path") {
  json doc = minimal_config();
  doc["solver"] = {{"beta_typo", 0.5}};
  try {
    parse_experiment_config(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("solver.") != std::string::npos);
  }
  json doc2 = minimal_config();
  doc2["simulation"] = {{"policy", {{"kind", "never"}, {"bogus", 1}}}};
  CHECK_THROWS_AS(parse_experiment_config(doc2), ConfigError);
}

TEST_CASE("field validation") {
  json doc = minimal_config();
  doc["solver"] = {{"beta", 1.5}};
  CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);
  doc["solver"] = {{"beta", 0.5}, {"beta_grid", {0.1, 0.2}}};
  CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);
  doc = minimal_config();
  doc["sensors"][0]["lambda"] = -0.1;
  CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);
  doc = minimal_config();
  doc["simulation"] = {{"policy", {{"kind", "solved"}}}};  // no file
  CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);
  doc = minimal_config();
  doc["simulation"] = {{"initial", {{"sensor", 3}}}};  // out of range
  CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);
  doc = minimal_config();
  doc["channel"] = {{"kind", "markov"}, {"p", 0.2}};  // missing q
  CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);
}

TEST_CASE("seed override replaces every seed") {
  json doc = minimal_config();
  doc["simulation"] = {{"seeds", {{"plant", 7}, {"measurement", 8}, {"channel", 9}}}};
  const ExperimentConfig cfg = parse_experiment_config(doc, 42);
  CHECK(cfg.seeds.plant == 42);
  CHECK(cfg.seeds.measurement == 42);
  CHECK(cfg.seeds.channel == 42);
  CHECK(cfg.table1_seed == 42);
  CHECK(cfg.echo["simulation"]["seeds"]["plant"] == 42);
}

TEST_CASE("17-digit serialization round-trips doubles exactly") {
  json doc;
  doc["a"] = 0.1;
  doc["b"] = 1.0 / 3.0;
  doc["c"] = 1.2862e-17;
  doc["d"] = json::array({1e300, -2.5, 0.0});
  const std::string text = dump_json_17(doc);
  const json back = json::parse(text);
  CHECK(back["a"].get<double>() == 0.1);
  CHECK(back["b"].get<double>() == 1.0 / 3.0);
  CHECK(back["c"].get<double>() == 1.2862e-17);
  CHECK(back["d"][0].get<double>() == 1e300);
  // Serialization is stable: dumping the parse again is bit-identical.
  CHECK(dump_json_17(back) == text);
}

TEST_CASE("config hash is content-addressed") {
  const ExperimentConfig a = parse_experiment_config(minimal_config());
  const ExperimentConfig b = parse_experiment_config(minimal_config());
  CHECK(git_blob_sha1(dump_json_17(a.echo)) == git_blob_sha1(dump_json_17(b.echo)));
  json changed = minimal_config();
  changed["sensors"][0]["lambda"] = 0.81;
  const ExperimentConfig c = parse_experiment_config(changed);
  CHECK(git_blob_sha1(dump_json_17(a.echo)) != git_blob_sha1(dump_json_17(c.echo)));
  // Known digest shape: 40 hex characters.
  const std::string h = git_blob_sha1("hello");
  CHECK(h.size() == 40);
  // git hash-object of "hello" (blob); pinned to catch framing regressions.
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}
