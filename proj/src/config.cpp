#include "covsched/config.hpp"

#include <fstream>
#include <set>

#include "covsched/errors.hpp"

namespace covsched {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

double get_number(const json& obj, const std::string& path) {
  if (!obj.is_number()) fail(path, "expected a number");
  return obj.get<double>();
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

}  // namespace

Matrix matrix_from_json(const json& value, const std::string& path) {
  // Scalars and flat arrays are accepted as 1x1 / 1xn shorthands.
  if (value.is_number()) {
    Matrix m(1, 1);
    m(0, 0) = value.get<double>();
    return m;
  }
  if (!value.is_array() || value.empty()) fail(path, "expected a matrix");
  if (value[0].is_number()) {
    Matrix m(1, value.size());
    for (std::size_t j = 0; j < value.size(); ++j)
      m(0, j) = get_number(value[j], path);
    return m;
  }
  const std::size_t cols = value[0].size();
  Matrix m(value.size(), cols);
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_array() || value[i].size() != cols)
      fail(path, "rows must be arrays of equal length");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = get_number(value[i][j], path);
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
}

ExperimentConfig parse_experiment_config(const json& doc,
                                         std::optional<std::uint64_t> seed_override) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(doc, "", {"schema_version", "model", "sensors", "channel", "solver",
                           "simulation", "table1", "output"});
  ExperimentConfig cfg;

  if (const json* v = find(doc, "schema_version")) {
    if (!v->is_number_integer() || v->get<int>() != 1)
      fail("schema_version", "only schema_version 1 is supported");
  }

  const json* model = find(doc, "model");
  if (!model || !model->is_object()) fail("model", "required object");
  reject_unknown(*model, "model", {"A", "Q"});
  if (!find(*model, "A") || !find(*model, "Q")) fail("model", "requires A and Q");
  cfg.model = SystemModel::create(matrix_from_json((*model)["A"], "model.A"),
                                  matrix_from_json((*model)["Q"], "model.Q"));

  const json* sensors = find(doc, "sensors");
  if (!sensors || !sensors->is_array() || sensors->empty())
    fail("sensors", "required non-empty array");
  for (std::size_t i = 0; i < sensors->size(); ++i) {
    const json& s = (*sensors)[i];
    const std::string path = "sensors[" + std::to_string(i) + "]";
    if (!s.is_object()) fail(path, "expected an object");
    reject_unknown(s, path, {"C", "R", "lambda", "energy_cost", "feedback_lambda"});
    if (!find(s, "C") || !find(s, "R")) fail(path, "requires C and R");
    const Matrix C = matrix_from_json(s["C"], path + ".C");
    if (C.cols() != cfg.model.n) fail(path + ".C", "column count must equal n");
    cfg.sensors.push_back(SensorModel::create(
        C, matrix_from_json(s["R"], path + ".R"),
        s.contains("lambda") ? get_number(s["lambda"], path + ".lambda") : 1.0,
        s.contains("energy_cost") ? get_number(s["energy_cost"], path + ".energy_cost")
                                  : 0.0,
        s.contains("feedback_lambda")
            ? get_number(s["feedback_lambda"], path + ".feedback_lambda")
            : 1.0));
  }

  cfg.channel = ChannelModel::iid(1.0);
  bool channel_is_default = true;
  if (const json* ch = find(doc, "channel")) {
    reject_unknown(*ch, "channel", {"kind", "p", "q"});
    const std::string kind = ch->value("kind", "iid");
    if (kind == "iid") {
      if (ch->contains("p") || ch->contains("q"))
        fail("channel", "iid channels use the per-sensor lambda, not p/q");
    } else if (kind == "markov") {
      if (!ch->contains("p") || !ch->contains("q"))
        fail("channel", "markov channels require p and q");
      cfg.channel = ChannelModel::markov(get_number((*ch)["p"], "channel.p"),
                                         get_number((*ch)["q"], "channel.q"));
      channel_is_default = false;
    } else {
      fail("channel.kind", "must be \"iid\" or \"markov\"");
    }
  }

  if (const json* solver = find(doc, "solver")) {
    reject_unknown(*solver, "solver",
                   {"horizon", "K", "beta", "beta_grid", "N", "epsilon",
                    "max_iterations"});
    cfg.horizon = solver->value("horizon", "infinite");
    if (cfg.horizon != "infinite" && cfg.horizon != "finite")
      fail("solver.horizon", "must be \"infinite\" or \"finite\"");
    if (solver->contains("K")) cfg.K = (*solver)["K"].get<int>();
    if (cfg.K < 1) fail("solver.K", "must be >= 1");
    if (solver->contains("beta") && solver->contains("beta_grid"))
      fail("solver", "beta and beta_grid are mutually exclusive");
    if (solver->contains("beta")) {
      cfg.betas = {get_number((*solver)["beta"], "solver.beta")};
    } else if (solver->contains("beta_grid")) {
      if (!(*solver)["beta_grid"].is_array() || (*solver)["beta_grid"].empty())
        fail("solver.beta_grid", "expected a non-empty array");
      for (const auto& b : (*solver)["beta_grid"])
        cfg.betas.push_back(get_number(b, "solver.beta_grid"));
      cfg.beta_grid = true;
    }
    if (solver->contains("N")) cfg.N = (*solver)["N"].get<int>();
    if (cfg.N < 2) fail("solver.N", "must be >= 2");
    if (solver->contains("epsilon"))
      cfg.epsilon = get_number((*solver)["epsilon"], "solver.epsilon");
    if (solver->contains("max_iterations"))
      cfg.max_iterations = (*solver)["max_iterations"].get<long>();
  }
  if (cfg.betas.empty()) cfg.betas = {0.5};
  for (double b : cfg.betas)
    if (!(b > 0.0 && b < 1.0)) fail("solver.beta", "beta values must lie in (0,1)");

  if (const json* sim = find(doc, "simulation")) {
    reject_unknown(*sim, "simulation",
                   {"steps", "replications", "seeds", "estimators", "policy",
                    "burn_in_fraction", "trace_csv", "initial"});
    if (sim->contains("steps")) cfg.steps = (*sim)["steps"].get<long>();
    if (cfg.steps < 1) fail("simulation.steps", "must be >= 1");
    if (sim->contains("replications"))
      cfg.replications = (*sim)["replications"].get<int>();
    if (cfg.replications < 1) fail("simulation.replications", "must be >= 1");
    if (const json* seeds = find(*sim, "seeds")) {
      reject_unknown(*seeds, "simulation.seeds", {"plant", "measurement", "channel"});
      cfg.seeds.plant = seeds->value("plant", std::uint64_t{1});
      cfg.seeds.measurement = seeds->value("measurement", std::uint64_t{1});
      cfg.seeds.channel = seeds->value("channel", std::uint64_t{1});
    }
    if (const json* est = find(*sim, "estimators")) {
      if (!est->is_array()) fail("simulation.estimators", "expected an array");
      cfg.run_optimal = cfg.run_suboptimal = cfg.run_measurement = false;
      for (const auto& e : *est) {
        const std::string name = e.get<std::string>();
        if (name == "optimal") cfg.run_optimal = true;
        else if (name == "suboptimal") cfg.run_suboptimal = true;
        else if (name == "measurement") cfg.run_measurement = true;
        else fail("simulation.estimators", "unknown estimator \"" + name + "\"");
      }
      if (!cfg.run_optimal && !cfg.run_suboptimal && !cfg.run_measurement)
        fail("simulation.estimators", "at least one estimator is required");
    }
    if (const json* pol = find(*sim, "policy")) {
      reject_unknown(*pol, "simulation.policy",
                     {"kind", "file", "t", "thresholds", "threshold_grid"});
      cfg.policy_kind = pol->value("kind", "never");
      static const std::set<std::string> kinds{"solved", "threshold", "baseline",
                                               "always", "never", "random", "all"};
      if (!kinds.count(cfg.policy_kind))
        fail("simulation.policy.kind", "unknown policy kind \"" + cfg.policy_kind + "\"");
      cfg.policy_file = pol->value("file", "");
      if (pol->contains("t")) cfg.policy_t = (*pol)["t"].get<int>();
      if (cfg.policy_t < 0) fail("simulation.policy.t", "must be >= 0");
      if (const json* th = find(*pol, "thresholds")) {
        for (const auto& t : *th)
          cfg.baseline_thresholds.push_back(
              get_number(t, "simulation.policy.thresholds"));
      }
      if (const json* grid = find(*pol, "threshold_grid")) {
        for (const auto& t : *grid)
          cfg.baseline_grid.push_back(get_number(t, "simulation.policy.threshold_grid"));
      }
      if (cfg.policy_kind == "baseline" && cfg.baseline_thresholds.empty() &&
          cfg.baseline_grid.empty())
        fail("simulation.policy", "baseline needs thresholds or threshold_grid");
      if (cfg.policy_kind == "solved" && cfg.policy_file.empty())
        fail("simulation.policy.file", "solved policies need a policy artifact file");
    }
    if (sim->contains("burn_in_fraction"))
      cfg.burn_in_fraction = get_number((*sim)["burn_in_fraction"],
                                        "simulation.burn_in_fraction");
    if (cfg.burn_in_fraction < 0.0 || cfg.burn_in_fraction >= 1.0)
      fail("simulation.burn_in_fraction", "must lie in [0,1)");
    if (sim->contains("trace_csv")) cfg.trace_csv = (*sim)["trace_csv"].get<bool>();
    if (const json* init = find(*sim, "initial")) {
      reject_unknown(*init, "simulation.initial",
                     {"sensor", "hops", "cross_init", "x0_cov"});
      if (init->contains("sensor")) {
        const int s = (*init)["sensor"].get<int>();
        if (s < 1 || s > static_cast<int>(cfg.sensors.size()))
          fail("simulation.initial.sensor", "sensor index out of range (1-based)");
        cfg.initial_sensor = s - 1;
      }
      if (init->contains("hops")) cfg.initial_hops = (*init)["hops"].get<int>();
      if (cfg.initial_hops < 0) fail("simulation.initial.hops", "must be >= 0");
      const std::string ci = init->value("cross_init", "q");
      if (ci == "q") cfg.cross_init = CrossInit::Q;
      else if (ci == "steady") cfg.cross_init = CrossInit::SteadyState;
      else fail("simulation.initial.cross_init", "must be \"q\" or \"steady\"");
      if (init->contains("x0_cov"))
        cfg.x0_cov = matrix_from_json((*init)["x0_cov"], "simulation.initial.x0_cov");
    }
  }

  if (const json* t1 = find(doc, "table1")) {
    reject_unknown(*t1, "table1", {"draws", "steps", "seed"});
    if (t1->contains("draws")) cfg.table1_draws = (*t1)["draws"].get<int>();
    if (cfg.table1_draws < 1) fail("table1.draws", "must be >= 1");
    if (t1->contains("steps")) cfg.table1_steps = (*t1)["steps"].get<long>();
    if (t1->contains("seed")) cfg.table1_seed = (*t1)["seed"].get<std::uint64_t>();
  }

  if (const json* out = find(doc, "output")) {
    reject_unknown(*out, "output", {"prefix"});
    cfg.output_prefix = out->value("prefix", "run");
  }

  if (seed_override) {
    cfg.seeds.plant = cfg.seeds.measurement = cfg.seeds.channel = *seed_override;
    cfg.table1_seed = *seed_override;
  }

  // Echo with all defaults materialized.
  json echo;
  echo["schema_version"] = 1;
  echo["model"] = {{"A", matrix_to_json(cfg.model.A)}, {"Q", matrix_to_json(cfg.model.Q)}};
  echo["sensors"] = json::array();
  for (const auto& s : cfg.sensors)
    echo["sensors"].push_back({{"C", matrix_to_json(s.C)},
                               {"R", matrix_to_json(s.R)},
                               {"lambda", s.lambda},
                               {"energy_cost", s.energy_cost},
                               {"feedback_lambda", s.feedback_lambda}});
  echo["channel"] = channel_is_default
                        ? json{{"kind", "iid"}}
                        : json{{"kind", "markov"}, {"p", cfg.channel.p},
                               {"q", cfg.channel.q}};
  echo["solver"] = {{"horizon", cfg.horizon}, {"K", cfg.K},
                    {"N", cfg.N},             {"epsilon", cfg.epsilon},
                    {"max_iterations", cfg.max_iterations}};
  if (cfg.beta_grid) echo["solver"]["beta_grid"] = cfg.betas;
  else echo["solver"]["beta"] = cfg.betas[0];
  json policy{{"kind", cfg.policy_kind}};
  if (!cfg.policy_file.empty()) policy["file"] = cfg.policy_file;
  if (cfg.policy_kind == "threshold") policy["t"] = cfg.policy_t;
  if (!cfg.baseline_thresholds.empty()) policy["thresholds"] = cfg.baseline_thresholds;
  if (!cfg.baseline_grid.empty()) policy["threshold_grid"] = cfg.baseline_grid;
  json initial{{"sensor", cfg.initial_sensor + 1},
               {"hops", cfg.initial_hops},
               {"cross_init", cfg.cross_init == CrossInit::Q ? "q" : "steady"}};
  if (cfg.x0_cov) initial["x0_cov"] = matrix_to_json(*cfg.x0_cov);
  json estimators = json::array();
  if (cfg.run_optimal) estimators.push_back("optimal");
  if (cfg.run_suboptimal) estimators.push_back("suboptimal");
  if (cfg.run_measurement) estimators.push_back("measurement");
  echo["simulation"] = {{"steps", cfg.steps},
                        {"replications", cfg.replications},
                        {"seeds",
                         {{"plant", cfg.seeds.plant},
                          {"measurement", cfg.seeds.measurement},
                          {"channel", cfg.seeds.channel}}},
                        {"estimators", estimators},
                        {"policy", policy},
                        {"burn_in_fraction", cfg.burn_in_fraction},
                        {"trace_csv", cfg.trace_csv},
                        {"initial", initial}};
  echo["table1"] = {{"draws", cfg.table1_draws},
                    {"steps", cfg.table1_steps},
                    {"seed", cfg.table1_seed}};
  echo["output"] = {{"prefix", cfg.output_prefix}};
  cfg.echo = std::move(echo);
  return cfg;
}

}  // namespace covsched
