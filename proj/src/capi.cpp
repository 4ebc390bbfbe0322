#include "covsched.h"

#include <functional>
#include <optional>
#include <string>

#include "covsched/config.hpp"
#include "covsched/errors.hpp"
#include "covsched/experiments.hpp"
#include "covsched/output.hpp"

struct covsched_session {
  nlohmann::json raw;
  bool loaded = false;
  std::optional<std::uint64_t> seed_override;
  std::string message;
  std::string report = "{}";
  std::string echo;
};

namespace {

int capture(covsched_session* s, const std::function<int()>& body) {
  if (!s) return COVSCHED_ERR_CONFIG;
  try {
    return body();
  } catch (const covsched::Error& e) {
    s->message = e.what();
    return static_cast<int>(e.status());
  } catch (const std::exception& e) {
    s->message = std::string("internal error: ") + e.what();
    return COVSCHED_ERR_INTERNAL;
  }
}

int load(covsched_session* s, nlohmann::json doc) {
  return capture(s, [&] {
    const covsched::ExperimentConfig cfg =
        covsched::parse_experiment_config(doc, s->seed_override);
    s->raw = std::move(doc);
    s->loaded = true;
    s->echo = covsched::dump_json_17(cfg.echo);
    s->message = "config loaded";
    return COVSCHED_OK;
  });
}

}  // namespace

extern "C" {

covsched_session* covsched_session_new(void) { return new covsched_session(); }

void covsched_session_free(covsched_session* session) { delete session; }

int covsched_load_config(covsched_session* session, const char* json_text) {
  if (!session) return COVSCHED_ERR_CONFIG;
  return capture(session, [&] {
    if (!json_text) throw covsched::ConfigError("null config text");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw covsched::ConfigError(std::string("config parse error: ") + e.what());
    }
    return load(session, std::move(doc));
  });
}

int covsched_load_config_file(covsched_session* session, const char* path) {
  if (!session) return COVSCHED_ERR_CONFIG;
  return capture(session, [&] {
    if (!path) throw covsched::ConfigError("null config path");
    return load(session, covsched::load_json_file(path));
  });
}

int covsched_set_seed(covsched_session* session, uint64_t seed) {
  if (!session) return COVSCHED_ERR_CONFIG;
  return capture(session, [&] {
    session->seed_override = seed;
    if (session->loaded) {
      const covsched::ExperimentConfig cfg =
          covsched::parse_experiment_config(session->raw, session->seed_override);
      session->echo = covsched::dump_json_17(cfg.echo);
    }
    session->message = "seed override set";
    return COVSCHED_OK;
  });
}

int covsched_run(covsched_session* session, const char* command, const char* out_dir) {
  if (!session) return COVSCHED_ERR_CONFIG;
  return capture(session, [&] {
    if (!command) throw covsched::ConfigError("null command");
    if (!session->loaded) throw covsched::ConfigError("no config loaded");
    const covsched::ExperimentConfig cfg =
        covsched::parse_experiment_config(session->raw, session->seed_override);
    const covsched::CommandResult res =
        covsched::run_command(command, cfg, out_dir ? out_dir : "out");
    session->message = res.message;
    session->report = covsched::dump_json_17(res.report);
    return res.exit_code;
  });
}

const char* covsched_last_message(const covsched_session* session) {
  return session ? session->message.c_str() : "";
}

const char* covsched_last_report_json(const covsched_session* session) {
  return session ? session->report.c_str() : "{}";
}

const char* covsched_config_echo_json(const covsched_session* session) {
  return session && session->loaded ? session->echo.c_str() : nullptr;
}

const char* covsched_version(void) { return "0.1.0"; }

}  // extern "C"
