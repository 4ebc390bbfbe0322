// Command-line front end. Links only the covsched C API.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "covsched.h"

namespace {

struct SessionDeleter {
  void operator()(covsched_session* s) const { covsched_session_free(s); }
};

struct CommonOpts {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool have_seed = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config, "experiment config (JSON)")->required();
  cmd->add_option("--out", opts.out, "artifact output directory");
  cmd->add_option("--seed", opts.seed, "override all seeds in the config")
      ->each([&opts](const std::string&) { opts.have_seed = true; });
  cmd->add_flag("--quiet", opts.quiet, "suppress non-error output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covsched: sensor transmission scheduling for remote estimation "
               "over packet-dropping channels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(covsched_version()));

  static const char* commands[] = {"solve",    "simulate", "verify",
                                   "tradeoff", "table1",   "counterexamples"};
  static const char* blurbs[] = {
      "solve the scheduling problem and write policy/value artifacts",
      "run the Monte Carlo engine under the configured policy",
      "run the structural invariant battery and counterexample regressions",
      "sweep beta and produce the energy/covariance tradeoff curve",
      "estimator comparison over randomly drawn sensor parameters",
      "reproduce the measurement-transmission counterexamples"};

  CommonOpts opts[6];
  for (int i = 0; i < 6; ++i) add_common(app.add_subcommand(commands[i], blurbs[i]), opts[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage problems uniformly exit 1; --help/--version exit 0.
    const int rc = app.exit(e);
    return rc == 0 ? 0 : COVSCHED_ERR_CONFIG;
  }

  int which = -1;
  for (int i = 0; i < 6; ++i)
    if (app.get_subcommand(commands[i])->parsed()) which = i;
  const CommonOpts& o = opts[which];

  std::unique_ptr<covsched_session, SessionDeleter> session(covsched_session_new());
  int rc = covsched_load_config_file(session.get(), o.config.c_str());
  if (rc != COVSCHED_OK) {
    std::fprintf(stderr, "error: %s\n", covsched_last_message(session.get()));
    return rc;
  }
  if (o.have_seed) covsched_set_seed(session.get(), o.seed);

  rc = covsched_run(session.get(), commands[which], o.out.c_str());
  if (rc != COVSCHED_OK)
    std::fprintf(stderr, "error (%d): %s\n", rc, covsched_last_message(session.get()));
  else if (!o.quiet)
    std::printf("%s\n", covsched_last_message(session.get()));
  if (!o.quiet && rc == COVSCHED_OK)
    std::printf("%s", covsched_last_report_json(session.get()));
  return rc;
}
