#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "xbarsim/commands.hpp"

namespace {

struct Overrides {
  std::optional<std::string> config;
  std::optional<double> tau, eps, T, x0, step;
  std::optional<std::string> alpha;
  std::optional<long> limit;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)")->required();
  cmd->add_option("--tau", o.tau, "Block-signal quarter-period [s]");
  cmd->add_option("--eps", o.eps, "Write tolerance [S]");
  cmd->add_option("--T", o.T, "Controller interval [s]");
  cmd->add_option("--alpha", o.alpha, "Controller gain, or \"auto\"");
  cmd->add_option("--x0", o.x0, "Probe voltage [V]");
  cmd->add_option("--step", o.step, "Integrator step [s] (0 = default)");
  cmd->add_option("--limit", o.limit, "Record limit for dataset runs");
  cmd->add_option("--seed", o.seed, "Seed for synthetic fixtures");
  cmd->add_option("--out", o.out, "Output directory");
}

xbarsim::RunConfig effective_config(const Overrides& o) {
  xbarsim::RunConfig cfg = xbarsim::load_run_config(*o.config);
  if (o.tau) cfg.doc["tau"] = *o.tau;
  if (o.eps) cfg.doc["eps"] = *o.eps;
  if (o.T) cfg.doc["T"] = *o.T;
  if (o.x0) cfg.doc["x0"] = *o.x0;
  if (o.step) cfg.doc["step"] = *o.step;
  if (o.limit) cfg.doc["limit"] = *o.limit;
  if (o.seed) cfg.doc["seed"] = *o.seed;
  if (o.alpha) {
    if (*o.alpha == "auto") {
      cfg.doc["alpha"] = "auto";
    } else {
      cfg.doc["alpha"] = std::stod(*o.alpha);
    }
  }
  if (o.out) cfg.out_dir = *o.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memristive crossbar network simulator"};
  app.require_subcommand(1);

  Overrides o;
  int (*run)(const xbarsim::RunConfig&) = nullptr;

  auto* infer = app.add_subcommand("infer", "Evaluate the circuit at an input, non-invasively");
  add_common(infer, o);
  infer->callback([&] { run = &xbarsim::cmd_infer; });

  auto* read = app.add_subcommand("read", "Recover all memductances from terminal currents");
  add_common(read, o);
  read->callback([&] { run = &xbarsim::cmd_read; });

  auto* write = app.add_subcommand("write", "Steer memductances to target weights");
  add_common(write, o);
  write->callback([&] { run = &xbarsim::cmd_write; });

  auto* mnist = app.add_subcommand("mnist", "Digit-recognition run: circuit vs software network");
  add_common(mnist, o);
  mnist->callback([&] { run = &xbarsim::cmd_mnist; });

  auto* verify = app.add_subcommand("verify", "Run assumption validators and oracle cross-checks");
  add_common(verify, o);
  verify->callback([&] { run = &xbarsim::cmd_verify; });

  CLI11_PARSE(app, argc, argv);

  try {
    return run(effective_config(o));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
