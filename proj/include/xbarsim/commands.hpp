#pragma once

#include "xbarsim/config.hpp"

namespace xbarsim {

// Verb drivers behind the CLI. Each writes its reports into cfg.out_dir and
// returns a process exit code (0 on success, 1 on any failure).

int cmd_infer(const RunConfig& cfg);
int cmd_read(const RunConfig& cfg);
int cmd_write(const RunConfig& cfg);
int cmd_mnist(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);

}  // namespace xbarsim
