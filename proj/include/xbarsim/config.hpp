#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "xbarsim/circuit.hpp"
#include "xbarsim/oracle.hpp"

namespace xbarsim {

/// One experiment: a circuit description plus protocol parameters. The JSON
/// document is kept verbatim so reports can name the exact configuration
/// (hash of the effective document, after command-line overrides).
struct RunConfig {
  nlohmann::json doc;
  std::string out_dir = "out";

  std::string hash() const;

  double tau() const { return doc.value("tau", 5.0); }
  double eps() const { return doc.value("eps", 0.05); }
  double interval() const { return doc.value("T", 1.0); }
  double probe_voltage() const { return doc.value("x0", 1.0); }
  double step() const { return doc.value("step", 0.0); }
  long limit() const { return doc.value("limit", -1L); }
  std::uint64_t seed() const { return doc.value("seed", std::uint64_t{0}); }
  int trace_decimate() const { return doc.value("trace_decimate", 1); }
  bool batched() const { return doc.value("batched", false); }

  /// "auto" (or absence) selects the per-layer admissible gain.
  std::optional<double> gain() const;

  nlohmann::json params() const;  ///< parameter block echoed into every report
};

RunConfig load_run_config(const std::string& path);

DeviceModel device_from_config(const nlohmann::json& spec);
Activation activation_from_config(const nlohmann::json& spec);

/// Builds the circuit named by the run config ("circuit" inline object or
/// "circuit_config" path). Validates the named device and activation first.
CircuitState circuit_from_config(const RunConfig& cfg);

/// Signed weight matrices named by the config ("targets"/"weights": path or
/// inline per-layer arrays).
std::vector<Eigen::MatrixXd> weights_from_config(const RunConfig& cfg, const std::string& key);

}  // namespace xbarsim
