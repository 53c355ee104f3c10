#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "xbarsim/circuit.hpp"

namespace xbarsim {

/// Index chain selecting exactly one memristor per layer up to a target:
/// indices[t] is the target column, indices[t+1] the target row (t the
/// 0-based target layer), and earlier entries pick the neuron routing the
/// signal. In differential mode intermediate entries select rows of the
/// positive bank; only the target row may address either bank.
struct Path {
  std::vector<int> indices;  // size target_layer + 2
  int target_layer = 0;

  int row() const { return indices[static_cast<std::size_t>(target_layer) + 1]; }
  int col() const { return indices[static_cast<std::size_t>(target_layer)]; }
};

enum class PathPolicy {
  FirstIndex,  ///< free entries are 0 (deterministic default)
  Spread,      ///< free entries follow the target column (used by batched modes)
};

Path make_path(const CircuitState& circuit, int layer, int row, int col,
               PathPolicy policy = PathPolicy::FirstIndex);
void validate_path(const CircuitState& circuit, const Path& path);

/// Switch matrices isolating the path: a single closed switch per layer up to
/// the target, everything later fully open.
std::vector<Eigen::MatrixXd> path_switches(const CircuitState& circuit, const Path& path);
void apply_path_switches(CircuitState& circuit, const Path& path);

struct InferResult {
  Eigen::VectorXd output;
  Trace trace;
  double flux_deviation = 0.0;  ///< max |flux(after) - flux(before)| over the run
};

/// Evaluate the implemented network at an input without disturbing it: drive
/// the block encoding of the input, read the output at the signal midpoint.
/// Switches are used as configured.
InferResult infer(CircuitState& circuit, const Eigen::VectorXd& input, double tau,
                  const IntegrationOptions& options = {});

/// Recover one memductance from terminal currents at the block-signal
/// midpoint. Fluxes and configured switches are restored.
double read_one(CircuitState& circuit, int layer, int row, int col, double tau,
                const IntegrationOptions& options = {}, Trace* sink = nullptr,
                const Path* path_override = nullptr);

struct ReadEntry {
  int layer = 0, row = 0, col = 0;
  double memductance = 0.0;
  std::vector<int> path;
};

struct ReadReport {
  std::vector<Eigen::MatrixXd> memductance;  // one matrix per layer (raw rows)
  std::vector<ReadEntry> entries;
  long applications = 0;  ///< block-signal applications consumed
  double tau = 0.0;

  /// Simulated protocol time: one 4*tau window per application.
  double elapsed_time() const { return 4.0 * tau * static_cast<double>(applications); }
};

/// Read every memristor, layers in order, columns before rows within a layer.
ReadReport read_all(CircuitState& circuit, double tau, const IntegrationOptions& options = {});

/// Column-parallel variant: one application reads a whole column in every
/// layer at once (positive and negative banks separately in differential
/// mode). Recovered values and final state match read_all.
ReadReport read_all_batched(CircuitState& circuit, double tau,
                            const IntegrationOptions& options = {});

/// Largest admissible controller gain for writing a memristor in the given
/// 0-based layer with interval T.
double gain_for_layer(const DeviceModel& device, const Activation& activation, int layer,
                      double interval);

/// Largest gain admissible for every layer of an L-layer circuit at once.
double uniform_gain(const DeviceModel& device, const Activation& activation, int num_layers,
                    double interval);

struct WriteParams {
  double eps = 0.05;
  double interval = 1.0;       ///< T, seconds of constant drive per controller step
  double probe_voltage = 1.0;  ///< nonzero initial drive
  std::optional<double> gain;  ///< alpha; empty selects gain_for_layer per target
  long max_iterations = 1000000;
};

struct WriteEntry {
  int layer = 0, row = 0, col = 0;
  double target = 0.0;
  long iterations = 0;  ///< controller intervals (the probe is extra)
  double final_memductance = 0.0;
  double final_error = 0.0;
  double duration = 0.0;  ///< (iterations + 1) * interval
  bool converged = false;
  std::vector<double> lyapunov;           ///< (flux - target flux)^2 at each interval end
  std::vector<double> memductance_curve;  ///< device value at start, then measured per interval
  std::vector<int> path;
};

/// Steer one memductance to a target with the probe-then-feedback controller.
/// Rejects targets outside the device range and gain/interval pairs violating
/// the admissibility bound before touching the circuit.
WriteEntry write_one(CircuitState& circuit, int layer, int row, int col, double target,
                     const WriteParams& params, const IntegrationOptions& options = {},
                     Trace* sink = nullptr, const Path* path_override = nullptr);

struct WriteReport {
  std::vector<WriteEntry> entries;
  double total_time = 0.0;  ///< sum of entry durations, in entry order
  double interval = 0.0;
  bool all_converged = true;
};

/// Write every connected memristor, last layer first so finished layers are
/// cut off from the remaining work. In differential mode the targets address
/// the raw (doubled) rows and open-switch positions are skipped.
WriteReport write_all(CircuitState& circuit, const std::vector<Eigen::MatrixXd>& targets,
                      const WriteParams& params, const IntegrationOptions& options = {},
                      PathPolicy policy = PathPolicy::FirstIndex);

/// Groups writes whose paths share no memristor and no input column and runs
/// each group as one batch. Produces the same final state as write_all with
/// PathPolicy::Spread; total_time counts the longest member per batch.
WriteReport write_all_batched(CircuitState& circuit, const std::vector<Eigen::MatrixXd>& targets,
                              const WriteParams& params, const IntegrationOptions& options = {});

struct ChainBoundsReport {
  long samples = 0;
  long sign_violations = 0;
  long growth_violations = 0;
  long lower_violations = 0;
  bool ok() const { return sign_violations + growth_violations + lower_violations == 0; }
};

/// Check the per-sample source-to-layer signal bounds along a path-isolated
/// trace: sign preservation, geometric growth cap, and the activation lower
/// bound between consecutive stages.
ChainBoundsReport check_chain_bounds(const Trace& trace, const Path& path,
                                     const DeviceModel& device, const Activation& activation);

}  // namespace xbarsim
