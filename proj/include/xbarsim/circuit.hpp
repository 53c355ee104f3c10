#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "xbarsim/activation.hpp"
#include "xbarsim/crossbar.hpp"
#include "xbarsim/device.hpp"
#include "xbarsim/signals.hpp"

namespace xbarsim {

/// Single: one memristor per synapse, weights are the raw memductances.
/// Differential: two memristors per synapse; the crossbar of layer l carries
/// 2 * widths[l+1] rows and the neuron input is the difference of the paired
/// row currents, so signed weights are representable.
enum class Mode { Single, Differential };

struct CircuitState {
  std::vector<int> widths;  // n_0 .. n_L, all positive
  DeviceModel device;
  Activation activation;
  Mode mode = Mode::Single;
  std::vector<CrossbarState> layers;  // layer l: layer_rows(l) x widths[l]

  int depth() const { return static_cast<int>(layers.size()); }
  Eigen::Index layer_rows(int layer) const {
    const Eigen::Index n = widths[static_cast<std::size_t>(layer) + 1];
    return mode == Mode::Differential ? 2 * n : n;
  }
  Eigen::Index layer_cols(int layer) const { return widths[static_cast<std::size_t>(layer)]; }

  void validate() const;
};

CircuitState make_circuit(std::vector<int> widths, DeviceModel device, Activation activation,
                          Mode mode = Mode::Single, double initial_flux = 0.0);

/// Instantaneous network response at frozen fluxes. Pure: does not advance state.
struct ForwardResult {
  std::vector<Eigen::VectorXd> potentials;     // P^0 .. P^L
  std::vector<Eigen::VectorXd> row_currents;   // measurable row currents per layer (raw rows)
  std::vector<Eigen::VectorXd> neuron_inputs;  // current driving each neuron (differenced in
                                               // differential mode; equals row_currents otherwise)
  const Eigen::VectorXd& output() const { return potentials.back(); }
};

ForwardResult forward_potentials(const CircuitState& circuit, const Eigen::VectorXd& input);

/// Forward response evaluated over an explicit flux set (integrator stages).
ForwardResult forward_over(const CircuitState& circuit, const std::vector<Eigen::MatrixXd>& flux,
                           const Eigen::VectorXd& input);

struct TraceOptions {
  int decimate = 1;             ///< record every k-th step (segment boundaries always recorded)
  bool record_flux = true;
  bool record_currents = true;  ///< row currents and potentials per sample
};

/// Sampled time series of one integration (or a protocol's worth of them;
/// repeated integrate calls append). Outputs are always recorded.
struct Trace {
  std::vector<double> times;
  std::vector<std::vector<Eigen::MatrixXd>> flux;
  std::vector<std::vector<Eigen::VectorXd>> row_currents;
  std::vector<std::vector<Eigen::VectorXd>> potentials;  // P^0 .. P^L
  std::vector<Eigen::VectorXd> outputs;

  std::size_t size() const { return times.size(); }
  std::vector<double> potential_series(int layer, int index) const;
  std::vector<double> row_current_series(int layer, int index) const;
  std::vector<double> flux_series(int layer, int row, int col) const;

  /// Columns: time, phi[l][k][j], Jbar[l][k], P[l][k]; layers 0-based,
  /// row-major within a layer.
  void write_csv(std::ostream& os) const;
};

struct IntegrationOptions {
  /// Fixed integrator step. Non-positive selects the default
  /// min(segment_length / 1000, 1e-2) per segment. Steps never cross a
  /// segment boundary; the final sub-step of a segment is shrunk to land on it.
  double step = 0.0;
  TraceOptions trace;
};

/// Advance the circuit fluxes over the whole signal with the classical
/// fourth-order scheme, holding switches constant. Throws if the state stops
/// being finite.
void integrate(CircuitState& circuit, const SegmentSignal& signal,
               const IntegrationOptions& options = {}, Trace* sink = nullptr);

/// Replace one layer's switch matrix. Entries must be exactly 0 or 1.
void set_switches(CircuitState& circuit, int layer, const Eigen::MatrixXd& switches);

/// Decomposition of a signed weight onto a differential pair: closed-switch
/// memductances whose signed difference equals the target.
struct SplitWeight {
  double positive = 0.0;
  double negative = 0.0;
  bool positive_closed = true;
  bool negative_closed = true;

  double value() const {
    return (positive_closed ? positive : 0.0) - (negative_closed ? negative : 0.0);
  }
};

/// Centered split when the target fits a true pair; single memristor with the
/// partner switched open when only the one-sided range reaches it. Throws a
/// domain_error for unrealizable targets.
SplitWeight split_weight(double target, const DeviceModel& device);

/// Set initial fluxes so the circuit implements the given weight matrices
/// (one n_{l+1} x n_l matrix per layer; signed values allowed in differential
/// mode, where switches are rewritten to the split pattern).
void set_flux_from_weights(CircuitState& circuit, const std::vector<Eigen::MatrixXd>& weights);

/// Largest |flux(after) - flux(before)| over all layers and entries.
double max_flux_deviation(const std::vector<Eigen::MatrixXd>& before,
                          const std::vector<Eigen::MatrixXd>& after);

std::vector<Eigen::MatrixXd> snapshot_flux(const CircuitState& circuit);

}  // namespace xbarsim
