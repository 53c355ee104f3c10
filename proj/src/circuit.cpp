#include "xbarsim/circuit.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "xbarsim/util.hpp"

namespace xbarsim {

void CircuitState::validate() const {
  if (widths.size() < 2) throw std::invalid_argument("circuit: need at least one layer");
  for (int n : widths) {
    if (n <= 0) throw std::invalid_argument("circuit: widths must be positive");
  }
  if (layers.size() + 1 != widths.size()) {
    throw std::invalid_argument("circuit: layer count does not match widths");
  }
  for (int l = 0; l < depth(); ++l) {
    if (layers[l].flux.rows() != layer_rows(l) || layers[l].flux.cols() != layer_cols(l) ||
        layers[l].switches.rows() != layer_rows(l) || layers[l].switches.cols() != layer_cols(l)) {
      throw std::invalid_argument("circuit: layer " + std::to_string(l) + " has wrong shape");
    }
  }
}

CircuitState make_circuit(std::vector<int> widths, DeviceModel device, Activation activation,
                          Mode mode, double initial_flux) {
  CircuitState c;
  c.widths = std::move(widths);
  c.device = std::move(device);
  c.activation = std::move(activation);
  c.mode = mode;
  for (std::size_t l = 0; l + 1 < c.widths.size(); ++l) {
    c.layers.push_back(make_crossbar(c.layer_rows(static_cast<int>(l)),
                                     c.layer_cols(static_cast<int>(l)), initial_flux));
  }
  c.validate();
  return c;
}

ForwardResult forward_over(const CircuitState& c, const std::vector<Eigen::MatrixXd>& flux,
                           const Eigen::VectorXd& input) {
  if (input.size() != c.widths.front()) {
    throw std::invalid_argument("forward: input has length " + std::to_string(input.size()) +
                                ", circuit expects " + std::to_string(c.widths.front()));
  }
  ForwardResult r;
  r.potentials.reserve(c.layers.size() + 1);
  r.potentials.push_back(input);
  for (int l = 0; l < c.depth(); ++l) {
    const Eigen::VectorXd raw =
        (memductance_matrix(c.device, flux[l]).array() * c.layers[l].switches.array()).matrix() *
        r.potentials.back();
    Eigen::VectorXd drive;
    if (c.mode == Mode::Differential) {
      const Eigen::Index n = c.widths[static_cast<std::size_t>(l) + 1];
      drive = raw.head(n) - raw.tail(n);
    } else {
      drive = raw;
    }
    r.row_currents.push_back(raw);
    r.potentials.push_back(apply_vec(c.activation, drive));
    r.neuron_inputs.push_back(std::move(drive));
  }
  return r;
}

ForwardResult forward_potentials(const CircuitState& c, const Eigen::VectorXd& input) {
  std::vector<Eigen::MatrixXd> flux;
  flux.reserve(c.layers.size());
  for (const auto& layer : c.layers) flux.push_back(layer.flux);
  return forward_over(c, flux, input);
}

namespace {

using FluxSet = std::vector<Eigen::MatrixXd>;

FluxSet flux_derivative(const CircuitState& c, const FluxSet& flux, const Eigen::VectorXd& input) {
  const ForwardResult f = forward_over(c, flux, input);
  FluxSet d(flux.size());
  for (std::size_t l = 0; l < flux.size(); ++l) {
    d[l] = c.layers[l].switches.array().rowwise() * f.potentials[l].transpose().array();
  }
  return d;
}

FluxSet staged(const FluxSet& base, double h, const FluxSet& slope) {
  FluxSet out(base.size());
  for (std::size_t l = 0; l < base.size(); ++l) out[l] = base[l] + h * slope[l];
  return out;
}

void record_sample(Trace& trace, const TraceOptions& opts, const CircuitState& c,
                   const FluxSet& flux, const Eigen::VectorXd& input, double t) {
  if (!trace.times.empty() && std::abs(trace.times.back() - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
    return;  // same instant already recorded (end of previous call)
  }
  const ForwardResult f = forward_over(c, flux, input);
  trace.times.push_back(t);
  trace.outputs.push_back(f.output());
  if (opts.record_flux) trace.flux.push_back(flux);
  if (opts.record_currents) {
    trace.row_currents.push_back(f.row_currents);
    trace.potentials.push_back(f.potentials);
  }
}

}  // namespace

void integrate(CircuitState& c, const SegmentSignal& signal, const IntegrationOptions& options,
               Trace* sink) {
  c.validate();
  signal.validate();
  if (signal.dims() != c.widths.front()) {
    throw std::invalid_argument("integrate: signal dimension does not match input width");
  }

  FluxSet flux = snapshot_flux(c);
  if (sink) record_sample(*sink, options.trace, c, flux, signal.values.front(), signal.start());

  for (std::size_t seg = 0; seg < signal.segments(); ++seg) {
    const double t0 = signal.breakpoints[seg];
    const double t1 = signal.breakpoints[seg + 1];
    const Eigen::VectorXd& u = signal.values[seg];
    const double len = t1 - t0;
    const double h0 = options.step > 0.0 ? options.step : std::min(len / 1000.0, 1e-2);
    const long n = std::max<long>(1, static_cast<long>(std::ceil(len / h0 - 1e-9)));

    double t = t0;
    for (long k = 1; k <= n; ++k) {
      const double target = (k == n) ? t1 : t0 + static_cast<double>(k) * h0;
      const double h = target - t;

      const FluxSet k1 = flux_derivative(c, flux, u);
      const FluxSet k2 = flux_derivative(c, staged(flux, 0.5 * h, k1), u);
      const FluxSet k3 = flux_derivative(c, staged(flux, 0.5 * h, k2), u);
      const FluxSet k4 = flux_derivative(c, staged(flux, h, k3), u);
      for (std::size_t l = 0; l < flux.size(); ++l) {
        flux[l] += (h / 6.0) * (k1[l] + 2.0 * k2[l] + 2.0 * k3[l] + k4[l]);
        if (!flux[l].allFinite()) {
          throw std::runtime_error("integrate: non-finite flux in layer " + std::to_string(l) +
                                   " at t=" + format_double(target));
        }
      }
      t = target;

      if (sink && (k == n || options.trace.decimate <= 1 || k % options.trace.decimate == 0)) {
        record_sample(*sink, options.trace, c, flux, u, t);
      }
    }
  }

  for (std::size_t l = 0; l < flux.size(); ++l) c.layers[l].flux = std::move(flux[l]);
}

void set_switches(CircuitState& c, int layer, const Eigen::MatrixXd& switches) {
  if (layer < 0 || layer >= c.depth()) throw std::out_of_range("set_switches: layer out of range");
  if (switches.rows() != c.layer_rows(layer) || switches.cols() != c.layer_cols(layer)) {
    throw std::invalid_argument("set_switches: wrong shape for layer " + std::to_string(layer));
  }
  for (Eigen::Index j = 0; j < switches.cols(); ++j) {
    for (Eigen::Index k = 0; k < switches.rows(); ++k) {
      const double s = switches(k, j);
      if (s != 0.0 && s != 1.0) {
        throw std::invalid_argument("set_switches: entries must be 0 or 1");
      }
    }
  }
  c.layers[static_cast<std::size_t>(layer)].switches = switches;
}

SplitWeight split_weight(double target, const DeviceModel& device) {
  const double span = device.max_memductance - device.min_memductance;
  const double mid = 0.5 * (device.min_memductance + device.max_memductance);
  if (std::abs(target) < span) {
    return {mid + 0.5 * target, mid - 0.5 * target, true, true};
  }
  if (std::abs(target) > device.min_memductance && std::abs(target) < device.max_memductance) {
    if (target > 0.0) return {target, mid, true, false};
    return {mid, -target, false, true};
  }
  throw std::domain_error("split_weight: target " + std::to_string(target) +
                          " is not realizable by a differential pair of this device");
}

void set_flux_from_weights(CircuitState& c, const std::vector<Eigen::MatrixXd>& weights) {
  if (static_cast<int>(weights.size()) != c.depth()) {
    throw std::invalid_argument("set_flux_from_weights: need one matrix per layer");
  }
  for (int l = 0; l < c.depth(); ++l) {
    const Eigen::MatrixXd& w = weights[static_cast<std::size_t>(l)];
    const Eigen::Index n = c.widths[static_cast<std::size_t>(l) + 1];
    if (w.rows() != n || w.cols() != c.layer_cols(l)) {
      throw std::invalid_argument("set_flux_from_weights: layer " + std::to_string(l) +
                                  " matrix has wrong shape");
    }
    auto& layer = c.layers[static_cast<std::size_t>(l)];
    if (c.mode == Mode::Single) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index k = 0; k < w.rows(); ++k) {
          layer.flux(k, j) = invert_memductance(c.device, w(k, j));
        }
      }
    } else {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
          const SplitWeight s = split_weight(w(k, j), c.device);
          layer.flux(k, j) = s.positive_closed ? invert_memductance(c.device, s.positive) : 0.0;
          layer.flux(k + n, j) = s.negative_closed ? invert_memductance(c.device, s.negative) : 0.0;
          layer.switches(k, j) = s.positive_closed ? 1.0 : 0.0;
          layer.switches(k + n, j) = s.negative_closed ? 1.0 : 0.0;
        }
      }
    }
  }
}

double max_flux_deviation(const std::vector<Eigen::MatrixXd>& before,
                          const std::vector<Eigen::MatrixXd>& after) {
  if (before.size() != after.size()) {
    throw std::invalid_argument("max_flux_deviation: layer count mismatch");
  }
  double worst = 0.0;
  for (std::size_t l = 0; l < before.size(); ++l) {
    worst = std::max(worst, (before[l] - after[l]).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<Eigen::MatrixXd> snapshot_flux(const CircuitState& c) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(c.layers.size());
  for (const auto& layer : c.layers) out.push_back(layer.flux);
  return out;
}

std::vector<double> Trace::potential_series(int layer, int index) const {
  if (potentials.size() != times.size()) {
    throw std::logic_error("trace: potentials were not recorded");
  }
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    out[i] = potentials[i][static_cast<std::size_t>(layer)][index];
  }
  return out;
}

std::vector<double> Trace::row_current_series(int layer, int index) const {
  if (row_currents.size() != times.size()) {
    throw std::logic_error("trace: row currents were not recorded");
  }
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    out[i] = row_currents[i][static_cast<std::size_t>(layer)][index];
  }
  return out;
}

std::vector<double> Trace::flux_series(int layer, int row, int col) const {
  if (flux.size() != times.size()) throw std::logic_error("trace: fluxes were not recorded");
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    out[i] = flux[i][static_cast<std::size_t>(layer)](row, col);
  }
  return out;
}

void Trace::write_csv(std::ostream& os) const {
  if (times.empty()) {
    os << "time\n";
    return;
  }
  const bool has_flux = flux.size() == times.size();
  const bool has_currents = row_currents.size() == times.size();
  os << "time";
  if (has_flux) {
    for (std::size_t l = 0; l < flux.front().size(); ++l) {
      const auto& m = flux.front()[l];
      for (Eigen::Index k = 0; k < m.rows(); ++k) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          os << ",phi[" << l << "][" << k << "][" << j << "]";
        }
      }
    }
  }
  if (has_currents) {
    for (std::size_t l = 0; l < row_currents.front().size(); ++l) {
      for (Eigen::Index k = 0; k < row_currents.front()[l].size(); ++k) {
        os << ",Jbar[" << l << "][" << k << "]";
      }
    }
    for (std::size_t l = 0; l < potentials.front().size(); ++l) {
      for (Eigen::Index k = 0; k < potentials.front()[l].size(); ++k) {
        os << ",P[" << l << "][" << k << "]";
      }
    }
  }
  os << "\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << format_double(times[i]);
    if (has_flux) {
      for (const auto& m : flux[i]) {
        for (Eigen::Index k = 0; k < m.rows(); ++k) {
          for (Eigen::Index j = 0; j < m.cols(); ++j) os << "," << format_double(m(k, j));
        }
      }
    }
    if (has_currents) {
      for (const auto& v : row_currents[i]) {
        for (Eigen::Index k = 0; k < v.size(); ++k) os << "," << format_double(v[k]);
      }
      for (const auto& v : potentials[i]) {
        for (Eigen::Index k = 0; k < v.size(); ++k) os << "," << format_double(v[k]);
      }
    }
    os << "\n";
  }
}

}  // namespace xbarsim
