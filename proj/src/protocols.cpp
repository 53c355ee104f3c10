#include "xbarsim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace xbarsim {

namespace {

class SwitchGuard {
 public:
  explicit SwitchGuard(CircuitState& c) : circuit_(&c) {
    for (const auto& layer : c.layers) saved_.push_back(layer.switches);
  }
  ~SwitchGuard() {
    for (std::size_t l = 0; l < saved_.size(); ++l) {
      circuit_->layers[l].switches = std::move(saved_[l]);
    }
  }
  SwitchGuard(const SwitchGuard&) = delete;
  SwitchGuard& operator=(const SwitchGuard&) = delete;

 private:
  CircuitState* circuit_;
  std::vector<Eigen::MatrixXd> saved_;
};

Eigen::VectorXd unit_input(const CircuitState& c, int column, double value) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(c.widths.front());
  u[column] = value;
  return u;
}

double measured_memductance(const ForwardResult& f, int layer, int row, int col) {
  const double divisor = f.potentials[static_cast<std::size_t>(layer)][col];
  if (std::abs(divisor) < 1e-12) {
    throw std::runtime_error(
        "protocol: measured divisor vanished; device or activation violates its assumptions");
  }
  return f.row_currents[static_cast<std::size_t>(layer)][row] / divisor;
}

}  // namespace

Path make_path(const CircuitState& c, int layer, int row, int col, PathPolicy policy) {
  Path p;
  p.target_layer = layer;
  p.indices.resize(static_cast<std::size_t>(layer) + 2, 0);
  if (policy == PathPolicy::Spread) {
    for (int k = 0; k < layer; ++k) {
      p.indices[static_cast<std::size_t>(k)] = col % c.widths[static_cast<std::size_t>(k)];
    }
  }
  p.indices[static_cast<std::size_t>(layer)] = col;
  p.indices[static_cast<std::size_t>(layer) + 1] = row;
  validate_path(c, p);
  return p;
}

void validate_path(const CircuitState& c, const Path& p) {
  if (p.target_layer < 0 || p.target_layer >= c.depth()) {
    throw std::out_of_range("path: target layer out of range");
  }
  if (p.indices.size() != static_cast<std::size_t>(p.target_layer) + 2) {
    throw std::invalid_argument("path: wrong index count for target layer");
  }
  for (int k = 0; k <= p.target_layer; ++k) {
    const int idx = p.indices[static_cast<std::size_t>(k)];
    if (idx < 0 || idx >= c.widths[static_cast<std::size_t>(k)]) {
      throw std::out_of_range("path: index " + std::to_string(k) + " out of range");
    }
  }
  const int row = p.row();
  if (row < 0 || row >= c.layer_rows(p.target_layer)) {
    throw std::out_of_range("path: target row out of range");
  }
}

std::vector<Eigen::MatrixXd> path_switches(const CircuitState& c, const Path& p) {
  validate_path(c, p);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(c.layers.size());
  for (int l = 0; l < c.depth(); ++l) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(c.layer_rows(l), c.layer_cols(l));
    if (l < p.target_layer) {
      s(p.indices[static_cast<std::size_t>(l) + 1], p.indices[static_cast<std::size_t>(l)]) = 1.0;
    } else if (l == p.target_layer) {
      s(p.row(), p.col()) = 1.0;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void apply_path_switches(CircuitState& c, const Path& p) {
  auto switches = path_switches(c, p);
  for (int l = 0; l < c.depth(); ++l) {
    c.layers[static_cast<std::size_t>(l)].switches = std::move(switches[static_cast<std::size_t>(l)]);
  }
}

InferResult infer(CircuitState& c, const Eigen::VectorXd& input, double tau,
                  const IntegrationOptions& options) {
  if (!(tau > 0.0)) throw std::invalid_argument("infer: tau must be positive");
  InferResult r;
  const auto before = snapshot_flux(c);
  integrate(c, encode(input, tau), options, &r.trace);
  r.output = decode(r.trace, tau);
  r.flux_deviation = max_flux_deviation(before, snapshot_flux(c));
  return r;
}

namespace {

/// Runs one block-signal application with the given switches already set and
/// returns the trace restricted to this application.
Trace run_block(CircuitState& c, const Eigen::VectorXd& amplitudes, double tau,
                const IntegrationOptions& options, Trace* sink) {
  IntegrationOptions local = options;
  Trace own;
  Trace* target = sink;
  if (!target) {
    // Only the midpoint and end samples matter here; skip interior bookkeeping.
    local.trace.decimate = std::numeric_limits<int>::max();
    local.trace.record_flux = false;
    local.trace.record_currents = true;
    target = &own;
  }
  const std::size_t first = target->size();
  integrate(c, encode(amplitudes, tau), local, target);
  Trace view;
  view.times.assign(target->times.begin() + first, target->times.end());
  view.outputs.assign(target->outputs.begin() + first, target->outputs.end());
  if (target->potentials.size() == target->times.size()) {
    view.potentials.assign(target->potentials.begin() + first, target->potentials.end());
    view.row_currents.assign(target->row_currents.begin() + first, target->row_currents.end());
  }
  if (target->flux.size() == target->times.size()) {
    view.flux.assign(target->flux.begin() + first, target->flux.end());
  }
  return view;
}

std::size_t midpoint_index(const Trace& t, double tau) {
  const double target = 2.0 * tau;
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    if (std::abs(t.times[i] - target) <= 1e-9 * std::max(1.0, target)) return i;
  }
  throw std::runtime_error("protocol: no sample at the block-signal midpoint");
}

}  // namespace

double read_one(CircuitState& c, int layer, int row, int col, double tau,
                const IntegrationOptions& options, Trace* sink, const Path* path_override) {
  if (!(tau > 0.0)) throw std::invalid_argument("read_one: tau must be positive");
  const Path path = path_override ? *path_override : make_path(c, layer, row, col);
  if (path.target_layer != layer || path.row() != row || path.col() != col) {
    throw std::invalid_argument("read_one: path does not address the requested memristor");
  }
  SwitchGuard guard(c);
  apply_path_switches(c, path);
  const Trace t = run_block(c, unit_input(c, path.indices.front(), 1.0), tau, options, sink);
  if (t.potentials.size() != t.times.size()) {
    throw std::invalid_argument("read_one: trace sink must record currents");
  }
  const std::size_t mid = midpoint_index(t, tau);
  ForwardResult f;
  f.potentials = t.potentials[mid];
  f.row_currents = t.row_currents[mid];
  return measured_memductance(f, layer, row, col);
}

ReadReport read_all(CircuitState& c, double tau, const IntegrationOptions& options) {
  ReadReport report;
  report.tau = tau;
  for (int l = 0; l < c.depth(); ++l) {
    report.memductance.push_back(Eigen::MatrixXd::Zero(c.layer_rows(l), c.layer_cols(l)));
  }
  for (int l = 0; l < c.depth(); ++l) {
    for (int j = 0; j < c.layer_cols(l); ++j) {
      for (int k = 0; k < c.layer_rows(l); ++k) {
        const Path path = make_path(c, l, k, j);
        const double w = read_one(c, l, k, j, tau, options, nullptr, &path);
        report.memductance[static_cast<std::size_t>(l)](k, j) = w;
        report.entries.push_back({l, k, j, w, path.indices});
        ++report.applications;
      }
    }
  }
  return report;
}

ReadReport read_all_batched(CircuitState& c, double tau, const IntegrationOptions& options) {
  ReadReport report;
  report.tau = tau;
  for (int l = 0; l < c.depth(); ++l) {
    report.memductance.push_back(Eigen::MatrixXd::Zero(c.layer_rows(l), c.layer_cols(l)));
  }
  int max_cols = 0;
  for (int l = 0; l < c.depth(); ++l) {
    max_cols = std::max(max_cols, static_cast<int>(c.layer_cols(l)));
  }
  const int banks = c.mode == Mode::Differential ? 2 : 1;

  for (int bank = 0; bank < banks; ++bank) {
    for (int sweep = 0; sweep < max_cols; ++sweep) {
      SwitchGuard guard(c);
      // Every layer exposes one whole column of the selected bank; the column
      // driving the next layer is the one the sweep lands on there.
      std::vector<int> col_of_layer(static_cast<std::size_t>(c.depth()));
      for (int l = 0; l < c.depth(); ++l) {
        const int cols = static_cast<int>(c.layer_cols(l));
        const int cl = sweep % cols;
        col_of_layer[static_cast<std::size_t>(l)] = cl;
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(c.layer_rows(l), c.layer_cols(l));
        const Eigen::Index n = c.widths[static_cast<std::size_t>(l) + 1];
        const Eigen::Index lo = bank == 0 ? 0 : n;
        const Eigen::Index hi = bank == 0 ? (c.mode == Mode::Differential ? n : c.layer_rows(l))
                                          : 2 * n;
        for (Eigen::Index k = lo; k < hi; ++k) s(k, cl) = 1.0;
        c.layers[static_cast<std::size_t>(l)].switches = std::move(s);
      }
      const int source_col = col_of_layer.front();
      const Trace t = run_block(c, unit_input(c, source_col, 1.0), tau, options, nullptr);
      const std::size_t mid = midpoint_index(t, tau);
      ForwardResult f;
      f.potentials = t.potentials[mid];
      f.row_currents = t.row_currents[mid];
      for (int l = 0; l < c.depth(); ++l) {
        if (sweep >= static_cast<int>(c.layer_cols(l))) continue;  // column already covered
        const int cl = col_of_layer[static_cast<std::size_t>(l)];
        const Eigen::Index n = c.widths[static_cast<std::size_t>(l) + 1];
        const Eigen::Index lo = bank == 0 ? 0 : n;
        const Eigen::Index hi = bank == 0 ? (c.mode == Mode::Differential ? n : c.layer_rows(l))
                                          : 2 * n;
        for (Eigen::Index k = lo; k < hi; ++k) {
          const double w = measured_memductance(f, l, static_cast<int>(k), cl);
          report.memductance[static_cast<std::size_t>(l)](k, cl) = w;
          report.entries.push_back({l, static_cast<int>(k), cl, w, {}});
        }
      }
      ++report.applications;
    }
  }
  return report;
}

double gain_for_layer(const DeviceModel& device, const Activation& activation, int layer,
                      double interval) {
  if (!(interval > 0.0)) throw std::invalid_argument("gain_for_layer: interval must be positive");
  return 1.0 / (interval * device.lipschitz *
                std::pow(activation.lipschitz * device.max_memductance, layer));
}

double uniform_gain(const DeviceModel& device, const Activation& activation, int num_layers,
                    double interval) {
  if (!(interval > 0.0) || num_layers < 1) {
    throw std::invalid_argument("uniform_gain: need positive interval and at least one layer");
  }
  const double growth =
      std::pow(activation.lipschitz * device.max_memductance, num_layers - 1);
  return 1.0 / (interval * device.lipschitz * std::max(1.0, growth));
}

WriteEntry write_one(CircuitState& c, int layer, int row, int col, double target,
                     const WriteParams& params, const IntegrationOptions& options, Trace* sink,
                     const Path* path_override) {
  if (!(target > c.device.min_memductance && target < c.device.max_memductance)) {
    throw std::domain_error("write_one: target " + std::to_string(target) +
                            " outside the realizable memductance range");
  }
  if (params.probe_voltage == 0.0) {
    throw std::invalid_argument("write_one: probe voltage must be nonzero");
  }
  const double alpha =
      params.gain ? *params.gain : gain_for_layer(c.device, c.activation, layer, params.interval);
  const double bound = 1.0 / (c.device.lipschitz *
                              std::pow(c.activation.lipschitz * c.device.max_memductance, layer));
  if (alpha * params.interval > bound * (1.0 + 1e-12)) {
    throw std::invalid_argument("write_one: gain condition violated for this layer");
  }

  const Path path = path_override ? *path_override : make_path(c, layer, row, col);
  if (path.target_layer != layer || path.row() != row || path.col() != col) {
    throw std::invalid_argument("write_one: path does not address the requested memristor");
  }
  SwitchGuard guard(c);
  apply_path_switches(c, path);

  const double target_flux = invert_memductance(c.device, target);
  auto& flux = c.layers[static_cast<std::size_t>(layer)].flux;

  WriteEntry entry;
  entry.layer = layer;
  entry.row = row;
  entry.col = col;
  entry.target = target;
  entry.path = path.indices;
  entry.memductance_curve.push_back(c.device.memductance_curve(flux(row, col)));

  const int source = path.indices.front();
  double clock = 0.0;
  auto drive = [&](double voltage) {
    const Eigen::VectorXd u = unit_input(c, source, voltage);
    integrate(c, SegmentSignal::constant(clock, clock + params.interval, u), options, sink);
    clock += params.interval;
    return forward_potentials(c, u);
  };

  ForwardResult f = drive(params.probe_voltage);
  double measured = measured_memductance(f, layer, row, col);
  entry.memductance_curve.push_back(measured);
  entry.lyapunov.push_back(std::pow(flux(row, col) - target_flux, 2));

  while (std::abs(target - measured) > params.eps) {
    if (entry.iterations >= params.max_iterations) {
      entry.final_memductance = measured;
      entry.final_error = std::abs(target - measured);
      entry.duration = static_cast<double>(entry.iterations + 1) * params.interval;
      return entry;  // converged stays false
    }
    f = drive(alpha * (target - measured));
    measured = measured_memductance(f, layer, row, col);
    entry.memductance_curve.push_back(measured);
    entry.lyapunov.push_back(std::pow(flux(row, col) - target_flux, 2));
    ++entry.iterations;
  }
  entry.converged = true;
  entry.final_memductance = measured;
  entry.final_error = std::abs(target - measured);
  entry.duration = static_cast<double>(entry.iterations + 1) * params.interval;
  return entry;
}

namespace {

void check_targets(const CircuitState& c, const std::vector<Eigen::MatrixXd>& targets) {
  if (static_cast<int>(targets.size()) != c.depth()) {
    throw std::invalid_argument("write_all: need one target matrix per layer");
  }
  for (int l = 0; l < c.depth(); ++l) {
    if (targets[static_cast<std::size_t>(l)].rows() != c.layer_rows(l) ||
        targets[static_cast<std::size_t>(l)].cols() != c.layer_cols(l)) {
      throw std::invalid_argument("write_all: target matrix " + std::to_string(l) +
                                  " has wrong shape");
    }
  }
}

}  // namespace

WriteReport write_all(CircuitState& c, const std::vector<Eigen::MatrixXd>& targets,
                      const WriteParams& params, const IntegrationOptions& options,
                      PathPolicy policy) {
  check_targets(c, targets);
  WriteReport report;
  report.interval = params.interval;
  for (int l = c.depth() - 1; l >= 0; --l) {
    WriteParams layer_params = params;
    if (!params.gain) layer_params.gain = gain_for_layer(c.device, c.activation, l, params.interval);
    for (int j = 0; j < c.layer_cols(l); ++j) {
      for (int k = 0; k < c.layer_rows(l); ++k) {
        if (c.layers[static_cast<std::size_t>(l)].switches(k, j) == 0.0) continue;
        const Path path = make_path(c, l, k, j, policy);
        WriteEntry entry = write_one(c, l, k, j, targets[static_cast<std::size_t>(l)](k, j),
                                     layer_params, options, nullptr, &path);
        report.all_converged = report.all_converged && entry.converged;
        report.total_time += entry.duration;
        report.entries.push_back(std::move(entry));
      }
    }
  }
  return report;
}

WriteReport write_all_batched(CircuitState& c, const std::vector<Eigen::MatrixXd>& targets,
                              const WriteParams& params, const IntegrationOptions& options) {
  check_targets(c, targets);
  WriteReport report;
  report.interval = params.interval;

  for (int l = c.depth() - 1; l >= 0; --l) {
    WriteParams layer_params = params;
    if (!params.gain) layer_params.gain = gain_for_layer(c.device, c.activation, l, params.interval);

    std::vector<std::pair<int, int>> pending;  // (j, k) in write_all order
    for (int j = 0; j < c.layer_cols(l); ++j) {
      for (int k = 0; k < c.layer_rows(l); ++k) {
        if (c.layers[static_cast<std::size_t>(l)].switches(k, j) != 0.0) pending.emplace_back(j, k);
      }
    }

    while (!pending.empty()) {
      // Greedily fill one batch with entries whose paths are fully disjoint:
      // no shared memristor in any layer and no shared source column, so the
      // member chains evolve independently and may run simultaneously.
      std::vector<std::pair<std::pair<int, int>, Path>> batch;
      std::set<std::pair<int, std::pair<int, int>>> used_cells;
      std::set<int> used_sources;
      std::vector<std::pair<int, int>> rest;
      for (const auto& [j, k] : pending) {
        const Path path = make_path(c, l, k, j, PathPolicy::Spread);
        bool clash = used_sources.count(path.indices.front()) != 0;
        for (int s = 0; !clash && s <= path.target_layer; ++s) {
          clash = used_cells.count({s,
                                    {path.indices[static_cast<std::size_t>(s) + 1],
                                     path.indices[static_cast<std::size_t>(s)]}}) != 0;
        }
        if (clash) {
          rest.emplace_back(j, k);
          continue;
        }
        used_sources.insert(path.indices.front());
        for (int s = 0; s <= path.target_layer; ++s) {
          used_cells.insert({s,
                             {path.indices[static_cast<std::size_t>(s) + 1],
                              path.indices[static_cast<std::size_t>(s)]}});
        }
        batch.emplace_back(std::make_pair(j, k), path);
      }

      double batch_duration = 0.0;
      for (const auto& [jk, path] : batch) {
        WriteEntry entry =
            write_one(c, l, jk.second, jk.first, targets[static_cast<std::size_t>(l)](jk.second, jk.first),
                      layer_params, options, nullptr, &path);
        report.all_converged = report.all_converged && entry.converged;
        batch_duration = std::max(batch_duration, entry.duration);
        report.entries.push_back(std::move(entry));
      }
      report.total_time += batch_duration;
      pending = std::move(rest);
    }
  }
  return report;
}

ChainBoundsReport check_chain_bounds(const Trace& trace, const Path& path,
                                     const DeviceModel& device, const Activation& activation) {
  if (trace.potentials.size() != trace.times.size()) {
    throw std::invalid_argument("check_chain_bounds: trace must record potentials");
  }
  ChainBoundsReport report;
  const double growth_base = activation.lipschitz * device.max_memductance;
  const double rel = 1e-9, abs_tol = 1e-15;

  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    std::vector<double> f(static_cast<std::size_t>(path.target_layer) + 1);
    for (int k = 0; k <= path.target_layer; ++k) {
      f[static_cast<std::size_t>(k)] =
          trace.potentials[i][static_cast<std::size_t>(k)][path.indices[static_cast<std::size_t>(k)]];
    }
    ++report.samples;
    const double source = f.front();
    double cap = std::abs(source);
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (std::abs(source) < 1e-15) {
        if (std::abs(f[k]) > 1e-12) ++report.sign_violations;
      } else if (f[k] * source < 0.0) {
        ++report.sign_violations;
      }
      if (std::abs(f[k]) > cap * (1.0 + rel) + abs_tol) ++report.growth_violations;
      if (k + 1 < f.size()) {
        const double floor =
            activation.fn(device.min_memductance * std::abs(f[k]));
        if (std::abs(f[k + 1]) < floor * (1.0 - rel) - abs_tol) ++report.lower_violations;
      }
      cap *= growth_base;
    }
  }
  return report;
}

}  // namespace xbarsim
