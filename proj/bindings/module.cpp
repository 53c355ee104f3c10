#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "xbarsim/commands.hpp"
#include "xbarsim/ingest.hpp"
#include "xbarsim/oracle.hpp"
#include "xbarsim/protocols.hpp"

namespace py = pybind11;
using namespace xbarsim;

PYBIND11_MODULE(_xbarsim, m) {
  m.doc() = "Simulator for neural networks built from memristive crossbar arrays: "
            "non-invasive inference, memductance reading, and closed-loop writing.";

  // --- device ---------------------------------------------------------------
  py::class_<DeviceModel>(m, "DeviceModel")
      .def_readonly("name", &DeviceModel::name)
      .def_readonly("min_memductance", &DeviceModel::min_memductance)
      .def_readonly("max_memductance", &DeviceModel::max_memductance)
      .def_readonly("lipschitz", &DeviceModel::lipschitz)
      .def_readonly("monotone_increasing", &DeviceModel::monotone_increasing)
      .def("memductance", [](const DeviceModel& d, double phi) { return memductance(d, phi); },
           py::arg("flux"))
      .def("charge", [](const DeviceModel& d, double phi) { return charge(d, phi); },
           py::arg("flux"));

  m.def("arctan_device", &arctan_device);
  m.def("tabulated_device", &tabulated_device, py::arg("flux_knots"), py::arg("memductance_knots"),
        py::arg("min_memductance"), py::arg("max_memductance"), py::arg("lipschitz"),
        py::arg("monotone_increasing") = true, py::arg("name") = "tabulated");
  m.def("invert_memductance", &invert_memductance, py::arg("device"), py::arg("target"),
        py::arg("tol") = 1e-12);
  m.def("memductance_matrix", &memductance_matrix, py::arg("device"), py::arg("flux"));

  py::class_<Violation>(m, "Violation")
      .def_readonly("kind", &Violation::kind)
      .def_readonly("x", &Violation::x)
      .def_readonly("y", &Violation::y)
      .def_readonly("value", &Violation::value)
      .def_readonly("bound", &Violation::bound);
  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("samples", &ValidationReport::samples)
      .def_readonly("violations", &ValidationReport::violations)
      .def("ok", &ValidationReport::ok)
      .def("summary", &ValidationReport::summary);
  m.def("validate_device", &validate_device, py::arg("device"), py::arg("lo"), py::arg("hi"),
        py::arg("n_samples"));

  // --- activation -----------------------------------------------------------
  py::class_<Activation>(m, "Activation")
      .def_readonly("name", &Activation::name)
      .def_readwrite("lipschitz", &Activation::lipschitz)
      .def("__call__", [](const Activation& a, double x) { return apply(a, x); });
  m.def("tanh_activation", &tanh_activation);
  m.def("scaled_sigmoid_activation", &scaled_sigmoid_activation);
  m.def("activation_by_name", &activation_by_name, py::arg("name"));
  m.def("apply_vec", &apply_vec, py::arg("activation"), py::arg("x"));
  m.def("validate_activation", &validate_activation, py::arg("activation"), py::arg("lo"),
        py::arg("hi"), py::arg("n_samples"));

  // --- crossbar -------------------------------------------------------------
  py::class_<CrossbarState>(m, "CrossbarState")
      .def_readwrite("flux", &CrossbarState::flux)
      .def_readwrite("switches", &CrossbarState::switches)
      .def_property_readonly("rows", &CrossbarState::rows)
      .def_property_readonly("cols", &CrossbarState::cols);
  m.def("make_crossbar", &make_crossbar, py::arg("rows"), py::arg("cols"),
        py::arg("initial_flux") = 0.0);
  py::class_<CrossbarTerminals>(m, "CrossbarTerminals")
      .def_readonly("col_potentials", &CrossbarTerminals::col_potentials)
      .def_readonly("col_currents", &CrossbarTerminals::col_currents)
      .def_readonly("row_potentials", &CrossbarTerminals::row_potentials)
      .def_readonly("row_currents", &CrossbarTerminals::row_currents);
  m.def("flux_rhs", &flux_rhs, py::arg("state"), py::arg("col_potentials"));
  m.def("row_currents", &row_currents, py::arg("state"), py::arg("device"),
        py::arg("col_potentials"));
  m.def("terminal_currents", &terminal_currents, py::arg("state"), py::arg("device"),
        py::arg("col_potentials"));

  // --- circuit --------------------------------------------------------------
  py::enum_<Mode>(m, "Mode").value("SINGLE", Mode::Single).value("DIFFERENTIAL", Mode::Differential);

  py::class_<CircuitState>(m, "CircuitState")
      .def_readonly("widths", &CircuitState::widths)
      .def_readonly("device", &CircuitState::device)
      .def_readonly("activation", &CircuitState::activation)
      .def_readonly("mode", &CircuitState::mode)
      .def_property_readonly("depth", &CircuitState::depth)
      .def("layer_flux", [](const CircuitState& c, int l) { return c.layers.at(l).flux; })
      .def("layer_switches", [](const CircuitState& c, int l) { return c.layers.at(l).switches; })
      .def("set_layer_flux",
           [](CircuitState& c, int l, const Eigen::MatrixXd& flux) {
             if (flux.rows() != c.layers.at(l).flux.rows() ||
                 flux.cols() != c.layers.at(l).flux.cols()) {
               throw std::invalid_argument("set_layer_flux: wrong shape");
             }
             c.layers.at(l).flux = flux;
           });
  m.def("make_circuit", &make_circuit, py::arg("widths"), py::arg("device"), py::arg("activation"),
        py::arg("mode") = Mode::Single, py::arg("initial_flux") = 0.0);
  m.def("set_switches", &set_switches, py::arg("circuit"), py::arg("layer"), py::arg("switches"));
  m.def("set_flux_from_weights", &set_flux_from_weights, py::arg("circuit"), py::arg("weights"));

  py::class_<ForwardResult>(m, "ForwardResult")
      .def_readonly("potentials", &ForwardResult::potentials)
      .def_readonly("row_currents", &ForwardResult::row_currents)
      .def_readonly("neuron_inputs", &ForwardResult::neuron_inputs)
      .def_property_readonly("output", &ForwardResult::output);
  m.def("forward_potentials", &forward_potentials, py::arg("circuit"), py::arg("input"));

  py::class_<SplitWeight>(m, "SplitWeight")
      .def_readonly("positive", &SplitWeight::positive)
      .def_readonly("negative", &SplitWeight::negative)
      .def_readonly("positive_closed", &SplitWeight::positive_closed)
      .def_readonly("negative_closed", &SplitWeight::negative_closed)
      .def("value", &SplitWeight::value);
  m.def("split_weight", &split_weight, py::arg("target"), py::arg("device"));

  py::class_<TraceOptions>(m, "TraceOptions")
      .def(py::init<>())
      .def_readwrite("decimate", &TraceOptions::decimate)
      .def_readwrite("record_flux", &TraceOptions::record_flux)
      .def_readwrite("record_currents", &TraceOptions::record_currents);
  py::class_<IntegrationOptions>(m, "IntegrationOptions")
      .def(py::init<>())
      .def_readwrite("step", &IntegrationOptions::step)
      .def_readwrite("trace", &IntegrationOptions::trace);
  py::class_<Trace>(m, "Trace")
      .def(py::init<>())
      .def_readonly("times", &Trace::times)
      .def_readonly("outputs", &Trace::outputs)
      .def_readonly("flux", &Trace::flux)
      .def_readonly("potentials", &Trace::potentials)
      .def_readonly("row_currents", &Trace::row_currents)
      .def("potential_series", &Trace::potential_series, py::arg("layer"), py::arg("index"))
      .def("flux_series", &Trace::flux_series, py::arg("layer"), py::arg("row"), py::arg("col"))
      .def("__len__", &Trace::size);
  m.def(
      "integrate",
      [](CircuitState& c, const SegmentSignal& signal, const IntegrationOptions& options,
         Trace* sink) { integrate(c, signal, options, sink); },
      py::arg("circuit"), py::arg("signal"), py::arg("options") = IntegrationOptions{},
      py::arg("sink") = nullptr);
  m.def("snapshot_flux", &snapshot_flux, py::arg("circuit"));
  m.def("max_flux_deviation", &max_flux_deviation, py::arg("before"), py::arg("after"));

  // --- signals ----------------------------------------------------------------
  py::class_<SegmentSignal>(m, "SegmentSignal")
      .def(py::init<>())
      .def_readwrite("breakpoints", &SegmentSignal::breakpoints)
      .def_readwrite("values", &SegmentSignal::values)
      .def_static("constant", &SegmentSignal::constant, py::arg("t0"), py::arg("t1"),
                  py::arg("value"))
      .def("value_at", &SegmentSignal::value_at, py::arg("t"));
  m.def("block_value", &block_value, py::arg("tau"), py::arg("t"));
  m.def("encode", &encode, py::arg("amplitudes"), py::arg("tau"));
  m.def("decode", &decode, py::arg("trace"), py::arg("tau"));
  py::enum_<Parity>(m, "Parity").value("ODD", Parity::Odd).value("EVEN", Parity::Even);
  m.def("check_parity", &check_parity, py::arg("times"), py::arg("values"), py::arg("a"),
        py::arg("b"), py::arg("parity"));

  // --- protocols --------------------------------------------------------------
  py::class_<Path>(m, "Path")
      .def(py::init<>())
      .def_readwrite("indices", &Path::indices)
      .def_readwrite("target_layer", &Path::target_layer)
      .def("row", &Path::row)
      .def("col", &Path::col);
  py::enum_<PathPolicy>(m, "PathPolicy")
      .value("FIRST_INDEX", PathPolicy::FirstIndex)
      .value("SPREAD", PathPolicy::Spread);
  m.def("make_path", &make_path, py::arg("circuit"), py::arg("layer"), py::arg("row"),
        py::arg("col"), py::arg("policy") = PathPolicy::FirstIndex);
  m.def("path_switches", &path_switches, py::arg("circuit"), py::arg("path"));
  m.def("apply_path_switches", &apply_path_switches, py::arg("circuit"), py::arg("path"));

  py::class_<InferResult>(m, "InferResult")
      .def_readonly("output", &InferResult::output)
      .def_readonly("trace", &InferResult::trace)
      .def_readonly("flux_deviation", &InferResult::flux_deviation);
  m.def("infer", &infer, py::arg("circuit"), py::arg("input"), py::arg("tau"),
        py::arg("options") = IntegrationOptions{});

  m.def(
      "read_one",
      [](CircuitState& c, int layer, int row, int col, double tau,
         const IntegrationOptions& options) { return read_one(c, layer, row, col, tau, options); },
      py::arg("circuit"), py::arg("layer"), py::arg("row"), py::arg("col"), py::arg("tau"),
      py::arg("options") = IntegrationOptions{});

  py::class_<ReadEntry>(m, "ReadEntry")
      .def_readonly("layer", &ReadEntry::layer)
      .def_readonly("row", &ReadEntry::row)
      .def_readonly("col", &ReadEntry::col)
      .def_readonly("memductance", &ReadEntry::memductance)
      .def_readonly("path", &ReadEntry::path);
  py::class_<ReadReport>(m, "ReadReport")
      .def_readonly("memductance", &ReadReport::memductance)
      .def_readonly("entries", &ReadReport::entries)
      .def_readonly("applications", &ReadReport::applications)
      .def_readonly("tau", &ReadReport::tau)
      .def("elapsed_time", &ReadReport::elapsed_time);
  m.def("read_all", &read_all, py::arg("circuit"), py::arg("tau"),
        py::arg("options") = IntegrationOptions{});
  m.def("read_all_batched", &read_all_batched, py::arg("circuit"), py::arg("tau"),
        py::arg("options") = IntegrationOptions{});

  m.def("gain_for_layer", &gain_for_layer, py::arg("device"), py::arg("activation"),
        py::arg("layer"), py::arg("interval"));
  m.def("uniform_gain", &uniform_gain, py::arg("device"), py::arg("activation"),
        py::arg("num_layers"), py::arg("interval"));

  py::class_<WriteParams>(m, "WriteParams")
      .def(py::init<>())
      .def_readwrite("eps", &WriteParams::eps)
      .def_readwrite("interval", &WriteParams::interval)
      .def_readwrite("probe_voltage", &WriteParams::probe_voltage)
      .def_readwrite("gain", &WriteParams::gain)
      .def_readwrite("max_iterations", &WriteParams::max_iterations);
  py::class_<WriteEntry>(m, "WriteEntry")
      .def_readonly("layer", &WriteEntry::layer)
      .def_readonly("row", &WriteEntry::row)
      .def_readonly("col", &WriteEntry::col)
      .def_readonly("target", &WriteEntry::target)
      .def_readonly("iterations", &WriteEntry::iterations)
      .def_readonly("final_memductance", &WriteEntry::final_memductance)
      .def_readonly("final_error", &WriteEntry::final_error)
      .def_readonly("duration", &WriteEntry::duration)
      .def_readonly("converged", &WriteEntry::converged)
      .def_readonly("lyapunov", &WriteEntry::lyapunov)
      .def_readonly("memductance_curve", &WriteEntry::memductance_curve)
      .def_readonly("path", &WriteEntry::path);
  py::class_<WriteReport>(m, "WriteReport")
      .def_readonly("entries", &WriteReport::entries)
      .def_readonly("total_time", &WriteReport::total_time)
      .def_readonly("interval", &WriteReport::interval)
      .def_readonly("all_converged", &WriteReport::all_converged);
  m.def(
      "write_one",
      [](CircuitState& c, int layer, int row, int col, double target, const WriteParams& params,
         const IntegrationOptions& options) {
        return write_one(c, layer, row, col, target, params, options);
      },
      py::arg("circuit"), py::arg("layer"), py::arg("row"), py::arg("col"), py::arg("target"),
      py::arg("params") = WriteParams{}, py::arg("options") = IntegrationOptions{});
  m.def("write_all", &write_all, py::arg("circuit"), py::arg("targets"),
        py::arg("params") = WriteParams{}, py::arg("options") = IntegrationOptions{},
        py::arg("policy") = PathPolicy::FirstIndex);
  m.def("write_all_batched", &write_all_batched, py::arg("circuit"), py::arg("targets"),
        py::arg("params") = WriteParams{}, py::arg("options") = IntegrationOptions{});

  py::class_<ChainBoundsReport>(m, "ChainBoundsReport")
      .def_readonly("samples", &ChainBoundsReport::samples)
      .def_readonly("sign_violations", &ChainBoundsReport::sign_violations)
      .def_readonly("growth_violations", &ChainBoundsReport::growth_violations)
      .def_readonly("lower_violations", &ChainBoundsReport::lower_violations)
      .def("ok", &ChainBoundsReport::ok);
  m.def("check_chain_bounds", &check_chain_bounds, py::arg("trace"), py::arg("path"),
        py::arg("device"), py::arg("activation"));

  // --- oracle -----------------------------------------------------------------
  py::class_<AnnSpec>(m, "AnnSpec")
      .def(py::init<>())
      .def(py::init([](std::vector<int> widths, std::vector<Eigen::MatrixXd> weights,
                       Activation act) {
             AnnSpec s{std::move(widths), std::move(weights), std::move(act)};
             s.validate();
             return s;
           }),
           py::arg("widths"), py::arg("weights"), py::arg("activation"))
      .def_readwrite("widths", &AnnSpec::widths)
      .def_readwrite("weights", &AnnSpec::weights)
      .def_readwrite("activation", &AnnSpec::activation);
  m.def("ann_forward", &ann_forward, py::arg("spec"), py::arg("input"));
  m.def("chain_integrate_reference", &chain_integrate_reference, py::arg("device"),
        py::arg("activation"), py::arg("initial_flux"), py::arg("source"), py::arg("duration"),
        py::arg("tol") = 1e-12);
  py::class_<FixedPointResult>(m, "FixedPointResult")
      .def_readonly("flux", &FixedPointResult::flux)
      .def_readonly("memductance", &FixedPointResult::memductance)
      .def_readonly("iterations", &FixedPointResult::iterations)
      .def_readonly("converged", &FixedPointResult::converged);
  m.def("write_fixed_point", &write_fixed_point, py::arg("device"), py::arg("target_memductance"),
        py::arg("initial_flux"), py::arg("gain"), py::arg("interval"), py::arg("eps"),
        py::arg("probe_voltage"), py::arg("max_iterations") = 1000000);

  // --- ingest -----------------------------------------------------------------
  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("images", &Dataset::images)
      .def_readwrite("labels", &Dataset::labels)
      .def("__len__", &Dataset::size);
  m.def("load_weights", &load_weights, py::arg("path"), py::arg("activation"));
  m.def("save_weights", &save_weights, py::arg("path"), py::arg("spec"));
  m.def("load_idx", &load_idx, py::arg("images_path"), py::arg("labels_path"),
        py::arg("limit") = -1);
  m.def("save_idx", &save_idx, py::arg("images_path"), py::arg("labels_path"), py::arg("data"));
  py::class_<RealizabilityIssue>(m, "RealizabilityIssue")
      .def_readonly("layer", &RealizabilityIssue::layer)
      .def_readonly("row", &RealizabilityIssue::row)
      .def_readonly("col", &RealizabilityIssue::col)
      .def_readonly("value", &RealizabilityIssue::value);
  py::class_<RealizabilityReport>(m, "RealizabilityReport")
      .def_readonly("checked", &RealizabilityReport::checked)
      .def_readonly("violators", &RealizabilityReport::violators)
      .def("all_representable", &RealizabilityReport::all_representable);
  m.def("weights_realizability", &weights_realizability, py::arg("spec"), py::arg("device"),
        py::arg("mode"));
  m.def("random_weights", &random_weights, py::arg("widths"), py::arg("device"), py::arg("mode"),
        py::arg("seed"), py::arg("activation"));
  m.def("random_dataset", &random_dataset, py::arg("count"), py::arg("pixels"), py::arg("seed"));

#ifdef XBARSIM_VERSION
  m.attr("__version__") = XBARSIM_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
