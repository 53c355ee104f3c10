#include "xbarsim/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "xbarsim/ingest.hpp"
#include "xbarsim/protocols.hpp"
#include "xbarsim/util.hpp"

namespace xbarsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_report(const RunConfig& cfg) {
  json doc;
  doc["config_hash"] = cfg.hash();
  doc["params"] = cfg.params();
  return doc;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& doc) {
  fs::create_directories(cfg.out_dir);
  std::ofstream out(fs::path(cfg.out_dir) / name);
  if (!out) throw std::runtime_error("cannot write " + name);
  out << doc.dump(2) << "\n";
}

std::ofstream open_csv(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  std::ofstream out(fs::path(cfg.out_dir) / name);
  if (!out) throw std::runtime_error("cannot write " + name);
  out << "# config_hash=" << cfg.hash() << " params=" << cfg.params().dump() << "\n";
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(k, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd input_from_config(const RunConfig& cfg, int width) {
  if (!cfg.doc.contains("input")) throw std::invalid_argument("config: missing \"input\"");
  const json& in = cfg.doc["input"];
  if (in.is_array()) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(in.size()));
    for (std::size_t i = 0; i < in.size(); ++i) u[static_cast<Eigen::Index>(i)] = in[i].get<double>();
    return u;
  }
  if (in.is_object() && in.contains("random")) {
    const double lo = in["random"].value("lo", -1.0);
    const double hi = in["random"].value("hi", 1.0);
    std::mt19937_64 rng(cfg.seed() + 1);
    std::uniform_real_distribution<double> unif(lo, hi);
    Eigen::VectorXd u(width);
    for (int i = 0; i < width; ++i) u[i] = unif(rng);
    return u;
  }
  throw std::invalid_argument("config: \"input\" must be an array or {\"random\": ...}");
}

IntegrationOptions integration_options(const RunConfig& cfg) {
  IntegrationOptions opts;
  opts.step = cfg.step();
  opts.trace.decimate = cfg.trace_decimate();
  return opts;
}

int argmax(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

int cmd_infer(const RunConfig& cfg) {
  CircuitState c = circuit_from_config(cfg);
  const Eigen::VectorXd input = input_from_config(cfg, c.widths.front());

  const auto before = snapshot_flux(c);
  InferResult result = infer(c, input, cfg.tau(), integration_options(cfg));

  json yhat = base_report(cfg);
  yhat["input"] = vector_to_json(input);
  yhat["yhat"] = vector_to_json(result.output);
  write_json(cfg, "yhat.json", yhat);

  {
    auto csv = open_csv(cfg, "trace.csv");
    result.trace.write_csv(csv);
  }
  {
    auto csv = open_csv(cfg, "signal.csv");
    const SegmentSignal sig = encode(input, cfg.tau());
    csv << "time";
    for (Eigen::Index i = 0; i < input.size(); ++i) csv << ",u[" << i << "]";
    csv << "\n";
    for (double t : result.trace.times) {
      csv << format_double(t);
      const Eigen::VectorXd& v = sig.value_at(t);
      for (Eigen::Index i = 0; i < v.size(); ++i) csv << "," << format_double(v[i]);
      csv << "\n";
    }
  }

  json noninv = base_report(cfg);
  noninv["max_flux_deviation"] = result.flux_deviation;
  json per_layer = json::array();
  const auto after = snapshot_flux(c);
  for (std::size_t l = 0; l < before.size(); ++l) {
    per_layer.push_back((before[l] - after[l]).cwiseAbs().maxCoeff());
  }
  noninv["per_layer"] = std::move(per_layer);
  write_json(cfg, "noninvasiveness.json", noninv);
  return 0;
}

int cmd_read(const RunConfig& cfg) {
  CircuitState c = circuit_from_config(cfg);
  const ReadReport report = cfg.batched() ? read_all_batched(c, cfg.tau(), integration_options(cfg))
                                          : read_all(c, cfg.tau(), integration_options(cfg));

  json doc = base_report(cfg);
  doc["tau"] = report.tau;
  doc["applications"] = report.applications;
  doc["elapsed_time"] = report.elapsed_time();
  doc["batched"] = cfg.batched();
  json mats = json::array();
  for (const auto& m : report.memductance) mats.push_back(matrix_to_json(m));
  doc["memductance"] = std::move(mats);
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"layer", e.layer},
                       {"row", e.row},
                       {"col", e.col},
                       {"memductance", e.memductance},
                       {"path", e.path}});
  }
  doc["entries"] = std::move(entries);
  write_json(cfg, "read_report.json", doc);
  return 0;
}

int cmd_write(const RunConfig& cfg) {
  CircuitState c = circuit_from_config(cfg);
  std::vector<Eigen::MatrixXd> weights = weights_from_config(cfg, "targets");

  // Signed weights map one-to-one in single mode; in differential mode each
  // is split across the paired rows and the switch pattern (including
  // open-partner fallbacks) is applied before writing.
  std::vector<Eigen::MatrixXd> targets;
  if (c.mode == Mode::Single) {
    targets = weights;
  } else {
    for (int l = 0; l < c.depth(); ++l) {
      const Eigen::MatrixXd& w = weights[static_cast<std::size_t>(l)];
      const Eigen::Index n = c.widths[static_cast<std::size_t>(l) + 1];
      if (w.rows() != n || w.cols() != c.layer_cols(l)) {
        throw std::invalid_argument("write: target matrix " + std::to_string(l) +
                                    " has wrong shape");
      }
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(c.layer_rows(l), c.layer_cols(l));
      Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(c.layer_rows(l), c.layer_cols(l));
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
          const SplitWeight s = split_weight(w(k, j), c.device);
          t(k, j) = s.positive;
          t(k + n, j) = s.negative;
          sw(k, j) = s.positive_closed ? 1.0 : 0.0;
          sw(k + n, j) = s.negative_closed ? 1.0 : 0.0;
        }
      }
      set_switches(c, l, sw);
      targets.push_back(std::move(t));
    }
  }

  WriteParams params;
  params.eps = cfg.eps();
  params.interval = cfg.interval();
  params.probe_voltage = cfg.probe_voltage();
  params.gain = cfg.gain();

  const WriteReport report =
      cfg.batched() ? write_all_batched(c, targets, params, integration_options(cfg))
                    : write_all(c, targets, params, integration_options(cfg));

  json doc = base_report(cfg);
  doc["interval"] = report.interval;
  doc["total_time"] = report.total_time;
  doc["all_converged"] = report.all_converged;
  doc["batched"] = cfg.batched();
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"layer", e.layer},
                       {"row", e.row},
                       {"col", e.col},
                       {"target", e.target},
                       {"iterations", e.iterations},
                       {"final_memductance", e.final_memductance},
                       {"final_error", e.final_error},
                       {"duration", e.duration},
                       {"converged", e.converged},
                       {"lyapunov", e.lyapunov},
                       {"path", e.path}});
  }
  doc["entries"] = std::move(entries);
  write_json(cfg, "write_report.json", doc);

  {
    auto csv = open_csv(cfg, "memductance_curves.csv");
    csv << "protocol_time,layer,row,col,memductance\n";
    double offset = 0.0;
    for (const auto& e : report.entries) {
      for (std::size_t i = 0; i < e.memductance_curve.size(); ++i) {
        csv << format_double(offset + static_cast<double>(i) * report.interval) << "," << e.layer
            << "," << e.row << "," << e.col << "," << format_double(e.memductance_curve[i])
            << "\n";
      }
      offset += e.duration;
    }
  }
  return report.all_converged ? 0 : 1;
}

int cmd_mnist(const RunConfig& cfg) {
  const auto widths = cfg.doc.value("widths", std::vector<int>{784, 10, 10});
  Activation act = activation_from_config(cfg.doc.value("activation", json("scaled_sigmoid")));
  const Mode mode = cfg.doc.value("mode", std::string("differential")) == "single"
                        ? Mode::Single
                        : Mode::Differential;
  DeviceModel device = device_from_config(cfg.doc.value("device", json("arctan")));

  AnnSpec spec;
  if (cfg.doc.contains("weights")) {
    spec = load_weights(cfg.doc["weights"].get<std::string>(), act);
  } else {
    spec = random_weights(widths, device, mode, cfg.seed(), act);
  }

  const auto realizability = weights_realizability(spec, device, mode);
  if (!realizability.all_representable()) {
    std::cerr << "mnist: " << realizability.violators.size()
              << " weight(s) are not realizable by the device in this mode\n";
    return 1;
  }

  Dataset data;
  if (cfg.doc.contains("images") && cfg.doc.contains("labels")) {
    data = load_idx(cfg.doc["images"].get<std::string>(), cfg.doc["labels"].get<std::string>(),
                    cfg.limit());
  } else if (cfg.doc.contains("synthetic_images")) {
    int count = cfg.doc["synthetic_images"].get<int>();
    if (cfg.limit() >= 0) count = std::min<long>(count, cfg.limit());
    data = random_dataset(count, spec.widths.front(), cfg.seed() + 2);
  } else {
    throw std::invalid_argument("config: mnist needs images/labels paths or synthetic_images");
  }

  CircuitState c = make_circuit(spec.widths, device, act, mode);
  set_flux_from_weights(c, spec.weights);

  json doc = base_report(cfg);
  doc["images"] = data.size();
  doc["pixel_scale"] = "1/255";
  json per_image = json::array();
  long agree = 0, circuit_correct = 0, oracle_correct = 0;
  const IntegrationOptions opts = integration_options(cfg);

  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd oracle_out = ann_forward(spec, data.images[i]);
    InferResult r = infer(c, data.images[i], cfg.tau(), opts);
    const int ca = argmax(r.output), oa = argmax(oracle_out);
    agree += ca == oa;
    circuit_correct += ca == data.labels[i];
    oracle_correct += oa == data.labels[i];
    per_image.push_back({{"index", i},
                         {"label", data.labels[i]},
                         {"circuit_argmax", ca},
                         {"oracle_argmax", oa},
                         {"agree", ca == oa},
                         {"flux_deviation", r.flux_deviation}});
    if (i == 0) {
      doc["first_image"] = {
          {"circuit_output", vector_to_json(r.output)},
          {"oracle_output", vector_to_json(oracle_out)},
          {"max_abs_diff", (r.output - oracle_out).cwiseAbs().maxCoeff()},
      };
    }
  }
  doc["per_image"] = std::move(per_image);
  doc["argmax_agreement"] = agree;
  if (!data.images.empty()) {
    const double n = static_cast<double>(data.size());
    doc["agreement_rate"] = static_cast<double>(agree) / n;
    doc["circuit_accuracy"] = static_cast<double>(circuit_correct) / n;
    doc["oracle_accuracy"] = static_cast<double>(oracle_correct) / n;
  }
  write_json(cfg, "mnist_report.json", doc);
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  json doc = base_report(cfg);
  json checks = json::array();
  bool ok = true;
  auto record = [&](const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({{"name", name}, {"ok", pass}, {"detail", detail}});
    ok = ok && pass;
  };

  const DeviceModel device =
      device_from_config(cfg.doc.value("device", json("arctan")));
  {
    const auto r = validate_device(device, -10.0, 10.0, 1000);
    record("device_assumptions", r.ok(), r.summary());
  }
  {
    Activation act = activation_from_config(cfg.doc.value("activation", json("tanh")));
    const auto r = validate_activation(act, -8.0, 8.0, 1000);
    record("activation_assumptions[" + act.name + "]", r.ok(), r.summary());
  }
  {
    const auto r = validate_activation(scaled_sigmoid_activation(), -8.0, 8.0, 1000);
    record("activation_assumptions[scaled_sigmoid]", r.ok(), r.summary());
  }
  {
    // Forward equivalence against the software network at frozen fluxes.
    std::mt19937_64 rng(cfg.seed() + 3);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const std::vector<int> widths = {2, 3, 2};
      AnnSpec spec = random_weights(widths, device, Mode::Differential, rng(), tanh_activation());
      CircuitState c = make_circuit(widths, device, tanh_activation(), Mode::Differential);
      set_flux_from_weights(c, spec.weights);
      Eigen::VectorXd u(2);
      u << unif(rng), unif(rng);
      worst = std::max(
          worst,
          (forward_potentials(c, u).output() - ann_forward(spec, u)).cwiseAbs().maxCoeff());
    }
    record("forward_matches_software_network", worst <= 1e-12,
           "max deviation " + format_double(worst));
  }
  {
    // Reference chain integrator: halving the tolerance barely moves it.
    Eigen::VectorXd phi0(3);
    phi0 << 0.3, -0.2, 0.1;
    const Eigen::VectorXd a =
        chain_integrate_reference(device, tanh_activation(), phi0, 1.0, 1.0, 1e-10);
    const Eigen::VectorXd b =
        chain_integrate_reference(device, tanh_activation(), phi0, 1.0, 1.0, 5e-11);
    const double diff = (a - b).cwiseAbs().maxCoeff();
    record("reference_integrator_converged", diff < 1e-10, "tolerance-halving shift " +
                                                               format_double(diff));
  }
  {
    // Gain admissibility must be enforced before a write starts.
    CircuitState c = make_circuit({1, 1}, device, tanh_activation());
    WriteParams params;
    params.interval = cfg.doc.value("inject_T", 1.0);
    params.gain = cfg.doc.value("inject_alpha", 2.0 / device.lipschitz);
    bool rejected = false;
    try {
      write_one(c, 0, 0, 0, 2.5, params);
    } catch (const std::invalid_argument&) {
      rejected = true;
    }
    const double bound = 1.0 / device.lipschitz;
    const bool expected_reject = *params.gain * params.interval > bound * (1.0 + 1e-12);
    record("gain_condition_enforced", rejected == expected_reject,
           rejected ? "inadmissible gain rejected" : "gain accepted");
  }
  {
    // Non-invasive evaluation and exact reading on a small random circuit.
    CircuitState c = make_circuit({2, 2, 2}, device, tanh_activation());
    std::mt19937_64 rng(cfg.seed() + 4);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (auto& layer : c.layers) {
      for (Eigen::Index j = 0; j < layer.flux.cols(); ++j) {
        for (Eigen::Index k = 0; k < layer.flux.rows(); ++k) layer.flux(k, j) = unif(rng);
      }
    }
    const auto before = snapshot_flux(c);
    Eigen::VectorXd u(2);
    u << unif(rng), unif(rng);
    IntegrationOptions opts;
    opts.step = cfg.tau() / 1000.0;
    InferResult r = infer(c, u, cfg.tau(), opts);
    record("inference_noninvasive", r.flux_deviation <= 1e-6,
           "max flux deviation " + format_double(r.flux_deviation));
    const ReadReport read = read_all(c, cfg.tau(), opts);
    double worst = 0.0;
    for (int l = 0; l < c.depth(); ++l) {
      worst = std::max(worst, (read.memductance[static_cast<std::size_t>(l)] -
                               memductance_matrix(device, before[static_cast<std::size_t>(l)]))
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    record("reading_exact", worst <= 1e-6, "max read error " + format_double(worst));
  }

  doc["checks"] = std::move(checks);
  doc["ok"] = ok;
  write_json(cfg, "verify_report.json", doc);
  return ok ? 0 : 1;
}

}  // namespace xbarsim
