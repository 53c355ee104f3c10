#include "xbarsim/config.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "xbarsim/ingest.hpp"
#include "xbarsim/util.hpp"

namespace xbarsim {

using nlohmann::json;

std::string RunConfig::hash() const { return fnv1a_hex(doc.dump()); }

std::optional<double> RunConfig::gain() const {
  if (!doc.contains("alpha") || doc["alpha"].is_null()) return std::nullopt;
  if (doc["alpha"].is_string()) {
    if (doc["alpha"] == "auto") return std::nullopt;
    throw std::invalid_argument("config: alpha must be a number or \"auto\"");
  }
  return doc["alpha"].get<double>();
}

json RunConfig::params() const {
  json p;
  p["tau"] = tau();
  p["eps"] = eps();
  p["T"] = interval();
  p["x0"] = probe_voltage();
  p["step"] = step();
  p["seed"] = seed();
  p["limit"] = limit();
  p["alpha"] = gain() ? json(*gain()) : json("auto");
  return p;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  RunConfig cfg;
  cfg.doc = json::parse(in);
  if (cfg.doc.contains("out")) cfg.out_dir = cfg.doc["out"].get<std::string>();
  return cfg;
}

namespace {

std::vector<std::pair<double, double>> read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open device curve " + path);
  std::vector<std::pair<double, double>> points;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b)) continue;
    try {
      points.emplace_back(std::stod(a), std::stod(b));
    } catch (const std::exception&) {
      // header or stray text row
    }
  }
  if (points.size() < 2) throw std::runtime_error("config: device curve needs >= 2 rows");
  return points;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw std::invalid_argument("config: expected a matrix");
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index k = 0; k < nr; ++k) {
    const auto& row = rows[static_cast<std::size_t>(k)];
    if (static_cast<Eigen::Index>(row.size()) != nc) {
      throw std::invalid_argument("config: ragged matrix rows");
    }
    for (Eigen::Index j = 0; j < nc; ++j) m(k, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

}  // namespace

DeviceModel device_from_config(const json& spec) {
  if (spec.is_string()) {
    if (spec == "arctan") return arctan_device();
    throw std::invalid_argument("config: unknown device \"" + spec.get<std::string>() + "\"");
  }
  if (!spec.is_object()) throw std::invalid_argument("config: device must be a name or object");
  if (spec.contains("csv")) {
    auto points = read_curve_csv(spec["csv"].get<std::string>());
    std::vector<double> phi, w;
    for (auto& [x, y] : points) {
      phi.push_back(x);
      w.push_back(y);
    }
    return tabulated_device(std::move(phi), std::move(w), spec.at("min_memductance").get<double>(),
                            spec.at("max_memductance").get<double>(),
                            spec.at("lipschitz").get<double>(),
                            spec.value("monotone_increasing", true),
                            spec.value("name", std::string("tabulated")));
  }
  return device_from_config(spec.at("name"));
}

Activation activation_from_config(const json& spec) {
  Activation act;
  if (spec.is_string()) {
    act = activation_by_name(spec.get<std::string>());
  } else if (spec.is_object()) {
    act = activation_by_name(spec.at("name").get<std::string>());
    if (spec.contains("eta")) act.lipschitz = spec["eta"].get<double>();
  } else {
    throw std::invalid_argument("config: activation must be a name or object");
  }
  return act;
}

CircuitState circuit_from_config(const RunConfig& cfg) {
  json circuit;
  if (cfg.doc.contains("circuit")) {
    circuit = cfg.doc["circuit"];
  } else if (cfg.doc.contains("circuit_config")) {
    std::ifstream in(cfg.doc["circuit_config"].get<std::string>());
    if (!in) throw std::runtime_error("config: cannot open circuit_config");
    circuit = json::parse(in);
  } else {
    throw std::invalid_argument("config: need \"circuit\" or \"circuit_config\"");
  }

  DeviceModel device = device_from_config(circuit.value("device", json("arctan")));
  Activation activation = activation_from_config(circuit.value("activation", json("tanh")));

  {
    auto report = validate_activation(activation, -8.0, 8.0, 200);
    if (!report.ok()) {
      throw std::invalid_argument("config: activation \"" + activation.name +
                                  "\" fails validation: " + report.summary());
    }
  }

  const Mode mode = circuit.value("mode", std::string("single")) == "differential"
                        ? Mode::Differential
                        : Mode::Single;
  auto widths = circuit.at("widths").get<std::vector<int>>();
  CircuitState c = make_circuit(std::move(widths), std::move(device), std::move(activation), mode);

  if (circuit.contains("initial_flux")) {
    const json& init = circuit["initial_flux"];
    if (init.is_number()) {
      for (auto& layer : c.layers) layer.flux.setConstant(init.get<double>());
    } else if (init.is_array()) {
      if (init.size() != c.layers.size()) {
        throw std::invalid_argument("config: initial_flux needs one matrix per layer");
      }
      for (std::size_t l = 0; l < c.layers.size(); ++l) {
        Eigen::MatrixXd m = matrix_from_json(init[l]);
        if (m.rows() != c.layers[l].flux.rows() || m.cols() != c.layers[l].flux.cols()) {
          throw std::invalid_argument("config: initial_flux matrix " + std::to_string(l) +
                                      " has wrong shape");
        }
        c.layers[l].flux = std::move(m);
      }
    } else if (init.is_object() && init.contains("from_weights")) {
      AnnSpec spec = load_weights(init["from_weights"].get<std::string>(), c.activation);
      set_flux_from_weights(c, spec.weights);
    } else if (init.is_object() && init.contains("random")) {
      const double lo = init["random"].value("lo", -3.0);
      const double hi = init["random"].value("hi", 3.0);
      std::mt19937_64 rng(cfg.seed());
      std::uniform_real_distribution<double> unif(lo, hi);
      for (auto& layer : c.layers) {
        for (Eigen::Index j = 0; j < layer.flux.cols(); ++j) {
          for (Eigen::Index k = 0; k < layer.flux.rows(); ++k) layer.flux(k, j) = unif(rng);
        }
      }
    } else {
      throw std::invalid_argument("config: unsupported initial_flux form");
    }
  }

  if (circuit.contains("switches")) {
    const json& sw = circuit["switches"];
    if (sw.is_string()) {
      if (sw == "all_on") {
        for (auto& layer : c.layers) layer.switches.setOnes();
      } else if (sw == "all_off") {
        for (auto& layer : c.layers) layer.switches.setZero();
      } else {
        throw std::invalid_argument("config: switches must be all_on, all_off, or matrices");
      }
    } else if (sw.is_array()) {
      if (sw.size() != c.layers.size()) {
        throw std::invalid_argument("config: switches need one matrix per layer");
      }
      for (std::size_t l = 0; l < c.layers.size(); ++l) {
        set_switches(c, static_cast<int>(l), matrix_from_json(sw[l]));
      }
    }
  }

  c.validate();
  return c;
}

std::vector<Eigen::MatrixXd> weights_from_config(const RunConfig& cfg, const std::string& key) {
  if (!cfg.doc.contains(key)) throw std::invalid_argument("config: missing \"" + key + "\"");
  const json& spec = cfg.doc[key];
  if (spec.is_string()) {
    return load_weights(spec.get<std::string>(), tanh_activation()).weights;
  }
  if (spec.is_array()) {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& layer : spec) out.push_back(matrix_from_json(layer));
    return out;
  }
  throw std::invalid_argument("config: \"" + key + "\" must be a path or per-layer matrices");
}

}  // namespace xbarsim
