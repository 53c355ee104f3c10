#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xbarsim/commands.hpp"

using namespace xbarsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct OutDir {
  fs::path path;
  explicit OutDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("xbarsim_cmd_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
  }
  ~OutDir() { fs::remove_all(path); }
  json read(const std::string& name) const {
    std::ifstream in(path / name);
    REQUIRE(in.good());
    return json::parse(in);
  }
  std::string slurp(const std::string& name) const {
    std::ifstream in(path / name);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }
};

RunConfig academic_infer_config(const std::string& out) {
  RunConfig cfg;
  cfg.doc = json::parse(R"({
    "circuit": {
      "widths": [2, 3, 2],
      "device": "arctan",
      "activation": "tanh",
      "mode": "single",
      "initial_flux": {"from_weights": "data/academic_weights.json"},
      "switches": "all_on"
    },
    "input": [-1, 1],
    "tau": 5,
    "step": 0.005
  })");
  cfg.out_dir = out;
  return cfg;
}

}  // namespace

TEST_CASE("cmd_infer writes the decoded output and a tiny flux deviation") {
  OutDir out("infer");
  RunConfig cfg = academic_infer_config(out.path.string());
  CHECK(cmd_infer(cfg) == 0);

  const json yhat = out.read("yhat.json");
  CHECK(yhat["config_hash"] == cfg.hash());
  const double y0 = yhat["yhat"][0].get<double>();
  const double y1 = yhat["yhat"][1].get<double>();
  // Close to the printed measurement of the worked example, and dead on the
  // exact network response.
  CHECK(std::abs(y0 - (-0.99377)) <= 5e-3);
  CHECK(std::abs(y1 - 0.99374) <= 5e-3);
  CHECK(y0 == doctest::Approx(-0.9949062016530742).epsilon(1e-6));

  const json noninv = out.read("noninvasiveness.json");
  CHECK(noninv["max_flux_deviation"].get<double>() <= 1e-6);

  const std::string trace = out.slurp("trace.csv");
  CHECK(trace.find("# config_hash=") == 0);
  CHECK(trace.find("time,phi[0][0][0]") != std::string::npos);
  const std::string signal = out.slurp("signal.csv");
  CHECK(signal.find("u[1]") != std::string::npos);
}

TEST_CASE("cmd_infer is byte-deterministic") {
  OutDir a("infer_a"), b("infer_b");
  RunConfig ca = academic_infer_config(a.path.string());
  RunConfig cb = academic_infer_config(b.path.string());
  CHECK(cmd_infer(ca) == 0);
  CHECK(cmd_infer(cb) == 0);
  CHECK(a.slurp("yhat.json") == b.slurp("yhat.json"));
  CHECK(a.slurp("trace.csv") == b.slurp("trace.csv"));
  CHECK(a.slurp("noninvasiveness.json") == b.slurp("noninvasiveness.json"));
}

TEST_CASE("cmd_infer with zero input reports zero output") {
  OutDir out("infer_zero");
  RunConfig cfg = academic_infer_config(out.path.string());
  cfg.doc["input"] = {0.0, 0.0};
  CHECK(cmd_infer(cfg) == 0);
  const json yhat = out.read("yhat.json");
  CHECK(yhat["yhat"][0].get<double>() == 0.0);
  CHECK(yhat["yhat"][1].get<double>() == 0.0);
}

TEST_CASE("cmd_read recovers the uniform initial state") {
  OutDir out("read");
  RunConfig cfg;
  cfg.doc = json::parse(R"({
    "circuit": {"widths": [2, 3, 2], "device": "arctan", "activation": "tanh",
                 "mode": "single", "initial_flux": 0.0, "switches": "all_on"},
    "tau": 5,
    "step": 0.005
  })");
  cfg.out_dir = out.path.string();
  CHECK(cmd_read(cfg) == 0);
  const json report = out.read("read_report.json");
  CHECK(report["applications"] == 12);
  CHECK(report["elapsed_time"].get<double>() == 240.0);
  for (const auto& layer : report["memductance"]) {
    for (const auto& row : layer) {
      for (const auto& v : row) CHECK(v.get<double>() == doctest::Approx(2.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("cmd_write steers the worked example and cmd_read confirms it") {
  OutDir out("write");
  RunConfig cfg;
  cfg.doc = json::parse(R"({
    "circuit": {"widths": [2, 3, 2], "device": "arctan", "activation": "tanh",
                 "mode": "single", "initial_flux": 0.0, "switches": "all_on"},
    "targets": "data/academic_weights.json",
    "eps": 0.05,
    "T": 1,
    "alpha": 0.2800495767557787,
    "x0": 1,
    "step": 0.001
  })");
  cfg.out_dir = out.path.string();
  CHECK(cmd_write(cfg) == 0);

  const json report = out.read("write_report.json");
  CHECK(report["all_converged"].get<bool>());
  double sum = 0.0;
  bool landing_checked = false;
  for (const auto& e : report["entries"]) {
    CHECK(e["final_error"].get<double>() <= 0.05);
    sum += e["duration"].get<double>();
    if (e["layer"] == 1 && e["row"] == 1 && e["col"] == 2) {
      const double final = e["final_memductance"].get<double>();
      CHECK(final > 0.5);
      CHECK(final <= 0.55 + 1e-9);
      landing_checked = true;
    }
  }
  CHECK(landing_checked);
  CHECK(report["total_time"].get<double>() == sum);

  const std::string curves = out.slurp("memductance_curves.csv");
  CHECK(curves.find("protocol_time,layer,row,col,memductance") != std::string::npos);
}

TEST_CASE("cmd_write rejects an unreachable single-mode target") {
  OutDir out("write_bad");
  RunConfig cfg;
  cfg.doc = json::parse(R"({
    "circuit": {"widths": [1, 1], "device": "arctan", "activation": "tanh",
                 "mode": "single", "initial_flux": 0.0},
    "targets": [[[4.0]]],
    "eps": 0.05
  })");
  cfg.out_dir = out.path.string();
  CHECK_THROWS_AS(cmd_write(cfg), std::domain_error);
}

TEST_CASE("cmd_mnist on a synthetic slice: circuit and oracle agree") {
  OutDir out("mnist");
  RunConfig cfg;
  cfg.doc = json::parse(R"({
    "widths": [16, 4, 4],
    "device": "arctan",
    "activation": "scaled_sigmoid",
    "mode": "differential",
    "synthetic_images": 5,
    "limit": 5,
    "tau": 5,
    "step": 0.025,
    "seed": 7
  })");
  cfg.out_dir = out.path.string();
  CHECK(cmd_mnist(cfg) == 0);
  const json report = out.read("mnist_report.json");
  CHECK(report["images"] == 5);
  CHECK(report["argmax_agreement"] == 5);
  CHECK(report["agreement_rate"].get<double>() == 1.0);
  CHECK(report["first_image"]["max_abs_diff"].get<double>() <= 1e-4);
  CHECK(report["circuit_accuracy"] == report["oracle_accuracy"]);
}

TEST_CASE("cmd_mnist with an empty slice exits cleanly") {
  OutDir out("mnist_empty");
  RunConfig cfg;
  cfg.doc = json::parse(R"({
    "widths": [16, 4, 4],
    "synthetic_images": 0,
    "limit": 0
  })");
  cfg.out_dir = out.path.string();
  CHECK(cmd_mnist(cfg) == 0);
  const json report = out.read("mnist_report.json");
  CHECK(report["images"] == 0);
  CHECK(report["argmax_agreement"] == 0);
}

TEST_CASE("tabulated device from a curve file drives a whole run") {
  OutDir out("csv_device");
  const std::string csv = (out.path / "device.csv").string();
  fs::create_directories(out.path);
  {
    std::ofstream f(csv);
    f << "phi,W\n";
    for (int i = 0; i <= 800; ++i) {
      const double x = -8.0 + 16.0 * i / 800.0;
      f << x << "," << 2.0 + std::atan(x) << "\n";
    }
  }
  json device = {{"csv", csv},
                 {"min_memductance", 2.0 - M_PI / 2.0},
                 {"max_memductance", 2.0 + M_PI / 2.0},
                 {"lipschitz", 1.0}};
  CHECK(device_from_config(device).memductance_curve(0.0) == doctest::Approx(2.0).epsilon(1e-9));

  RunConfig cfg;
  cfg.doc["circuit"] = {{"widths", {2, 2}},   {"device", device}, {"activation", "tanh"},
                        {"mode", "single"},   {"initial_flux", 0.25}, {"switches", "all_on"}};
  cfg.doc["tau"] = 2.0;
  cfg.doc["step"] = 0.002;
  cfg.out_dir = out.path.string();
  CHECK(cmd_read(cfg) == 0);
  const json report = out.read("read_report.json");
  const double expected = 2.0 + std::atan(0.25);
  for (const auto& layer : report["memductance"]) {
    for (const auto& row : layer) {
      for (const auto& v : row) {
        CHECK(v.get<double>() == doctest::Approx(expected).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("cmd_read in batched mode reports the shorter schedule") {
  OutDir out("read_batched");
  RunConfig cfg;
  cfg.doc = json::parse(R"({
    "circuit": {"widths": [2, 3, 2], "device": "arctan", "activation": "tanh",
                 "mode": "single", "initial_flux": 0.0, "switches": "all_on"},
    "tau": 5,
    "step": 0.01,
    "batched": true
  })");
  cfg.out_dir = out.path.string();
  CHECK(cmd_read(cfg) == 0);
  const json report = out.read("read_report.json");
  CHECK(report["applications"] == 3);
  CHECK(report["elapsed_time"].get<double>() == 60.0);
  for (const auto& layer : report["memductance"]) {
    for (const auto& row : layer) {
      for (const auto& v : row) CHECK(v.get<double>() == doctest::Approx(2.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("cmd_verify passes on the built-ins and fails on injected defects") {
  SUBCASE("defaults pass") {
    OutDir out("verify");
    RunConfig cfg;
    cfg.doc = json::parse(R"({"seed": 1})");
    cfg.out_dir = out.path.string();
    CHECK(cmd_verify(cfg) == 0);
    CHECK(out.read("verify_report.json")["ok"].get<bool>());
  }

  SUBCASE("non-odd activation is reported") {
    OutDir out("verify_sigmoid");
    RunConfig cfg;
    cfg.doc = json::parse(R"({"activation": "sigmoid", "seed": 1})");
    cfg.out_dir = out.path.string();
    CHECK(cmd_verify(cfg) == 1);
    const json report = out.read("verify_report.json");
    bool oddness_failed = false;
    for (const auto& check : report["checks"]) {
      if (check["name"] == "activation_assumptions[sigmoid]") {
        oddness_failed = !check["ok"].get<bool>() &&
                         check["detail"].get<std::string>().find("violation") != std::string::npos;
      }
    }
    CHECK(oddness_failed);
  }

  SUBCASE("inadmissible gain injection is rejected and reported") {
    OutDir out("verify_gain");
    RunConfig cfg;
    cfg.doc = json::parse(R"({"inject_alpha": 2.0, "inject_T": 1.0, "seed": 1})");
    cfg.out_dir = out.path.string();
    CHECK(cmd_verify(cfg) == 0);
    const json report = out.read("verify_report.json");
    bool rejected = false;
    for (const auto& check : report["checks"]) {
      if (check["name"] == "gain_condition_enforced") {
        rejected = check["ok"].get<bool>() &&
                   check["detail"].get<std::string>().find("rejected") != std::string::npos;
      }
    }
    CHECK(rejected);
  }
}
