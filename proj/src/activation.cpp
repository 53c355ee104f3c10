#include "xbarsim/activation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace xbarsim {

double apply(const Activation& act, double x) { return act.fn(x); }

Eigen::VectorXd apply_vec(const Activation& act, const Eigen::VectorXd& x) {
  if (act.vector_fn) return act.vector_fn(x.array()).matrix();
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = act.fn(x[i]);
  return out;
}

Activation tanh_activation() {
  Activation a;
  a.name = "tanh";
  a.fn = [](double x) { return std::tanh(x); };
  a.lipschitz = 1.0;
  a.vector_fn = [](const Eigen::ArrayXd& x) -> Eigen::ArrayXd { return x.tanh(); };
  return a;
}

Activation scaled_sigmoid_activation() {
  Activation a;
  a.name = "scaled_sigmoid";
  a.fn = [](double x) { return 1.5 * std::tanh(0.5 * x); };
  a.lipschitz = 0.75;
  a.vector_fn = [](const Eigen::ArrayXd& x) -> Eigen::ArrayXd { return 1.5 * (0.5 * x).tanh(); };
  return a;
}

Activation raw_sigmoid_activation() {
  Activation a;
  a.name = "sigmoid";
  a.fn = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  a.lipschitz = 0.25;
  return a;
}

Activation activation_by_name(const std::string& name) {
  if (name == "tanh") return tanh_activation();
  if (name == "scaled_sigmoid") return scaled_sigmoid_activation();
  if (name == "sigmoid") return raw_sigmoid_activation();
  throw std::invalid_argument("unknown activation: " + name);
}

ValidationReport validate_activation(const Activation& act, double lo, double hi, int n_samples) {
  if (n_samples < 2) throw std::invalid_argument("validate_activation: n_samples must be >= 2");
  if (!(hi > lo)) throw std::invalid_argument("validate_activation: empty sample range");

  std::vector<double> xs;
  for (int i = 0; i < n_samples; ++i) xs.push_back(lo + (hi - lo) * i / (n_samples - 1));
  std::mt19937_64 rng(0x2545f4914f6cdd1dULL);
  std::uniform_real_distribution<double> unif(lo, hi);
  for (int i = 0; i < n_samples / 4; ++i) xs.push_back(unif(rng));
  std::sort(xs.begin(), xs.end());

  ValidationReport report;
  report.samples = static_cast<int>(xs.size());

  if (std::abs(act.fn(0.0)) > 1e-12) {
    report.violations.push_back({"oddness", 0.0, 0.0, act.fn(0.0), 0.0});
  }
  for (double x : xs) {
    const double d = act.fn(x) + act.fn(-x);
    if (std::abs(d) > 1e-12 * std::max(1.0, std::abs(act.fn(x)))) {
      report.violations.push_back({"oddness", x, -x, d, 0.0});
    }
  }
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    const double x = xs[i], y = xs[i + 1];
    if (y - x < 1e-14) continue;
    const double fx = act.fn(x), fy = act.fn(y);
    if (fy - fx <= 0.0) {
      report.violations.push_back({"monotonicity", x, y, fy - fx, 0.0});
    }
    const double diff = std::abs(fy - fx);
    const double allowed = act.lipschitz * (y - x) * (1.0 + 1e-9) + 1e-13;
    if (diff > allowed) {
      report.violations.push_back({"lipschitz", x, y, diff / (y - x), act.lipschitz});
    }
  }
  return report;
}

}  // namespace xbarsim
