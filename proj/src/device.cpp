#include "xbarsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

namespace xbarsim {

double memductance(const DeviceModel& model, double flux) { return model.memductance_curve(flux); }

double charge(const DeviceModel& model, double flux) { return model.charge_curve(flux); }

Eigen::MatrixXd memductance_matrix(const DeviceModel& model, const Eigen::MatrixXd& flux) {
  if (model.memductance_map) {
    return model.memductance_map(flux.array()).matrix();
  }
  Eigen::MatrixXd out(flux.rows(), flux.cols());
  for (Eigen::Index j = 0; j < flux.cols(); ++j) {
    for (Eigen::Index k = 0; k < flux.rows(); ++k) {
      out(k, j) = model.memductance_curve(flux(k, j));
    }
  }
  return out;
}

double invert_memductance(const DeviceModel& model, double target, double tol) {
  if (!(target > model.min_memductance && target < model.max_memductance)) {
    throw std::domain_error("invert_memductance: target " + std::to_string(target) +
                            " outside (" + std::to_string(model.min_memductance) + ", " +
                            std::to_string(model.max_memductance) + ")");
  }
  const double sign = model.monotone_increasing ? 1.0 : -1.0;
  double lo = -1.0, hi = 1.0;
  // Expand until the target is bracketed. W is bounded, so this terminates
  // only because target is strictly inside the bounds.
  int guard = 0;
  while (sign * (model.memductance_curve(lo) - target) > 0.0) {
    lo *= 2.0;
    if (++guard > 2000) throw std::runtime_error("invert_memductance: bracketing failed (low)");
  }
  guard = 0;
  while (sign * (model.memductance_curve(hi) - target) < 0.0) {
    hi *= 2.0;
    if (++guard > 2000) throw std::runtime_error("invert_memductance: bracketing failed (high)");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;  // no representable point between
    if (sign * (model.memductance_curve(mid) - target) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

DeviceModel arctan_device() {
  DeviceModel m;
  m.name = "arctan";
  m.charge_curve = [](double x) { return 2.0 * x - 0.5 * std::log(x * x + 1.0) + x * std::atan(x); };
  m.memductance_curve = [](double x) { return 2.0 + std::atan(x); };
  m.min_memductance = 2.0 - M_PI / 2.0;
  m.max_memductance = 2.0 + M_PI / 2.0;
  m.lipschitz = 1.0;
  m.monotone_increasing = true;
  m.memductance_map = [](const Eigen::ArrayXXd& phi) -> Eigen::ArrayXXd { return 2.0 + phi.atan(); };
  return m;
}

namespace {

struct Table {
  std::vector<double> x;
  std::vector<double> w;
  std::vector<double> q;  // integral of the interpolant, q[0] = 0

  double interp(double xi) const {
    if (xi <= x.front()) return w.front();
    if (xi >= x.back()) return w.back();
    auto it = std::upper_bound(x.begin(), x.end(), xi);
    const size_t i = static_cast<size_t>(it - x.begin()) - 1;
    const double t = (xi - x[i]) / (x[i + 1] - x[i]);
    return w[i] + t * (w[i + 1] - w[i]);
  }

  double integral(double xi) const {
    if (xi <= x.front()) return q.front() + w.front() * (xi - x.front());
    if (xi >= x.back()) return q.back() + w.back() * (xi - x.back());
    auto it = std::upper_bound(x.begin(), x.end(), xi);
    const size_t i = static_cast<size_t>(it - x.begin()) - 1;
    const double d = xi - x[i];
    const double slope = (w[i + 1] - w[i]) / (x[i + 1] - x[i]);
    return q[i] + w[i] * d + 0.5 * slope * d * d;
  }
};

}  // namespace

DeviceModel tabulated_device(std::vector<double> flux_knots, std::vector<double> memductance_knots,
                             double min_memductance, double max_memductance, double lipschitz,
                             bool monotone_increasing, std::string name) {
  if (flux_knots.size() != memductance_knots.size() || flux_knots.size() < 2) {
    throw std::invalid_argument("tabulated_device: need >= 2 matching (flux, memductance) knots");
  }
  if (!std::is_sorted(flux_knots.begin(), flux_knots.end())) {
    throw std::invalid_argument("tabulated_device: flux knots must be strictly increasing");
  }
  auto table = std::make_shared<Table>();
  table->x = std::move(flux_knots);
  table->w = std::move(memductance_knots);
  table->q.resize(table->x.size(), 0.0);
  for (size_t i = 1; i < table->x.size(); ++i) {
    table->q[i] = table->q[i - 1] +
                  0.5 * (table->w[i] + table->w[i - 1]) * (table->x[i] - table->x[i - 1]);
  }
  DeviceModel m;
  m.name = std::move(name);
  m.memductance_curve = [table](double x) { return table->interp(x); };
  m.charge_curve = [table](double x) { return table->integral(x); };
  m.min_memductance = min_memductance;
  m.max_memductance = max_memductance;
  m.lipschitz = lipschitz;
  m.monotone_increasing = monotone_increasing;
  return m;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  if (violations.empty()) {
    os << "no violation found on " << samples << " samples";
    return os.str();
  }
  os << violations.size() << " violation(s) on " << samples << " samples:";
  for (const auto& v : violations) {
    os << " [" << v.kind << " at x=" << v.x << "]";
  }
  return os.str();
}

ValidationReport validate_device(const DeviceModel& model, double lo, double hi, int n_samples) {
  if (n_samples < 2) throw std::invalid_argument("validate_device: n_samples must be >= 2");
  if (!(hi > lo)) throw std::invalid_argument("validate_device: empty sample range");

  std::vector<double> xs;
  xs.reserve(static_cast<size_t>(n_samples) + n_samples / 4 + 1);
  for (int i = 0; i < n_samples; ++i) {
    xs.push_back(lo + (hi - lo) * i / (n_samples - 1));
  }
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(lo, hi);
  for (int i = 0; i < n_samples / 4; ++i) xs.push_back(unif(rng));
  std::sort(xs.begin(), xs.end());

  ValidationReport report;
  report.samples = static_cast<int>(xs.size());

  const double slack = 1e-12;
  for (double x : xs) {
    const double w = model.memductance_curve(x);
    if (!(w > 0.0)) {
      report.violations.push_back({"positivity", x, 0.0, w, 0.0});
    }
    if (w < model.min_memductance - slack || w > model.max_memductance + slack) {
      report.violations.push_back({"bounds", x, 0.0, w,
                                   w < model.min_memductance ? model.min_memductance
                                                             : model.max_memductance});
    }
  }

  const double dir = model.monotone_increasing ? 1.0 : -1.0;
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    const double x = xs[i], y = xs[i + 1];
    if (y - x < 1e-14) continue;
    const double wx = model.memductance_curve(x);
    const double wy = model.memductance_curve(y);
    const double diff = std::abs(wy - wx);
    const double allowed = model.lipschitz * (y - x) * (1.0 + 1e-9) + 1e-13;
    if (diff > allowed) {
      report.violations.push_back({"lipschitz", x, y, diff / (y - x), model.lipschitz});
    }
    if (dir * (wy - wx) <= 0.0) {
      report.violations.push_back({"monotonicity", x, y, wy - wx, 0.0});
    }
  }

  // W must match the central finite difference of g. Step scaled with the
  // interval so wide ranges do not starve the difference of signal.
  const double h = 1e-4 * std::max(1.0, (hi - lo) / 20.0);
  for (size_t i = 0; i < xs.size(); i += 7) {
    const double x = xs[i];
    const double fd = (model.charge_curve(x + h) - model.charge_curve(x - h)) / (2.0 * h);
    const double w = model.memductance_curve(x);
    if (std::abs(fd - w) > 1e-5 * std::max(1.0, std::abs(w)) + 1e-9) {
      report.violations.push_back({"derivative", x, 0.0, fd, w});
    }
  }
  return report;
}

}  // namespace xbarsim
