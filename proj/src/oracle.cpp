#include "xbarsim/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace xbarsim {

void AnnSpec::validate() const {
  if (widths.size() < 2 || weights.size() + 1 != widths.size()) {
    throw std::invalid_argument("ann: weights do not chain with widths");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l]) {
      throw std::invalid_argument("ann: layer " + std::to_string(l) + " matrix has wrong shape");
    }
  }
}

Eigen::VectorXd ann_forward(const AnnSpec& spec, const Eigen::VectorXd& input) {
  spec.validate();
  if (input.size() != spec.widths.front()) {
    throw std::invalid_argument("ann_forward: input length mismatch");
  }
  Eigen::VectorXd a = input;
  for (const auto& w : spec.weights) a = apply_vec(spec.activation, w * a);
  return a;
}

namespace {

Eigen::VectorXd chain_rhs(const DeviceModel& device, const Activation& act,
                          const Eigen::VectorXd& phi, double source) {
  Eigen::VectorXd d(phi.size());
  double f = source;
  for (Eigen::Index k = 0; k < phi.size(); ++k) {
    d[k] = f;
    f = act.fn(device.memductance_curve(phi[k]) * f);
  }
  return d;
}

}  // namespace

Eigen::VectorXd chain_integrate_reference(const DeviceModel& device, const Activation& act,
                                          Eigen::VectorXd phi, double source, double duration,
                                          double tol) {
  if (duration < 0.0) throw std::invalid_argument("chain_integrate_reference: negative duration");
  if (duration == 0.0 || source == 0.0) return phi;

  // Dormand-Prince 5(4) coefficients; the rhs is autonomous so stage times
  // are not needed.
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = 0.0;
  double h = std::min(duration, 1e-2);
  long rejected_in_row = 0;
  while (t < duration) {
    h = std::min(h, duration - t);
    const Eigen::VectorXd k1 = chain_rhs(device, act, phi, source);
    const Eigen::VectorXd k2 = chain_rhs(device, act, phi + h * a21 * k1, source);
    const Eigen::VectorXd k3 = chain_rhs(device, act, phi + h * (a31 * k1 + a32 * k2), source);
    const Eigen::VectorXd k4 =
        chain_rhs(device, act, phi + h * (a41 * k1 + a42 * k2 + a43 * k3), source);
    const Eigen::VectorXd k5 =
        chain_rhs(device, act, phi + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), source);
    const Eigen::VectorXd k6 = chain_rhs(
        device, act, phi + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), source);
    const Eigen::VectorXd next = phi + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Eigen::VectorXd k7 = chain_rhs(device, act, next, source);

    const Eigen::VectorXd errv =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      const double scale = tol + tol * std::max(std::abs(phi[i]), std::abs(next[i]));
      err = std::max(err, std::abs(errv[i]) / scale);
    }

    if (err <= 1.0) {
      t += h;
      phi = next;
      rejected_in_row = 0;
    } else if (++rejected_in_row > 60) {
      throw std::runtime_error("chain_integrate_reference: step control stalled");
    }
    const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::min(5.0, std::max(0.2, factor));
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw std::runtime_error("chain_integrate_reference: step collapsed");
    }
  }
  return phi;
}

FixedPointResult write_fixed_point(const DeviceModel& device, double target, double phi0,
                                   double gain, double interval, double eps, double probe_voltage,
                                   long max_iterations) {
  if (probe_voltage == 0.0) {
    throw std::invalid_argument("write_fixed_point: probe voltage must be nonzero");
  }
  if (!(gain > 0.0) || !(interval > 0.0)) {
    throw std::invalid_argument("write_fixed_point: gain and interval must be positive");
  }
  if (gain * interval > 1.0 / device.lipschitz * (1.0 + 1e-12)) {
    throw std::invalid_argument("write_fixed_point: gain condition violated (T*alpha > 1/beta)");
  }
  FixedPointResult r;
  double phi = phi0;
  r.flux.push_back(phi);
  r.memductance.push_back(device.memductance_curve(phi));

  phi += interval * probe_voltage;  // probe
  r.flux.push_back(phi);
  r.memductance.push_back(device.memductance_curve(phi));

  while (std::abs(target - device.memductance_curve(phi)) > eps) {
    if (r.iterations >= max_iterations) return r;  // converged stays false
    phi += interval * gain * (target - device.memductance_curve(phi));
    r.flux.push_back(phi);
    r.memductance.push_back(device.memductance_curve(phi));
    ++r.iterations;
  }
  r.converged = true;
  return r;
}

}  // namespace xbarsim
