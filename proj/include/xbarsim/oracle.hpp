#pragma once

#include <Eigen/Dense>
#include <vector>

#include "xbarsim/activation.hpp"
#include "xbarsim/device.hpp"

namespace xbarsim {

/// Plain software network: signed weight matrices plus the activation.
struct AnnSpec {
  std::vector<int> widths;                 // n_0 .. n_L
  std::vector<Eigen::MatrixXd> weights;    // layer l: widths[l+1] x widths[l]
  Activation activation;

  void validate() const;
};

/// Direct matrix-vector recursion, the reference the circuit is checked against.
Eigen::VectorXd ann_forward(const AnnSpec& spec, const Eigen::VectorXd& input);

/// High-accuracy integration of the isolated chain ODE
///   d/dt phi_1 = u,   d/dt phi_{k+1} = sigma(W(phi_k) * f_k)
/// with constant source u, by an embedded fifth(fourth)-order adaptive pair.
/// Exists purely as a cross-check; the simulator never calls it.
Eigen::VectorXd chain_integrate_reference(const DeviceModel& device, const Activation& activation,
                                          Eigen::VectorXd initial_flux, double source,
                                          double duration, double tol = 1e-12);

struct FixedPointResult {
  std::vector<double> flux;         // iterates phi_0, phi_1 (post-probe), phi_2, ...
  std::vector<double> memductance;  // W(phi_i), same indexing
  long iterations = 0;              // controller intervals after the probe
  bool converged = false;
};

/// Closed-form iteration of the first-layer write controller: the flux moves
/// linearly under a constant segment, so each interval is one algebraic update
///   phi <- phi + T * gain * (target - W(phi))
/// after the probe step phi_1 = phi_0 + T * probe_voltage.
FixedPointResult write_fixed_point(const DeviceModel& device, double target_memductance,
                                   double initial_flux, double gain, double interval, double eps,
                                   double probe_voltage, long max_iterations = 1000000);

}  // namespace xbarsim
