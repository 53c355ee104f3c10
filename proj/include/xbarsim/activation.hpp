#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "xbarsim/device.hpp"

namespace xbarsim {

/// Neuron activation: the voltage produced by a current-controlled source from
/// a row-current reading. Required odd, strictly increasing and Lipschitz;
/// validate_activation falsifies those properties by sampling.
struct Activation {
  std::string name;
  ScalarFn fn;
  double lipschitz = 1.0;  ///< eta [V/A]

  std::function<Eigen::ArrayXd(const Eigen::ArrayXd&)> vector_fn;
};

double apply(const Activation& act, double x);
Eigen::VectorXd apply_vec(const Activation& act, const Eigen::VectorXd& x);

Activation tanh_activation();

/// 3*sigmoid(x) - 1.5, implemented as 1.5*tanh(x/2) so oddness is bit-exact.
Activation scaled_sigmoid_activation();

/// Plain logistic sigmoid. Violates the oddness requirement; provided so the
/// validator has something to reject.
Activation raw_sigmoid_activation();

Activation activation_by_name(const std::string& name);

ValidationReport validate_activation(const Activation& act, double lo, double hi, int n_samples);

}  // namespace xbarsim
