#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace xbarsim {

using ScalarFn = std::function<double(double)>;

/// Flux-controlled memristor model: a charge curve g(flux) together with its
/// derivative, the memductance W(flux) = dg/dflux, and the constants the
/// model is declared to satisfy. The constants are taken as given and checked
/// numerically by validate_device, never derived.
struct DeviceModel {
  std::string name;
  ScalarFn charge_curve;       ///< g: flux [Wb] -> charge [C]
  ScalarFn memductance_curve;  ///< W: flux [Wb] -> memductance [S]
  double min_memductance = 0.0;
  double max_memductance = 0.0;
  double lipschitz = 0.0;  ///< Lipschitz constant of W [S/Wb]
  bool monotone_increasing = true;

  /// Optional vectorized evaluation of W over a matrix of fluxes. Falls back
  /// to the scalar curve when unset.
  std::function<Eigen::ArrayXXd(const Eigen::ArrayXXd&)> memductance_map;
};

double memductance(const DeviceModel& model, double flux);
double charge(const DeviceModel& model, double flux);

/// Entrywise memductance of a flux matrix.
Eigen::MatrixXd memductance_matrix(const DeviceModel& model, const Eigen::MatrixXd& flux);

/// Flux producing a given memductance, found by bisection on the strictly
/// monotone W curve. Throws if target is outside (min_memductance, max_memductance).
double invert_memductance(const DeviceModel& model, double target, double tol = 1e-12);

/// The arctan memristor: g(x) = 2x - log(x^2+1)/2 + x*atan(x), W(x) = 2 + atan(x),
/// bounds 2 -/+ pi/2, Lipschitz constant 1.
DeviceModel arctan_device();

/// Device from a tabulated memductance curve (linearly interpolated between
/// knots, clamped outside). The charge curve is the exact integral of the
/// interpolant. Bound and Lipschitz constants are declared by the caller.
DeviceModel tabulated_device(std::vector<double> flux_knots, std::vector<double> memductance_knots,
                             double min_memductance, double max_memductance, double lipschitz,
                             bool monotone_increasing = true, std::string name = "tabulated");

struct Violation {
  std::string kind;  // "positivity" | "bounds" | "lipschitz" | "monotonicity" | "derivative" | "oddness"
  double x = 0.0;
  double y = 0.0;     // second sample point, when the check is pairwise
  double value = 0.0;
  double bound = 0.0;
};

struct ValidationReport {
  int samples = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Sample-based falsification of the device assumptions: positivity and bounds
/// of W, Lipschitz continuity, monotonicity, and agreement of W with the
/// central finite difference of g. Samples a uniform grid plus random points;
/// absence of violations is evidence, not proof.
ValidationReport validate_device(const DeviceModel& model, double lo, double hi, int n_samples);

}  // namespace xbarsim
