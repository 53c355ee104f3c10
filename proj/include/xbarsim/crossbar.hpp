#pragma once

#include <Eigen/Dense>

#include "xbarsim/device.hpp"

namespace xbarsim {

/// One n x m crossbar array: per-memristor fluxes and the switch matrix.
/// Row bars are grounded, so the column potentials fully determine the
/// instantaneous voltages across the selected memristors.
struct CrossbarState {
  Eigen::MatrixXd flux;      // n x m [Wb]
  Eigen::MatrixXd switches;  // n x m, entries in {0, 1}

  Eigen::Index rows() const { return flux.rows(); }
  Eigen::Index cols() const { return flux.cols(); }
};

CrossbarState make_crossbar(Eigen::Index rows, Eigen::Index cols, double initial_flux = 0.0);

/// Terminal quantities of one array. Row potentials are identically zero.
struct CrossbarTerminals {
  Eigen::VectorXd col_potentials;  // P, size m [V]
  Eigen::VectorXd col_currents;    // J, size m [A]
  Eigen::VectorXd row_potentials;  // size n, all zero [V]
  Eigen::VectorXd row_currents;    // size n [A]
};

/// Instantaneous flux rate: switches (.) (ones * P^T). Entry (k, j) is
/// switches(k,j) * P(j).
Eigen::MatrixXd flux_rhs(const CrossbarState& state, const Eigen::VectorXd& col_potentials);

/// Row-terminal currents (W(flux) (.) switches) * P: the matrix-vector product
/// the array implements.
Eigen::VectorXd row_currents(const CrossbarState& state, const DeviceModel& model,
                             const Eigen::VectorXd& col_potentials);

/// Both column and row terminal currents, consistent with the current law:
/// the totals over columns and rows coincide.
CrossbarTerminals terminal_currents(const CrossbarState& state, const DeviceModel& model,
                                    const Eigen::VectorXd& col_potentials);

}  // namespace xbarsim
