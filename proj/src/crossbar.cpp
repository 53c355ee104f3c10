#include "xbarsim/crossbar.hpp"

#include <stdexcept>

namespace xbarsim {

namespace {
void require_width(const CrossbarState& state, const Eigen::VectorXd& p, const char* op) {
  if (p.size() != state.cols()) {
    throw std::invalid_argument(std::string(op) + ": potential vector has length " +
                                std::to_string(p.size()) + ", crossbar has " +
                                std::to_string(state.cols()) + " columns");
  }
}
}  // namespace

CrossbarState make_crossbar(Eigen::Index rows, Eigen::Index cols, double initial_flux) {
  CrossbarState s;
  s.flux = Eigen::MatrixXd::Constant(rows, cols, initial_flux);
  s.switches = Eigen::MatrixXd::Ones(rows, cols);
  return s;
}

Eigen::MatrixXd flux_rhs(const CrossbarState& state, const Eigen::VectorXd& col_potentials) {
  require_width(state, col_potentials, "flux_rhs");
  return state.switches.array().rowwise() * col_potentials.transpose().array();
}

Eigen::VectorXd row_currents(const CrossbarState& state, const DeviceModel& model,
                             const Eigen::VectorXd& col_potentials) {
  require_width(state, col_potentials, "row_currents");
  return (memductance_matrix(model, state.flux).array() * state.switches.array()).matrix() *
         col_potentials;
}

CrossbarTerminals terminal_currents(const CrossbarState& state, const DeviceModel& model,
                                    const Eigen::VectorXd& col_potentials) {
  require_width(state, col_potentials, "terminal_currents");
  const Eigen::MatrixXd branch =
      (memductance_matrix(model, state.flux).array() * state.switches.array()).matrix();
  CrossbarTerminals t;
  t.col_potentials = col_potentials;
  t.row_potentials = Eigen::VectorXd::Zero(state.rows());
  t.row_currents = branch * col_potentials;
  // Per-column current into the array: J_j = P_j * sum_k (W (.) S)_kj.
  t.col_currents =
      branch.colwise().sum().transpose().cwiseProduct(col_potentials);
  return t;
}

}  // namespace xbarsim
