#pragma once

#include <Eigen/Dense>
#include <vector>

namespace xbarsim {

struct Trace;  // circuit.hpp

/// Piecewise-constant vector voltage schedule. Segment i holds values[i] on
/// [breakpoints[i], breakpoints[i+1]); the final segment is closed on the right.
struct SegmentSignal {
  std::vector<double> breakpoints;       // size = values.size() + 1, strictly increasing
  std::vector<Eigen::VectorXd> values;

  double start() const { return breakpoints.front(); }
  double end() const { return breakpoints.back(); }
  Eigen::Index dims() const { return values.empty() ? 0 : values.front().size(); }
  std::size_t segments() const { return values.size(); }

  /// Value at time t (left-closed segments; t past the end returns the last value).
  const Eigen::VectorXd& value_at(double t) const;

  static SegmentSignal constant(double t0, double t1, Eigen::VectorXd value);

  void validate() const;  // throws on malformed breakpoints/values
};

/// The four-phase unit pulse: 0 outside [-2 tau, 2 tau], -1 on [-2 tau, -tau)
/// and (tau, 2 tau], +1 on [-tau, tau].
double block_value(double tau, double t);

/// Amplitude-modulated block input on [0, 4 tau]: segment values
/// -a, +a, +a, -a. The midpoint 2 tau carries the raw amplitudes.
SegmentSignal encode(const Eigen::VectorXd& amplitudes, double tau);

/// Output sample at the signal midpoint t = 2 tau. The integrator lands on
/// breakpoints exactly, so the sample is looked up, never interpolated.
Eigen::VectorXd decode(const Trace& trace, double tau);

enum class Parity { Odd, Even };

/// Max deviation from the stated parity about the midpoint of [a, b]:
/// max over samples t in [a, mid) of |f(t) -/+ f(a + b - t)|, with the mirror
/// value linearly interpolated. The exact midpoint sample is skipped; the
/// signals of interest may jump there.
double check_parity(const std::vector<double>& times, const std::vector<double>& values, double a,
                    double b, Parity parity);

}  // namespace xbarsim
