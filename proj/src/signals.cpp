#include "xbarsim/signals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xbarsim/circuit.hpp"

namespace xbarsim {

const Eigen::VectorXd& SegmentSignal::value_at(double t) const {
  if (values.empty()) throw std::logic_error("SegmentSignal: empty");
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  if (it == breakpoints.begin()) return values.front();
  const std::size_t i = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  return values[std::min(i, values.size() - 1)];
}

SegmentSignal SegmentSignal::constant(double t0, double t1, Eigen::VectorXd value) {
  SegmentSignal s;
  s.breakpoints = {t0, t1};
  s.values.push_back(std::move(value));
  s.validate();
  return s;
}

void SegmentSignal::validate() const {
  if (values.empty() || breakpoints.size() != values.size() + 1) {
    throw std::invalid_argument("SegmentSignal: need one value per segment");
  }
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i])) {
      throw std::invalid_argument("SegmentSignal: breakpoints must be strictly increasing");
    }
  }
  for (const auto& v : values) {
    if (v.size() != values.front().size()) {
      throw std::invalid_argument("SegmentSignal: inconsistent value dimensions");
    }
  }
}

double block_value(double tau, double t) {
  if (t < -2.0 * tau || t > 2.0 * tau) return 0.0;
  if (t < -tau) return -1.0;
  if (t <= tau) return 1.0;
  return -1.0;
}

SegmentSignal encode(const Eigen::VectorXd& amplitudes, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("encode: tau must be positive");
  SegmentSignal s;
  s.breakpoints = {0.0, tau, 2.0 * tau, 3.0 * tau, 4.0 * tau};
  s.values = {-amplitudes, amplitudes, amplitudes, -amplitudes};
  return s;
}

Eigen::VectorXd decode(const Trace& trace, double tau) {
  const double target = 2.0 * tau;
  const double tol = 1e-9 * std::max(1.0, std::abs(target));
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    if (std::abs(trace.times[i] - target) <= tol) return trace.outputs[i];
  }
  throw std::runtime_error("decode: trace has no sample at the signal midpoint");
}

namespace {
double interpolate(const std::vector<double>& times, const std::vector<double>& values, double t) {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return values.front();
  if (it == times.end()) return values.back();
  const std::size_t i = static_cast<std::size_t>(it - times.begin());
  const double t1 = times[i - 1], t2 = times[i];
  if (t2 == t1) return values[i];
  const double w = (t - t1) / (t2 - t1);
  return values[i - 1] * (1.0 - w) + values[i] * w;
}
}  // namespace

double check_parity(const std::vector<double>& times, const std::vector<double>& values, double a,
                    double b, Parity parity) {
  if (times.size() != values.size() || times.empty()) {
    throw std::invalid_argument("check_parity: times and values must match and be nonempty");
  }
  const double cover = 1e-9 * std::max(1.0, std::abs(b - a));
  if (times.front() > a + cover || times.back() < b - cover) {
    throw std::invalid_argument("check_parity: samples do not cover the interval");
  }
  const double mid = 0.5 * (a + b);
  const double sign = parity == Parity::Odd ? 1.0 : -1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t < a - cover || t >= mid - cover) continue;  // midpoint excluded
    const double mirror = interpolate(times, values, a + b - t);
    worst = std::max(worst, std::abs(values[i] + sign * mirror));
  }
  return worst;
}

}  // namespace xbarsim
