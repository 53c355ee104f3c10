#include <doctest.h>

#include <cmath>

#include "xbarsim/circuit.hpp"
#include "xbarsim/signals.hpp"

using namespace xbarsim;

TEST_CASE("block_value piecewise values") {
  const double tau = 2.0;
  CHECK(block_value(tau, 0.0) == 1.0);
  CHECK(block_value(tau, -1.5 * tau) == -1.0);
  CHECK(block_value(tau, 3.0 * tau) == 0.0);
  CHECK(block_value(tau, -3.0 * tau) == 0.0);
  CHECK(block_value(tau, -2.0 * tau) == -1.0);
  CHECK(block_value(tau, -tau) == 1.0);
  CHECK(block_value(tau, tau) == 1.0);
  CHECK(block_value(tau, 1.5 * tau) == -1.0);
  CHECK(block_value(tau, 2.0 * tau) == -1.0);
}

TEST_CASE("encode produces the four-phase schedule") {
  Eigen::VectorXd u(2);
  u << -1.0, 1.0;
  const SegmentSignal s = encode(u, 5.0);
  CHECK(s.breakpoints == std::vector<double>{0.0, 5.0, 10.0, 15.0, 20.0});
  CHECK(s.value_at(10.0)[0] == -1.0);
  CHECK(s.value_at(10.0)[1] == 1.0);

  Eigen::VectorXd single(1);
  single << 2.0;
  const SegmentSignal t = encode(single, 1.0);
  CHECK(t.value_at(0.5)[0] == -2.0);
  CHECK(t.value_at(3.9)[0] == -2.0);
  CHECK(t.value_at(1.5)[0] == 2.0);

  const SegmentSignal z = encode(Eigen::VectorXd::Zero(3), 1.0);
  for (double tt : {0.1, 1.2, 2.5, 3.7}) CHECK(z.value_at(tt).isZero(0.0));

  CHECK_THROWS_AS(encode(u, 0.0), std::invalid_argument);
}

TEST_CASE("encode integrates to zero per coordinate") {
  Eigen::VectorXd u(3);
  u << 0.25, -1.75, 3.0;
  const SegmentSignal s = encode(u, 7.0);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(3);
  for (std::size_t i = 0; i < s.segments(); ++i) {
    total += (s.breakpoints[i + 1] - s.breakpoints[i]) * s.values[i];
  }
  CHECK(total.isZero(0.0));
}

TEST_CASE("segment signal validation") {
  SegmentSignal bad;
  bad.breakpoints = {0.0, 1.0, 1.0};
  bad.values = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  SegmentSignal mismatch;
  mismatch.breakpoints = {0.0, 1.0};
  CHECK_THROWS_AS(mismatch.validate(), std::invalid_argument);
}

TEST_CASE("decode needs the midpoint sample") {
  Trace t;
  t.times = {0.0, 10.0, 20.0};
  for (int i = 0; i < 3; ++i) t.outputs.push_back(Eigen::VectorXd::Constant(1, double(i)));
  CHECK(decode(t, 5.0)[0] == 1.0);
  CHECK_THROWS_AS(decode(t, 4.0), std::runtime_error);
}

TEST_CASE("block pulse is odd on each of its half-windows") {
  const double tau = 3.0;
  std::vector<double> times, left, right;
  for (int i = 0; i <= 600; ++i) {
    const double t = 2.0 * tau * i / 600.0;
    times.push_back(t);
    left.push_back(block_value(tau, t - 2.0 * tau));  // Q on [-2 tau, 0]
    right.push_back(block_value(tau, t));             // Q on [0, 2 tau]
  }
  CHECK(check_parity(times, left, 0.0, 2.0 * tau, Parity::Odd) == 0.0);
  CHECK(check_parity(times, right, 0.0, 2.0 * tau, Parity::Odd) == 0.0);
}

TEST_CASE("check_parity on constructed series") {
  const double tau = 3.0;
  std::vector<double> times, q;
  for (int i = 0; i <= 600; ++i) {
    const double t = 2.0 * tau * i / 600.0;
    times.push_back(t);
    q.push_back(block_value(tau, t - 2.0 * tau));
  }
  // The shifted pulse is odd on [0, 2 tau] by construction.
  CHECK(check_parity(times, q, 0.0, 2.0 * tau, Parity::Odd) == 0.0);

  // A constant has odd-parity deviation of twice its value.
  std::vector<double> flat(times.size(), 0.7);
  CHECK(check_parity(times, flat, 0.0, 2.0 * tau, Parity::Odd) == doctest::Approx(1.4));

  // A parabola centered on the midpoint is even.
  std::vector<double> bowl;
  for (double t : times) bowl.push_back((t - tau) * (t - tau));
  CHECK(check_parity(times, bowl, 0.0, 2.0 * tau, Parity::Even) <= 1e-12);

  CHECK_THROWS_AS(check_parity(times, q, -1.0, 2.0 * tau, Parity::Odd), std::invalid_argument);
}
