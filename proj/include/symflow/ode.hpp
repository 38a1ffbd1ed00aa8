#pragma once

// Small fixed-step and embedded Runge-Kutta steppers.  States need value
// semantics with y + y and scalar * y.

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "symflow/errors.hpp"

namespace symflow {

template <class State, class Rhs>
State rk4_step(const State& y, double t, double dt, Rhs&& f) {
  State k1 = f(t, y);
  State k2 = f(t + 0.5 * dt, State(y + k1 * (0.5 * dt)));
  State k3 = f(t + 0.5 * dt, State(y + k2 * (0.5 * dt)));
  State k4 = f(t + dt, State(y + k3 * dt));
  return State(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0));
}

/// Dormand-Prince 5(4) with PI-free step control; integrates from t0 to t1
/// and returns the state at t1.  Throws GeometricError on step-size underflow.
inline Eigen::VectorXd dp45_integrate(Eigen::VectorXd y, double t0, double t1, double rtol, double atol,
                                      const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                      e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = t0;
  double dt = (t1 - t0) / 16.0;
  int rejected_in_a_row = 0;
  while (t < t1) {
    if (t + dt > t1) dt = t1 - t;
    if (dt < 1e-14 * std::max(1.0, std::abs(t1)))
      throw GeometricError("dp45: step size underflow at t = " + std::to_string(t));

    Eigen::VectorXd k1 = f(t, y);
    Eigen::VectorXd k2 = f(t + c2 * dt, y + dt * (a21 * k1));
    Eigen::VectorXd k3 = f(t + c3 * dt, y + dt * (a31 * k1 + a32 * k2));
    Eigen::VectorXd k4 = f(t + c4 * dt, y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
    Eigen::VectorXd k5 = f(t + c5 * dt, y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Eigen::VectorXd k6 = f(t + dt, y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Eigen::VectorXd y5 = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Eigen::VectorXd k7 = f(t + dt, y5);
    Eigen::VectorXd err = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double scale = atol + rtol * std::max(y.cwiseAbs().maxCoeff(), y5.cwiseAbs().maxCoeff());
    double err_norm = err.cwiseAbs().maxCoeff() / scale;
    if (err_norm <= 1.0) {
      t += dt;
      y = std::move(y5);
      rejected_in_a_row = 0;
    } else if (++rejected_in_a_row > 50) {
      throw GeometricError("dp45: repeated step rejection");
    }
    double factor = 0.9 * std::pow(err_norm > 0 ? err_norm : 1e-10, -0.2);
    dt *= std::min(5.0, std::max(0.2, factor));
  }
  return y;
}

}  // namespace symflow
