#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace lwrot::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct StepResult {
  Vec<N> y;
  Vec<N> err;
};

/// Dormand-Prince 5(4) step for an autonomous system y' = f(y).
/// Taking the step with any h' in (0, h] from the same start gives the
/// solution inside the interval at fifth order, which is how callers
/// evaluate the trajectory between accepted nodes.
template <std::size_t N, class Rhs>
StepResult<N> dopri5_step(const Rhs& f, const Vec<N>& y0, double h) {
  constexpr double a21 = 1.0 / 5.0;
  constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                   a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                   a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                   a65 = -5103.0 / 18656.0;
  constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                   b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                   e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                   e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

  Vec<N> k1 = f(y0), k2, k3, k4, k5, k6, k7, tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y0[i] + h * a21 * k1[i];
  k2 = f(tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y0[i] + h * (a31 * k1[i] + a32 * k2[i]);
  k3 = f(tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y0[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  k4 = f(tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y0[i] +
             h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  k5 = f(tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y0[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                          a64 * k4[i] + a65 * k5[i]);
  k6 = f(tmp);

  StepResult<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out.y[i] = y0[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                            b5 * k5[i] + b6 * k6[i]);
  k7 = f(out.y);
  for (std::size_t i = 0; i < N; ++i)
    out.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                      e6 * k6[i] + e7 * k7[i]);
  return out;
}

/// Mixed absolute/relative RMS error norm; <= 1 means the step is accepted.
template <std::size_t N>
double error_norm(const Vec<N>& y0, const Vec<N>& y1, const Vec<N>& err,
                  double rel_tol, double abs_tol) {
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sc =
        abs_tol + rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(N));
}

/// Step-size update after a trial step with normalized error `err`.
inline double next_step(double h, double err, bool rejected_before) {
  constexpr double safety = 0.9;
  constexpr double min_factor = 0.2;
  constexpr double max_factor = 5.0;
  if (err == 0.0) return h * max_factor;
  double factor = safety * std::pow(err, -0.2);
  factor = std::clamp(factor, min_factor, rejected_before ? 1.0 : max_factor);
  return h * factor;
}

}  // namespace lwrot::ode
