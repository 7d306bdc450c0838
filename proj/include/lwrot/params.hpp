#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "lwrot/error.hpp"

namespace lwrot {

/// Coefficients of the relation a*H + b*K = 1 together with the starting
/// height z0 of the profile curve. Only obtainable through validate_params.
class WeingartenParams {
 public:
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double z0() const noexcept { return z0_; }

  /// a^2 + 4b, strictly negative.
  double discriminant() const noexcept { return a_ * a_ + 4.0 * b_; }

  /// f(z0) = z0^2 - a z0 - b, strictly positive.
  double f_z0() const noexcept { return f(z0_); }

  double f(double z) const noexcept { return z * z - a_ * z - b_; }

  /// -2b/a, the height where the singular curve meets theta = 0.
  double singular_height() const noexcept { return -2.0 * b_ / a_; }

  /// a/2, the height of the stationary (cylinder) solution.
  double cylinder_height() const noexcept { return 0.5 * a_; }

  friend WeingartenParams validate_params(double a, double b, double z0);

 private:
  WeingartenParams(double a, double b, double z0) : a_(a), b_(b), z0_(z0) {}

  double a_;
  double b_;
  double z0_;
};

namespace detail {

inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

inline bool is_excluded_boundary(double a, double b, double z0) {
  const double edge = -2.0 * b / a;
  return std::abs(z0 - edge) < 1e-12 * std::max(1.0, std::abs(edge));
}

inline WeingartenParams validate_params(double a, double b, double z0) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z0)) {
    throw Error(ErrorCode::NonFinite, "parameters must be finite");
  }
  if (!(a > 0.0)) {
    throw Error(ErrorCode::NonPositiveA,
                "a must be positive: a=" + detail::fmt_g(a));
  }
  const double delta = a * a + 4.0 * b;
  if (!(delta < 0.0)) {
    throw Error(ErrorCode::NotHyperbolic,
                "not hyperbolic: Δ=" + detail::fmt_g(delta) +
                    " (need a^2 + 4b < 0)");
  }
  if (!(z0 > 0.0)) {
    throw Error(ErrorCode::NonPositiveZ0,
                "z0 must be positive: z0=" + detail::fmt_g(z0));
  }
  if (is_excluded_boundary(a, b, z0)) {
    throw Error(ErrorCode::ExcludedBoundary,
                "excluded boundary: z0 = -2b/a = " + detail::fmt_g(-2.0 * b / a) +
                    " has no solution (need z0 != -2b/a)");
  }
  WeingartenParams p(a, b, z0);
  // Consequences of hyperbolicity; a failure here is a library bug.
  if (!(b < 0.0) || !(p.cylinder_height() < p.singular_height()) ||
      !(p.f_z0() > 0.0)) {
    throw Error(ErrorCode::NotHyperbolic, "inconsistent hyperbolic parameters");
  }
  return p;
}

/// Divides a*H + b*K = c through by c. Returns the normalized (a, b).
inline std::pair<double, double> normalize_c(double a, double b, double c) {
  if (!std::isfinite(c)) throw Error(ErrorCode::NonFinite, "c must be finite");
  if (c == 0.0) {
    throw Error(ErrorCode::ZeroC, "c must be nonzero for a hyperbolic relation");
  }
  return {a / c, b / c};
}

struct RawParams {
  double a;
  double b;
  double z0;
};

/// The curve (x, -z) solves the system for (-a, b, -z0) and rotates to the
/// same surface. Maps a triple with a < 0 onto its positive mirror.
inline RawParams canonicalize(RawParams raw) {
  if (raw.a < 0.0) return {-raw.a, raw.b, -raw.z0};
  return raw;
}

}  // namespace lwrot
