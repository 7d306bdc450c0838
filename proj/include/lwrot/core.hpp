#pragma once

#include <cmath>
#include <limits>

#include "lwrot/error.hpp"
#include "lwrot/params.hpp"

namespace lwrot {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Curvatures {
  double kappa1;
  double kappa2;
  double H;
  double K;
};

/// kappa1 = cos(theta)/z, kappa2 = -theta', H and K of the surface of
/// revolution at a profile point.
inline Curvatures curvatures(double z, double theta, double theta_prime) {
  if (!(z > 0.0)) throw Error(ErrorCode::ZeroHeight, "curvatures need z > 0");
  const double c = std::cos(theta);
  Curvatures k;
  k.kappa1 = c / z;
  k.kappa2 = -theta_prime;
  k.H = (c - z * theta_prime) / (2.0 * z);
  k.K = -c * theta_prime / z;
  return k;
}

/// Numerator a cos(theta) - 2z of theta'.
inline double theta_numerator(const WeingartenParams& p, double z,
                              double theta) {
  return p.a() * std::cos(theta) - 2.0 * z;
}

/// Denominator a z + 2b cos(theta) of theta'. Vanishes on the singular curve.
inline double theta_denominator(const WeingartenParams& p, double z,
                                 double theta) {
  return p.a() * z + 2.0 * p.b() * std::cos(theta);
}

inline double default_singular_threshold(const WeingartenParams& p) {
  return 1e-10 * p.a() * p.z0();
}

/// theta' = (a cos(theta) - 2z) / (a z + 2b cos(theta)).
inline double theta_prime(const WeingartenParams& p, double z, double theta,
                          double singular_threshold) {
  if (!(z > 0.0)) throw Error(ErrorCode::ZeroHeight, "theta' needs z > 0");
  const double den = theta_denominator(p, z, theta);
  if (std::abs(den) < singular_threshold) {
    throw Error(ErrorCode::SingularDenominator,
                "a z + 2b cos(theta) vanishes: on the singular curve");
  }
  return theta_numerator(p, z, theta) / den;
}

inline double theta_prime(const WeingartenParams& p, double z, double theta) {
  return theta_prime(p, z, theta, default_singular_threshold(p));
}

/// E = z^2 - a z cos(theta) - b cos^2(theta) - f(z0); zero along solutions.
inline double first_integral_residual(const WeingartenParams& p, double z,
                                      double theta) {
  const double c = std::cos(theta);
  return z * z - p.a() * z * c - p.b() * c * c - p.f_z0();
}

/// Same quantity written with sin^2: z^2 - a z cos + b sin^2 + a z0 - z0^2.
inline double first_integral_residual_sin_form(const WeingartenParams& p,
                                               double z, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return z * z - p.a() * z * c + p.b() * s * s + p.a() * p.z0() -
         p.z0() * p.z0();
}

/// Height as a function of the tangent angle, solved from E = 0 on the
/// upper root. Valid for the periodic family (z0 > -2b/a).
inline double closed_form_z(const WeingartenParams& p, double theta) {
  const double c = std::cos(theta);
  const double radicand = p.discriminant() * c * c + 4.0 * p.f_z0();
  if (radicand < 0.0) {
    throw Error(ErrorCode::NegativeRadicand,
                "closed-form height undefined: negative radicand");
  }
  return 0.5 * (p.a() * c + std::sqrt(radicand));
}

/// One point of the profile curve. Curvature fields are NaN at singular
/// terminal states (axis contact, blow-up).
struct ProfileState {
  double s = 0.0;
  double x = 0.0;
  double z = 0.0;
  double theta = 0.0;
  double kappa1 = kNaN;
  double kappa2 = kNaN;
  double H = kNaN;
  double K = kNaN;

  bool regular() const {
    return std::isfinite(kappa1) && std::isfinite(kappa2) &&
           std::isfinite(H) && std::isfinite(K);
  }
};

/// Builds a state with curvatures taken from the ODE; no singularity checks.
inline ProfileState make_state(const WeingartenParams& p, double s, double x,
                               double z, double theta) {
  ProfileState st{s, x, z, theta};
  const double den = theta_denominator(p, z, theta);
  if (z > 0.0 && den != 0.0) {
    const Curvatures k =
        curvatures(z, theta, theta_numerator(p, z, theta) / den);
    st.kappa1 = k.kappa1;
    st.kappa2 = k.kappa2;
    st.H = k.H;
    st.K = k.K;
  }
  return st;
}

inline ProfileState make_singular_state(double s, double x, double z,
                                        double theta) {
  return ProfileState{s, x, z, theta};
}

/// a H + b K - 1 at a regular state.
inline double weingarten_residual(const WeingartenParams& p,
                                  const ProfileState& st) {
  return p.a() * st.H + p.b() * st.K - 1.0;
}

}  // namespace lwrot
