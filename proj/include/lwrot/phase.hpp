#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "lwrot/core.hpp"
#include "lwrot/error.hpp"
#include "lwrot/integrate.hpp"
#include "lwrot/params.hpp"

namespace lwrot {

/// The pair (a, b) of a hyperbolic relation; the phase plane does not
/// depend on z0.
class PhaseParams {
 public:
  PhaseParams(double a, double b) : a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw Error(ErrorCode::NonFinite, "parameters must be finite");
    }
    if (!(a > 0.0)) throw Error(ErrorCode::NonPositiveA, "a must be positive");
    if (!(a * a + 4.0 * b < 0.0)) {
      throw Error(ErrorCode::NotHyperbolic,
                  "not hyperbolic: Δ=" + detail::fmt_g(a * a + 4.0 * b));
    }
  }
  explicit PhaseParams(const WeingartenParams& p) : PhaseParams(p.a(), p.b()) {}

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double discriminant() const noexcept { return a_ * a_ + 4.0 * b_; }
  double default_z_max() const { return 3.0 * std::max(a_, -2.0 * b_ / a_); }

  /// Parameters whose first-integral level passes through the saddles.
  WeingartenParams saddle_level() const {
    return validate_params(a_, b_, 0.5 * a_);
  }

 private:
  double a_;
  double b_;
};

struct PhasePoint {
  double theta;
  double z;
};

struct FieldValue {
  double dtheta;
  double dz;
};

/// (theta', z') of the projected system. Throws SingularDenominator on the
/// curve z = (-2b/a) cos(theta).
inline FieldValue field(const PhaseParams& p, double theta, double z) {
  if (!(z > 0.0)) throw Error(ErrorCode::ZeroHeight, "field needs z > 0");
  const double c = std::cos(theta);
  const double den = p.a() * z + 2.0 * p.b() * c;
  if (std::abs(den) < 1e-10 * p.a() * std::max(1.0, z)) {
    throw Error(ErrorCode::SingularDenominator, "point on the singular curve");
  }
  return {(p.a() * c - 2.0 * z) / den, std::sin(theta)};
}

/// Fixed points in [0, 2pi] x (0, z_max], by Newton iteration on
/// (a cos(theta) - 2z, sin(theta)) = 0 seeded over a coarse grid.
inline std::vector<PhasePoint> find_singularities(const PhaseParams& p,
                                                  double z_max = 0.0) {
  if (z_max <= 0.0) z_max = p.default_z_max();
  constexpr int kSeedsTheta = 24;
  constexpr int kSeedsZ = 12;
  constexpr double kMerge = 1e-10;
  std::vector<PhasePoint> found;
  for (int i = 0; i <= kSeedsTheta; ++i) {
    for (int j = 1; j <= kSeedsZ; ++j) {
      double th = 2.0 * kPi * i / kSeedsTheta;
      double z = z_max * j / kSeedsZ;
      bool converged = false;
      for (int it = 0; it < 60; ++it) {
        const double g1 = p.a() * std::cos(th) - 2.0 * z;
        const double g2 = std::sin(th);
        if (std::abs(g1) < 1e-15 && std::abs(g2) < 1e-15) {
          converged = true;
          break;
        }
        // d(g1, g2)/d(theta, z) = [[-a sin, -2], [cos, 0]]
        const double j11 = -p.a() * std::sin(th), j12 = -2.0;
        const double j21 = std::cos(th), j22 = 0.0;
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-14) break;
        const double dth = (j22 * g1 - j12 * g2) / det;
        const double dz = (-j21 * g1 + j11 * g2) / det;
        th -= dth;
        z -= dz;
        if (std::abs(dth) < 1e-16 && std::abs(dz) < 1e-16) {
          converged = true;
          break;
        }
      }
      if (!converged) continue;
      if (th < -kMerge || th > 2.0 * kPi + kMerge || !(z > 0.0) || z > z_max) {
        continue;
      }
      if (std::abs(p.a() * z + 2.0 * p.b() * std::cos(th)) < 1e-12) continue;
      const bool dup = std::any_of(found.begin(), found.end(), [&](auto& q) {
        return std::abs(q.theta - th) < 1e-8 && std::abs(q.z - z) < 1e-8;
      });
      if (!dup) found.push_back({th, z});
    }
  }
  std::sort(found.begin(), found.end(), [](auto& l, auto& r) {
    return l.theta < r.theta || (l.theta == r.theta && l.z < r.z);
  });
  const std::array<PhasePoint, 2> known{{{0.0, 0.5 * p.a()},
                                         {2.0 * kPi, 0.5 * p.a()}}};
  bool match = found.size() == known.size();
  for (std::size_t k = 0; match && k < known.size(); ++k) {
    match = std::abs(found[k].theta - known[k].theta) < kMerge &&
            std::abs(found[k].z - known[k].z) < kMerge;
  }
  if (!match) {
    throw Error(ErrorCode::UnexpectedSingularity,
                "found " + std::to_string(found.size()) +
                    " fixed points; expected (0, a/2) and (2pi, a/2)");
  }
  return found;
}

struct Linearization {
  std::array<std::array<double, 2>, 2> jacobian;
  /// Descending: lambda_plus >= lambda_minus.
  std::array<double, 2> eigenvalues;
  /// Unit eigenvectors in (theta, z) components, matching eigenvalues.
  std::array<PhasePoint, 2> eigenvectors;

  double eigenvector_dot() const {
    return eigenvectors[0].theta * eigenvectors[1].theta +
           eigenvectors[0].z * eigenvectors[1].z;
  }
};

/// Central-difference Jacobian of the field, eigen-decomposed in closed form.
inline Linearization linearize(const PhaseParams& p, PhasePoint at) {
  const double h_th = 1e-6 * std::max(1.0, std::abs(at.theta));
  const double h_z = 1e-6 * std::max(1.0, std::abs(at.z));
  const FieldValue tp = field(p, at.theta + h_th, at.z);
  const FieldValue tm = field(p, at.theta - h_th, at.z);
  const FieldValue zp = field(p, at.theta, at.z + h_z);
  const FieldValue zm = field(p, at.theta, at.z - h_z);
  Linearization lin;
  lin.jacobian = {{{(tp.dtheta - tm.dtheta) / (2.0 * h_th),
                    (zp.dtheta - zm.dtheta) / (2.0 * h_z)},
                   {(tp.dz - tm.dz) / (2.0 * h_th),
                    (zp.dz - zm.dz) / (2.0 * h_z)}}};
  const double m11 = lin.jacobian[0][0], m12 = lin.jacobian[0][1];
  const double m21 = lin.jacobian[1][0], m22 = lin.jacobian[1][1];
  const double half_tr = 0.5 * (m11 + m22);
  const double det = m11 * m22 - m12 * m21;
  const double disc = half_tr * half_tr - det;
  if (disc < 0.0) {
    throw Error(ErrorCode::UnexpectedSingularity,
                "complex eigenvalues: not a saddle");
  }
  const double root = std::sqrt(disc);
  lin.eigenvalues = {half_tr + root, half_tr - root};
  for (std::size_t k = 0; k < 2; ++k) {
    const double lam = lin.eigenvalues[k];
    // Pick the better-conditioned row of (J - lam I) v = 0.
    PhasePoint v = std::abs(m12) + std::abs(lam - m11) >=
                           std::abs(m21) + std::abs(lam - m22)
                       ? PhasePoint{m12, lam - m11}
                       : PhasePoint{lam - m22, m21};
    const double n = std::hypot(v.theta, v.z);
    v = {v.theta / n, v.z / n};
    if (v.z < 0.0) v = {-v.theta, -v.z};
    lin.eigenvectors[k] = v;
  }
  return lin;
}

enum class BranchEnd { AxisContact, SingularCurve, LeftDomain, SpanExhausted };

inline std::string_view to_string(BranchEnd e) {
  switch (e) {
    case BranchEnd::AxisContact: return "AxisContact";
    case BranchEnd::SingularCurve: return "SingularCurve";
    case BranchEnd::LeftDomain: return "LeftDomain";
    case BranchEnd::SpanExhausted: return "SpanExhausted";
  }
  return "Unknown";
}

struct SeparatrixBranch {
  PhasePoint start;
  PhasePoint direction;
  /// +1 when integrated forward (unstable), -1 backward (stable).
  double time_sign;
  std::vector<PhasePoint> points;
  BranchEnd end;
  /// Largest |E - E(start)| along the branch.
  double level_drift;
};

/// Integrates the planar field from `at + 1e-6 * direction` until it leaves
/// [0, 2pi] x (0, z_max], meets the axis or the singular curve, or has run
/// `span` of arclength. Unstable directions run forward, stable backward.
inline SeparatrixBranch trace_separatrix(const PhaseParams& pp, PhasePoint at,
                                         PhasePoint direction, double span,
                                         double z_max = 0.0) {
  using namespace detail;
  if (z_max <= 0.0) z_max = pp.default_z_max();
  const double norm = std::hypot(direction.theta, direction.z);
  if (!(norm > 0.0) || !(span > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "separatrix needs a nonzero direction and positive span");
  }
  const PhasePoint d{direction.theta / norm, direction.z / norm};
  constexpr double kOffset = 1e-6;

  const Linearization lin = linearize(pp, at);
  const auto& J = lin.jacobian;
  const double growth = d.theta * (J[0][0] * d.theta + J[0][1] * d.z) +
                        d.z * (J[1][0] * d.theta + J[1][1] * d.z);
  const double dir = growth >= 0.0 ? 1.0 : -1.0;

  const WeingartenParams level = pp.saddle_level();
  IntegrationConfig cfg;
  cfg.drift_threshold = 1e-6;

  const Vec4 y0{0.0, 0.0, at.z + kOffset * d.z, at.theta + kOffset * d.theta};
  const double e_start = first_integral_residual(level, y0[kZ], y0[kTheta]);

  std::vector<TraceEvent> events = singular_events(level);
  events.push_back({[](const Vec4& y) { return y[kTheta] + 1e-12; }, true, -1});
  events.push_back(
      {[](const Vec4& y) { return y[kTheta] - 2.0 * kPi - 1e-12; }, true, +1});
  events.push_back({[z_max](const Vec4& y) { return y[kZ] - z_max; }, true, +1});
  events.push_back(arclength_event(dir * span, dir, true));
  const TraceResult tr = trace(level, cfg, y0, dir, events);

  SeparatrixBranch br;
  br.start = at;
  br.direction = d;
  br.time_sign = dir;
  br.level_drift = 0.0;
  for (const DenseNode& n : tr.nodes) {
    br.points.push_back({n.y[kTheta], n.y[kZ]});
    br.level_drift = std::max(
        br.level_drift,
        std::abs(first_integral_residual(level, n.y[kZ], n.y[kTheta]) -
                 e_start));
  }
  switch (*tr.terminal_event) {
    case 0: br.end = BranchEnd::AxisContact; break;
    case 1: br.end = BranchEnd::SingularCurve; break;
    case 2:
    case 3:
    case 4: br.end = BranchEnd::LeftDomain; break;
    default: br.end = BranchEnd::SpanExhausted; break;
  }
  return br;
}

struct FieldSample {
  double theta;
  double z;
  double dtheta;  // NaN on the singular curve
  double dz;
  bool singular;
};

struct SaddleData {
  PhasePoint point;
  Linearization lin;
};

struct PhasePortrait {
  double a;
  double b;
  double z_max;
  std::size_t n_theta;
  std::size_t n_z;
  std::vector<FieldSample> grid;
  std::vector<SaddleData> saddles;
  std::vector<PhasePoint> singular_curve;
  std::vector<SeparatrixBranch> separatrices;
};

/// Field grid over [0, 2pi] x (0, z_max] (theta-major), the saddles with
/// their linearizations, the singular curve and all separatrix branches
/// that enter the domain.
inline PhasePortrait phase_portrait(const PhaseParams& p, std::size_t n_theta = 64,
                                    std::size_t n_z = 64, double z_max = 0.0,
                                    double separatrix_span = 0.0) {
  if (n_theta < 2 || n_z < 1) {
    throw Error(ErrorCode::InvalidArgument, "grid too small");
  }
  if (z_max <= 0.0) z_max = p.default_z_max();
  if (separatrix_span <= 0.0) separatrix_span = 4.0 * kPi * p.a();
  PhasePortrait out{p.a(), p.b(), z_max, n_theta, n_z, {}, {}, {}, {}};
  out.grid.reserve(n_theta * n_z);
  for (std::size_t i = 0; i < n_theta; ++i) {
    const double th = 2.0 * kPi * static_cast<double>(i) /
                      static_cast<double>(n_theta - 1);
    for (std::size_t j = 0; j < n_z; ++j) {
      const double z = z_max * static_cast<double>(j + 1) /
                       static_cast<double>(n_z);
      try {
        const FieldValue f = field(p, th, z);
        out.grid.push_back({th, z, f.dtheta, f.dz, false});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularDenominator) throw;
        out.grid.push_back({th, z, kNaN, std::sin(th), true});
      }
    }
  }
  for (const PhasePoint& s : find_singularities(p, z_max)) {
    out.saddles.push_back({s, linearize(p, s)});
  }
  const double edge = -2.0 * p.b() / p.a();
  constexpr int kCurve = 129;
  for (int k = 0; k < kCurve; ++k) {
    const double th = 2.0 * kPi * k / (kCurve - 1);
    const double c = std::cos(th);
    if (c > 0.0 && edge * c <= z_max) out.singular_curve.push_back({th, edge * c});
  }
  for (const SaddleData& s : out.saddles) {
    for (const PhasePoint& v : s.lin.eigenvectors) {
      for (double sign : {1.0, -1.0}) {
        const PhasePoint d{sign * v.theta, sign * v.z};
        const double th_next = s.point.theta + 1e-6 * d.theta;
        if (th_next < 0.0 || th_next > 2.0 * kPi) continue;
        out.separatrices.push_back(
            trace_separatrix(p, s.point, d, separatrix_span, z_max));
      }
    }
  }
  return out;
}

}  // namespace lwrot
