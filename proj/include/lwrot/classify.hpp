#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lwrot/core.hpp"
#include "lwrot/error.hpp"
#include "lwrot/integrate.hpp"
#include "lwrot/intersect.hpp"
#include "lwrot/params.hpp"

namespace lwrot {

enum class Regime {
  GraphPositiveK,  // 0 < z0 < a/2
  Cylinder,        // z0 = a/2
  GraphNegativeK,  // a/2 < z0 < -2b/a
  Periodic,        // z0 > -2b/a
  Excluded,        // z0 = -2b/a
};

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::GraphPositiveK: return "GraphPositiveK";
    case Regime::Cylinder: return "Cylinder";
    case Regime::GraphNegativeK: return "GraphNegativeK";
    case Regime::Periodic: return "Periodic";
    case Regime::Excluded: return "Excluded";
  }
  return "Unknown";
}

/// Regime from the position of z0 against a/2 and -2b/a. Accepts raw input
/// so the excluded boundary can still be reported.
inline Regime classify(double a, double b, double z0) {
  if (is_excluded_boundary(a, b, z0)) return Regime::Excluded;
  if (std::abs(z0 - 0.5 * a) < 1e-12 * a) return Regime::Cylinder;
  if (z0 < 0.5 * a) return Regime::GraphPositiveK;
  if (z0 < -2.0 * b / a) return Regime::GraphNegativeK;
  return Regime::Periodic;
}

inline Regime classify(const WeingartenParams& p) {
  return classify(p.a(), p.b(), p.z0());
}

/// Termination the integrator must observe for a regime.
inline std::optional<TerminationKind> expected_termination(Regime r) {
  switch (r) {
    case Regime::GraphPositiveK: return TerminationKind::AxisContact;
    case Regime::Cylinder: return TerminationKind::Stationary;
    case Regime::GraphNegativeK: return TerminationKind::DenominatorBlowup;
    case Regime::Periodic: return TerminationKind::PeriodClosed;
    case Regime::Excluded: return std::nullopt;
  }
  return std::nullopt;
}

struct Check {
  std::string name;
  bool passed;
  double measured;
  double tolerance;
};

struct ClassificationReport {
  double a = 0.0;
  double b = 0.0;
  double z0 = 0.0;
  double discriminant = 0.0;
  double f_z0 = 0.0;
  Regime regime = Regime::Excluded;
  TerminationEvent termination{TerminationKind::ArclengthCap, 0.0, {}};
  std::optional<Milestones> milestones;
  std::vector<Check> checks;
  /// x at the singular end of the domain (axis contact or blow-up).
  std::optional<double> domain_endpoint;
  /// Arclength at the singular end of the domain.
  std::optional<double> arclength_endpoint;
  std::optional<double> period;
  std::optional<double> x_period;
  std::size_t self_intersections = 0;
  double z_min = 0.0;
  double z_max = 0.0;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const Check& c) { return c.passed; });
  }
  const Check* find(std::string_view name) const {
    for (const Check& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

// --- symmetry -------------------------------------------------------------

/// Integrates both ways from s1 over a common window and returns the max of
/// |x(s1+t)+x(s1-t)-2x(s1)| + |z(s1+t)-z(s1-t)| + |theta(s1+t)+theta(s1-t)-2theta(s1)|.
inline double check_symmetry(const ProfileCurve& curve, double s1,
                             std::size_t n_points = 200) {
  const WeingartenParams& p = curve.params;
  const ProfileState c = curve.state_at(s1);
  const double crit_tol = std::max(1e-9, 1e3 * curve.config.event_tol);
  if (std::abs(std::sin(c.theta)) > crit_tol) {
    throw Error(ErrorCode::NotACriticalPoint,
                "sin(theta) = " + std::to_string(std::sin(c.theta)) +
                    " at s1 = " + std::to_string(s1));
  }

  if (curve.termination.kind == TerminationKind::Stationary) {
    const double window = curve.config.stationary_length;
    double dev = 0.0;
    for (std::size_t k = 1; k <= n_points; ++k) {
      const double t = window * static_cast<double>(k) / n_points;
      const ProfileState fwd = curve.state_at(s1 + t);
      const ProfileState bwd = curve.state_at(s1 - t);
      dev = std::max(dev, std::abs(fwd.x + bwd.x - 2.0 * c.x) +
                              std::abs(fwd.z - bwd.z) +
                              std::abs(fwd.theta + bwd.theta - 2.0 * c.theta));
    }
    return dev;
  }

  double window = 0.0;
  if (curve.period) {
    window = 0.5 * *curve.period;
  } else {
    window = 0.9 * (curve.s_end() - s1);
  }
  if (!(window > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "empty symmetry window");
  }

  using namespace detail;
  // The check should resolve deviations well below its own tolerance, so
  // the two traces run tighter than the curve they test.
  IntegrationConfig cfg = curve.config;
  cfg.rel_tol = std::min(cfg.rel_tol, 1e-12);
  cfg.abs_tol = std::min(cfg.abs_tol, 1e-14);
  const Vec4 y1{c.s, c.x, c.z, c.theta};
  const TraceResult fwd = trace_span(p, cfg, y1, 1.0, window);
  const TraceResult bwd = trace_span(p, cfg, y1, -1.0, window);
  const double reach = std::min(
      fwd.nodes.back().y[kS] - s1, s1 - bwd.nodes.back().y[kS]);

  double dev = 0.0;
  for (std::size_t k = 1; k <= n_points; ++k) {
    const double t = reach * static_cast<double>(k) / n_points;
    const Vec4 yf = dense_eval(p, fwd.nodes, s1 + t, cfg.event_tol);
    const Vec4 yb = dense_eval(p, bwd.nodes, s1 - t, cfg.event_tol, -1.0);
    dev = std::max(dev, std::abs(yf[kX] + yb[kX] - 2.0 * c.x) +
                            std::abs(yf[kZ] - yb[kZ]) +
                            std::abs(yf[kTheta] + yb[kTheta] - 2.0 * c.theta));
  }
  return dev;
}

// --- self-intersections ---------------------------------------------------

/// Crossings of the sampled profile polyline, each refined on the dense
/// curve by Newton iteration on alpha(s_i) - alpha(s_j) = 0.
inline std::vector<SelfIntersection> detect_self_intersections(
    const ProfileCurve& curve) {
  const std::vector<ProfileState> poly = curve.polyline();
  std::vector<PlanarPoint> pts;
  std::vector<double> s;
  pts.reserve(poly.size());
  s.reserve(poly.size());
  for (const ProfileState& st : poly) {
    pts.push_back({st.x, st.z});
    s.push_back(st.s);
  }
  std::vector<SelfIntersection> hits = polyline_self_intersections(pts, s);

  if (curve.termination.kind == TerminationKind::Stationary) return hits;
  const double s_lo = poly.front().s;
  const double s_hi = poly.back().s;
  for (SelfIntersection& h : hits) {
    double si = h.s_i, sj = h.s_j;
    bool ok = true;
    for (int it = 0; it < 20 && ok; ++it) {
      if (si <= s_lo || sj >= s_hi) {
        ok = false;
        break;
      }
      const ProfileState a = curve.state_at(si);
      const ProfileState b = curve.state_at(sj);
      const double fx = a.x - b.x, fz = a.z - b.z;
      if (std::hypot(fx, fz) < 1e-14) break;
      // J = [t(si), -t(sj)] with unit tangents (cos theta, sin theta).
      const double j11 = std::cos(a.theta), j12 = -std::cos(b.theta);
      const double j21 = std::sin(a.theta), j22 = -std::sin(b.theta);
      const double det = j11 * j22 - j12 * j21;
      if (std::abs(det) < 1e-12) {
        ok = false;
        break;
      }
      si -= (j22 * fx - j12 * fz) / det;
      sj -= (-j21 * fx + j11 * fz) / det;
    }
    if (ok && std::abs(si - h.s_i) < 1e-2 && std::abs(sj - h.s_j) < 1e-2 &&
        si > s_lo && sj < s_hi) {
      const ProfileState a = curve.state_at(si);
      h = {si, sj, {a.x, a.z}};
    }
  }
  return hits;
}

// --- periodicity ----------------------------------------------------------

struct PeriodicityDeviation {
  double z = 0.0;
  double theta = 0.0;
  double x = 0.0;
};

/// Integrates two periods without stopping and compares s with s + T at
/// n_points sample arclengths in [0, T).
inline PeriodicityDeviation periodicity_check(const ProfileCurve& curve,
                                              std::size_t n_points = 100) {
  if (!curve.period) throw Error(ErrorCode::NotPeriodic, "no period");
  using namespace detail;
  const WeingartenParams& p = curve.params;
  const double T = *curve.period;
  const double xT = curve.x_period();
  const Vec4 y0{0.0, 0.0, p.z0(), 0.0};
  const TraceResult tr = trace_span(p, curve.config, y0, 1.0, 2.0 * T);
  PeriodicityDeviation dev;
  for (std::size_t k = 0; k < n_points; ++k) {
    const double s = T * static_cast<double>(k) / n_points;
    const Vec4 a = dense_eval(p, tr.nodes, s, curve.config.event_tol);
    const Vec4 b = dense_eval(p, tr.nodes, s + T, curve.config.event_tol);
    dev.z = std::max(dev.z, std::abs(b[kZ] - a[kZ]));
    dev.theta = std::max(dev.theta, std::abs(b[kTheta] - a[kTheta] + 2.0 * kPi));
    dev.x = std::max(dev.x, std::abs(b[kX] - a[kX] - xT));
  }
  return dev;
}

// --- monotonicity & curvature partition ------------------------------------

/// Sample-wise check of the per-quarter monotonicity of x and z over one
/// period. Returns the number of sample pairs violating the table.
inline std::size_t monotonicity_violations(const ProfileCurve& curve) {
  if (!curve.period || !curve.milestones) {
    throw Error(ErrorCode::NotPeriodic, "monotonicity needs a closed period");
  }
  const Milestones& m = *curve.milestones;
  const double T = *curve.period;
  struct Quarter {
    double lo, hi;
    int x_sign, z_sign;
  };
  const Quarter quarters[4] = {{0.0, m.t1, +1, -1},
                               {m.t1, m.t2, -1, -1},
                               {m.t2, m.t3, -1, +1},
                               {m.t3, T, +1, +1}};
  std::size_t bad = 0;
  for (const Quarter& q : quarters) {
    std::vector<ProfileState> pts;
    pts.push_back(curve.state_at(q.lo));
    for (const ProfileState& st : curve.samples) {
      if (st.s > q.lo && st.s < q.hi) pts.push_back(st);
    }
    pts.push_back(curve.state_at(q.hi));
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double dx = pts[i + 1].x - pts[i].x;
      const double dz = pts[i + 1].z - pts[i].z;
      if (!(q.x_sign * dx > 0.0)) ++bad;
      if (!(q.z_sign * dz > 0.0)) ++bad;
    }
  }
  return bad;
}

/// Samples whose sign of K disagrees with the arc between consecutive
/// vertical points they lie on: positive on arcs containing a maximum of z,
/// negative on arcs containing a minimum. Vertical points themselves skip.
inline std::size_t curvature_partition_violations(const ProfileCurve& curve) {
  if (!curve.period || !curve.milestones) {
    throw Error(ErrorCode::NotPeriodic, "partition needs a closed period");
  }
  const double T = *curve.period;
  const Milestones& m = *curve.milestones;
  std::size_t bad = 0;
  for (const ProfileState& st : curve.samples) {
    // Reduce to one period.
    const double k = std::floor(st.s / T);
    const double s = st.s - k * T;
    const double tol = 1e-9 * T;
    if (std::abs(s - m.t1) < tol || std::abs(s - m.t3) < tol) continue;
    const bool min_arc = s > m.t1 && s < m.t3;
    if (min_arc ? !(st.K < 0.0) : !(st.K > 0.0)) ++bad;
  }
  return bad;
}

// --- extremum counting -----------------------------------------------------

struct ExtremaCount {
  std::size_t maxima = 0;
  std::size_t minima = 0;
};

/// Counts sign changes of z' = sin(theta) along the samples, ignoring values
/// inside a dead-band.
inline ExtremaCount count_extrema(const std::vector<ProfileState>& samples,
                                  double dead_band = 1e-10) {
  ExtremaCount out;
  int last = 0;
  for (const ProfileState& st : samples) {
    const double zp = std::sin(st.theta);
    int sign = 0;
    if (zp > dead_band) sign = 1;
    if (zp < -dead_band) sign = -1;
    if (sign == 0) continue;
    if (last > 0 && sign < 0) ++out.maxima;
    if (last < 0 && sign > 0) ++out.minima;
    last = sign;
  }
  return out;
}

// --- verify ----------------------------------------------------------------

namespace detail {

inline void add_check(ClassificationReport& r, std::string name, bool passed,
                      double measured, double tolerance) {
  r.checks.push_back({std::move(name), passed, measured, tolerance});
}

inline void check_le(ClassificationReport& r, std::string name,
                     double measured, double tolerance) {
  add_check(r, std::move(name), measured <= tolerance, measured, tolerance);
}

}  // namespace detail

inline constexpr double kWeingartenTol = 1e-8;
inline constexpr double kSymmetryTol = 1e-8;
inline constexpr double kPeriodicityTol = 1e-8;
inline constexpr double kBoundsTol = 1e-7;

/// Runs the check suite for the regime of the curve's parameters. The report
/// carries every result; callers decide what a failure means.
inline ClassificationReport verify(const ProfileCurve& curve) {
  using detail::add_check;
  using detail::check_le;
  const WeingartenParams& p = curve.params;
  ClassificationReport r;
  r.a = p.a();
  r.b = p.b();
  r.z0 = p.z0();
  r.discriminant = p.discriminant();
  r.f_z0 = p.f_z0();
  r.regime = classify(p);
  r.termination = curve.termination;
  r.milestones = curve.milestones;
  r.period = curve.period;
  if (curve.period) r.x_period = curve.x_period();
  if (curve.singular_end()) {
    r.domain_endpoint = curve.termination.state_event.x;
    r.arclength_endpoint = curve.termination.s_event;
  }

  const std::vector<ProfileState>& smp = curve.samples;
  r.z_min = std::numeric_limits<double>::infinity();
  r.z_max = -std::numeric_limits<double>::infinity();
  double w_res = 0.0, drift = 0.0, umbilic_gap = 1e300, identity_err = 0.0;
  double k_min = 1e300, k_max = -1e300;
  for (const ProfileState& st : smp) {
    r.z_min = std::min(r.z_min, st.z);
    r.z_max = std::max(r.z_max, st.z);
    w_res = std::max(w_res, std::abs(weingarten_residual(p, st)));
    drift = std::max(drift, std::abs(first_integral_residual(p, st.z, st.theta)));
    const double gap = (st.kappa1 - st.kappa2) * (st.kappa1 - st.kappa2);
    umbilic_gap = std::min(umbilic_gap, gap);
    const double scale = 1.0 + std::abs(st.H * st.H) + std::abs(st.K);
    identity_err = std::max(
        identity_err, std::abs(gap - 4.0 * (st.H * st.H - st.K)) / scale);
    k_min = std::min(k_min, st.K);
    k_max = std::max(k_max, st.K);
  }

  const auto expected = expected_termination(r.regime);
  add_check(r, "termination_matches_regime",
            expected && *expected == curve.termination.kind,
            static_cast<double>(curve.termination.kind), 0.0);
  const ProfileState& s0 = smp.front();
  check_le(r, "initial_conditions",
           std::abs(s0.s) + std::abs(s0.x) + std::abs(s0.z - p.z0()) +
               std::abs(s0.theta),
           0.0);
  check_le(r, "weingarten_relation", w_res, kWeingartenTol);
  check_le(r, "first_integral_drift", drift, curve.config.drift_threshold);
  add_check(r, "no_umbilics", umbilic_gap > 0.0 && identity_err <= 1e-10,
            umbilic_gap, 0.0);

  // The regime suite presumes the regime's own termination; a curve that
  // ended otherwise has already failed above.
  if (!r.checks.front().passed) return r;

  switch (r.regime) {
    case Regime::GraphPositiveK:
    case Regime::GraphNegativeK: {
      const bool positive = r.regime == Regime::GraphPositiveK;
      if (positive) {
        add_check(r, "gaussian_curvature_positive", k_min > 0.0, k_min, 0.0);
      } else {
        add_check(r, "gaussian_curvature_negative", k_max < 0.0, k_max, 0.0);
      }
      const ExtremaCount ex = count_extrema(reflect(curve).samples);
      if (positive) {
        add_check(r, "single_maximum", ex.maxima == 1 && ex.minima == 0,
                  static_cast<double>(ex.maxima), 1.0);
      } else {
        add_check(r, "single_minimum", ex.minima == 1 && ex.maxima == 0,
                  static_cast<double>(ex.minima), 1.0);
      }
      // Graph over x and monotone height for s > 0; concave (z'' < 0) or
      // convex (z'' > 0).
      std::size_t x_bad = 0, z_bad = 0, zpp_bad = 0;
      const std::vector<ProfileState> poly = curve.polyline();
      for (std::size_t i = 1; i < poly.size(); ++i) {
        if (!(poly[i].x > poly[i - 1].x)) ++x_bad;
        const double dz = poly[i].z - poly[i - 1].z;
        if (positive ? !(dz < 0.0) : !(dz > 0.0)) ++z_bad;
      }
      for (std::size_t i = 1; i < smp.size(); ++i) {
        const double zpp = std::cos(smp[i].theta) * -smp[i].kappa2;
        if (positive ? !(zpp < 0.0) : !(zpp > 0.0)) ++zpp_bad;
      }
      add_check(r, "graph_x_monotone", x_bad == 0, static_cast<double>(x_bad),
                0.0);
      add_check(r, positive ? "z_decreasing" : "z_increasing", z_bad == 0,
                static_cast<double>(z_bad), 0.0);
      add_check(r, positive ? "concave" : "convex", zpp_bad == 0,
                static_cast<double>(zpp_bad), 0.0);
      const auto hits = detect_self_intersections(reflect(curve));
      r.self_intersections = hits.size();
      add_check(r, "embedded", hits.empty(), static_cast<double>(hits.size()),
                0.0);
      check_le(r, "symmetry_s0", check_symmetry(curve, 0.0), kSymmetryTol);
      break;
    }
    case Regime::Cylinder: {
      double z_dev = 0.0, th_dev = 0.0, k_dev = 0.0, h_dev = 0.0;
      for (const ProfileState& st : smp) {
        z_dev = std::max(z_dev, std::abs(st.z - p.cylinder_height()));
        th_dev = std::max(th_dev, std::abs(st.theta));
        k_dev = std::max(k_dev, std::abs(st.K));
        h_dev = std::max(h_dev, std::abs(st.H - 1.0 / p.a()));
      }
      check_le(r, "height_constant", z_dev, 0.0);
      check_le(r, "theta_zero", th_dev, 0.0);
      check_le(r, "gaussian_curvature_zero", k_dev, 0.0);
      check_le(r, "mean_curvature_inverse_a", h_dev, 1e-15);
      check_le(r, "aH_equals_one", std::abs(p.a() * smp.front().H - 1.0),
               1e-15);
      check_le(r, "symmetry_s0", check_symmetry(curve, 0.0), 0.0);
      break;
    }
    case Regime::Periodic: {
      const double T = *curve.period;
      const PeriodicityDeviation pd = periodicity_check(curve);
      check_le(r, "periodic_z", pd.z, kPeriodicityTol);
      check_le(r, "periodic_theta", pd.theta, kPeriodicityTol);
      check_le(r, "periodic_x", pd.x, kPeriodicityTol);

      const Milestones& m = *curve.milestones;
      add_check(r, "milestones_ordered",
                0.0 < m.t1 && m.t1 < m.t2 && m.t2 < m.t3 && m.t3 < T, m.t2,
                0.0);
      const ProfileState bottom = curve.state_at(m.t2);
      r.z_min = std::min(r.z_min, bottom.z);
      check_le(r, "minimum_at_cos_minus_one",
               std::abs(bottom.z - (p.z0() - p.a())), kBoundsTol);
      check_le(r, "maximum_at_cos_plus_one",
               std::abs(curve.termination.state_event.z - p.z0()) +
                   std::abs(s0.z - p.z0()),
               kBoundsTol);
      const double below = std::max(0.0, (p.z0() - p.a()) - r.z_min);
      const double above = std::max(0.0, r.z_max - p.z0());
      check_le(r, "height_between_bounds", std::max(below, above), kBoundsTol);

      double tp_max = -1e300;
      for (const ProfileState& st : smp) tp_max = std::max(tp_max, -st.kappa2);
      add_check(r, "theta_strictly_decreasing", tp_max < 0.0, tp_max, 0.0);
      add_check(r, "curvature_constant_sign", tp_max < 0.0, tp_max, 0.0);
      check_le(r, "winding_minus_two_pi",
               std::abs(curve.termination.state_event.theta + 2.0 * kPi),
               kPeriodicityTol);
      const std::size_t mono = monotonicity_violations(curve);
      add_check(r, "monotonicity_table", mono == 0, static_cast<double>(mono),
                0.0);
      const std::size_t part = curvature_partition_violations(curve);
      add_check(r, "curvature_sign_partition", part == 0,
                static_cast<double>(part), 0.0);
      const auto hits = detect_self_intersections(reflect(curve));
      r.self_intersections = hits.size();
      add_check(r, "self_intersections", !hits.empty(),
                static_cast<double>(hits.size()), 1.0);
      check_le(r, "symmetry_s0", check_symmetry(curve, 0.0), kSymmetryTol);
      check_le(r, "symmetry_t2", check_symmetry(curve, m.t2), kSymmetryTol);
      break;
    }
    case Regime::Excluded:
      add_check(r, "admissible_parameters", false, 0.0, 0.0);
      break;
  }
  return r;
}

}  // namespace lwrot
