#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "lwrot/core.hpp"
#include "lwrot/dopri5.hpp"
#include "lwrot/error.hpp"
#include "lwrot/params.hpp"

namespace lwrot {

struct IntegrationConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.05;
  /// Safety cap on the arclength of a single integration.
  double max_arclength = 1e4;
  /// Bracket width at which event root-finding stops.
  double event_tol = 1e-12;
  /// Largest |E(s)| accepted before the integration is declared failed.
  double drift_threshold = 1e-8;
  /// When false, integration runs through theta = -2pi until max_arclength
  /// and ends with an ArclengthCap event instead.
  bool stop_at_period = true;
  /// Length of the exact line returned for the stationary solution.
  double stationary_length = 10.0;

  void validate() const {
    const bool ok = rel_tol > 0.0 && abs_tol > 0.0 && max_step > 0.0 &&
                    max_arclength > 0.0 && event_tol > 0.0 &&
                    drift_threshold > 0.0 && stationary_length > 0.0;
    if (!ok) {
      throw Error(ErrorCode::InvalidArgument,
                  "integration tolerances and lengths must be positive");
    }
  }
};

enum class TerminationKind {
  AxisContact,
  DenominatorBlowup,
  PeriodClosed,
  Stationary,
  ArclengthCap,
};

inline std::string_view to_string(TerminationKind k) {
  switch (k) {
    case TerminationKind::AxisContact: return "AxisContact";
    case TerminationKind::DenominatorBlowup: return "DenominatorBlowup";
    case TerminationKind::PeriodClosed: return "PeriodClosed";
    case TerminationKind::Stationary: return "Stationary";
    case TerminationKind::ArclengthCap: return "ArclengthCap";
  }
  return "Unknown";
}

struct TerminationEvent {
  TerminationKind kind;
  double s_event = 0.0;
  ProfileState state_event;
};

/// Arclengths where theta first reaches -pi/2, -pi and -3pi/2.
struct Milestones {
  double t1;
  double t2;
  double t3;
};

enum class StepMode { Arclength, Angle };

namespace detail {

using Vec4 = ode::Vec<4>;  // (s, x, z, theta)
inline constexpr std::size_t kS = 0;
inline constexpr std::size_t kX = 1;
inline constexpr std::size_t kZ = 2;
inline constexpr std::size_t kTheta = 3;

// |theta'| thresholds for switching the independent variable.
inline constexpr double kSwitchToAngle = 1e3;
inline constexpr double kSwitchToArclength = 1e2;

/// Derivative of (s, x, z, theta) with respect to the step parameter.
/// Arclength mode steps s by sigma; angle mode steps theta by sigma and
/// integrates ds/dtheta = D/N, which stays finite where theta' blows up.
struct Field {
  const WeingartenParams* p;
  StepMode mode;
  double sigma;

  Vec4 operator()(const Vec4& y) const {
    const double c = std::cos(y[kTheta]);
    const double sn = std::sin(y[kTheta]);
    const double num = p->a() * c - 2.0 * y[kZ];
    const double den = p->a() * y[kZ] + 2.0 * p->b() * c;
    if (mode == StepMode::Arclength) {
      return {sigma, sigma * c, sigma * sn, sigma * num / den};
    }
    const double ds = sigma * den / num;
    return {ds, c * ds, sn * ds, sigma};
  }
};

/// An accepted integration node. Stepping from y by h in `mode` reaches the
/// next node; any shorter step gives the interior of that interval.
struct DenseNode {
  Vec4 y;
  StepMode mode;
  double sigma;
  double h;
};

struct TraceEvent {
  std::function<double(const Vec4&)> g;
  bool terminal = false;
  int direction = 0;  // +1 rising, -1 falling, 0 either
};

struct TraceResult {
  std::vector<DenseNode> nodes;
  std::vector<std::optional<Vec4>> hits;
  std::optional<std::size_t> terminal_event;
  double accumulated_error = 0.0;
  double max_drift = 0.0;
};

inline double theta_prime_raw(const WeingartenParams& p, const Vec4& y) {
  return theta_numerator(p, y[kZ], y[kTheta]) /
         theta_denominator(p, y[kZ], y[kTheta]);
}

inline Vec4 restep(const WeingartenParams& p, const DenseNode& node,
                   double h) {
  if (h == 0.0) return node.y;
  return ode::dopri5_step<4>(Field{&p, node.mode, node.sigma}, node.y, h).y;
}

inline bool crosses(double g0, double g1, int direction) {
  if (g0 == 0.0) return false;
  const bool rising = g0 < 0.0 && g1 >= 0.0;
  const bool falling = g0 > 0.0 && g1 <= 0.0;
  if (direction > 0) return rising;
  if (direction < 0) return falling;
  return rising || falling;
}

/// Root of G(h) on [0, h_max] where G(0) = g0, G(h_max) = g1 of opposite sign.
template <class G>
double locate_root(const G& fn, double h_max, double g0, double g1,
                   double tol) {
  if (g1 == 0.0) return h_max;
  std::uintmax_t max_iter = 200;
  auto stop = [tol](double lo, double hi) { return hi - lo <= tol; };
  auto [lo, hi] = boost::math::tools::toms748_solve(fn, 0.0, h_max, g0, g1,
                                                    stop, max_iter);
  return std::abs(fn(lo)) <= std::abs(fn(hi)) ? lo : hi;
}

/// Adaptive integration from y0 in the direction `dir` of arclength until
/// a terminal event fires. Each event fires at most once.
/// `angle_sigma0`, when nonzero, fixes the orientation of the first
/// angle-mode step; starting on the singular curve the sign of theta' is
/// not defined by the state alone.
inline TraceResult trace(const WeingartenParams& p,
                         const IntegrationConfig& cfg, const Vec4& y0,
                         double dir, const std::vector<TraceEvent>& events,
                         double angle_sigma0 = 0.0) {
  TraceResult out;
  out.hits.assign(events.size(), std::nullopt);
  std::vector<double> g_prev(events.size());
  std::vector<bool> fired(events.size(), false);
  for (std::size_t i = 0; i < events.size(); ++i) g_prev[i] = events[i].g(y0);

  Vec4 y = y0;
  double h = std::min(cfg.max_step, 1e-3);
  StepMode mode = StepMode::Arclength;
  constexpr std::size_t kMaxSteps = 50'000'000;

  const double e0 = std::abs(first_integral_residual(p, y[kZ], y[kTheta]));
  out.max_drift = e0;

  for (std::size_t n = 0; n < kMaxSteps; ++n) {
    const double tp = theta_prime_raw(p, y);
    if (mode == StepMode::Arclength && std::abs(tp) > kSwitchToAngle) {
      mode = StepMode::Angle;
      h *= std::abs(tp);
    } else if (mode == StepMode::Angle && std::abs(tp) < kSwitchToArclength) {
      mode = StepMode::Arclength;
      h /= std::abs(tp);
    }
    h = std::min(h, cfg.max_step);
    double sigma =
        mode == StepMode::Arclength ? dir : dir * (tp > 0.0 ? 1.0 : -1.0);
    if (n == 0 && mode == StepMode::Angle && angle_sigma0 != 0.0) {
      sigma = angle_sigma0 > 0.0 ? 1.0 : -1.0;
    }
    const Field field{&p, mode, sigma};
    const double den0 = theta_denominator(p, y[kZ], y[kTheta]);

    bool rejected = false;
    ode::StepResult<4> trial;
    double err = 0.0;
    for (;;) {
      const double scale =
          1.0 + std::max(std::abs(y[kS]), std::abs(y[kTheta]));
      if (h < 1e-15 * scale) {
        throw Error(ErrorCode::StepSizeUnderflow,
                    "step size underflow at s=" + std::to_string(y[kS]));
      }
      trial = ode::dopri5_step<4>(field, y, h);
      bool finite = true;
      for (double v : trial.y) finite = finite && std::isfinite(v);
      bool jumped = false;
      if (finite && mode == StepMode::Arclength) {
        const double den1 = theta_denominator(p, trial.y[kZ], trial.y[kTheta]);
        jumped = (den0 > 0.0) != (den1 > 0.0);
      }
      if (!finite || jumped) {
        h *= 0.25;
        rejected = true;
        continue;
      }
      err = ode::error_norm<4>(y, trial.y, trial.err, cfg.rel_tol,
                               cfg.abs_tol);
      if (err <= 1.0) break;
      h = ode::next_step(h, err, true);
      rejected = true;
    }

    const DenseNode node{y, mode, sigma, h};
    std::vector<double> g_new(events.size());
    std::vector<std::pair<std::size_t, double>> crossings;
    double h_end = h;
    std::optional<std::size_t> term;
    for (std::size_t i = 0; i < events.size(); ++i) {
      g_new[i] = events[i].g(trial.y);
      if (fired[i] || !crosses(g_prev[i], g_new[i], events[i].direction)) {
        continue;
      }
      auto fn = [&](double hh) { return events[i].g(restep(p, node, hh)); };
      const double hr = locate_root(fn, h, g_prev[i], g_new[i], cfg.event_tol);
      crossings.emplace_back(i, hr);
      if (events[i].terminal && (!term || hr < h_end)) {
        h_end = hr;
        term = i;
      }
    }
    for (auto [i, hr] : crossings) {
      if (hr > h_end) continue;
      if (events[i].terminal && term != i) continue;
      out.hits[i] = restep(p, node, hr);
      fired[i] = true;
    }

    const Vec4 y_next = term ? restep(p, node, h_end) : trial.y;
    out.nodes.push_back({y, mode, sigma, h_end});
    double step_err = 0.0;
    for (double e : trial.err) step_err = std::max(step_err, std::abs(e));
    out.accumulated_error += step_err;
    y = y_next;

    const double drift = std::abs(first_integral_residual(p, y[kZ], y[kTheta]));
    out.max_drift = std::max(out.max_drift, drift);
    if (drift > cfg.drift_threshold) {
      throw Error(ErrorCode::DriftExceeded,
                  "first integral drift " + std::to_string(drift) +
                      " exceeds threshold at s=" + std::to_string(y[kS]));
    }

    if (term) {
      out.nodes.push_back({y, mode, sigma, 0.0});
      out.terminal_event = term;
      return out;
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
      g_prev[i] = events[i].g(y);
    }
    h = ode::next_step(h, err, rejected);
  }
  throw Error(ErrorCode::CapReached, "integration step budget exhausted");
}

/// Arclength-crossing event at a target s, in the direction of travel.
inline TraceEvent arclength_event(double s_target, double dir,
                                  bool terminal) {
  return {[s_target, dir](const Vec4& y) { return dir * (y[kS] - s_target); },
          terminal, +1};
}

/// Evaluate the state at arclength s inside a dense record whose s values
/// run in direction `dir` (+1 forward, -1 backward).
inline Vec4 dense_eval(const WeingartenParams& p,
                       const std::vector<DenseNode>& nodes, double s,
                       double tol, double dir = 1.0) {
  if (nodes.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no dense record");
  }
  const double key = dir * s;
  auto it = std::upper_bound(
      nodes.begin(), nodes.end(), key,
      [dir](double v, const DenseNode& n) { return v < dir * n.y[kS]; });
  if (it == nodes.begin()) {
    throw Error(ErrorCode::InvalidArgument, "arclength before curve start");
  }
  const DenseNode& node = *(it - 1);
  if (node.y[kS] == s) return node.y;
  if (it == nodes.end()) {
    if (dir * (s - node.y[kS]) <= 1e-12 * (1.0 + std::abs(s))) return node.y;
    throw Error(ErrorCode::InvalidArgument, "arclength past curve end");
  }
  const double ds_total = it->y[kS] - node.y[kS];
  if (node.mode == StepMode::Arclength) {
    return restep(p, node, (s - node.y[kS]) * node.h / ds_total);
  }
  auto fn = [&](double hh) { return dir * (restep(p, node, hh)[kS] - s); };
  const double hr = locate_root(fn, node.h, dir * (node.y[kS] - s),
                                dir * (it->y[kS] - s), tol);
  return restep(p, node, hr);
}

/// Terminal events for the singular ends of the domain.
inline std::vector<TraceEvent> singular_events(const WeingartenParams& p) {
  const double eps_axis = 1e-10 * p.z0();
  return {
      {[eps_axis](const Vec4& y) { return y[kZ] - eps_axis; }, true, -1},
      {[&p](const Vec4& y) { return theta_denominator(p, y[kZ], y[kTheta]); },
       true, 0},
  };
}

/// Integrates from y0 over `length` of arclength in direction dir, or until
/// a singular end is met. Returns the dense record.
inline TraceResult trace_span(const WeingartenParams& p,
                              const IntegrationConfig& cfg, const Vec4& y0,
                              double dir, double length) {
  std::vector<TraceEvent> events = singular_events(p);
  events.push_back(arclength_event(y0[kS] + dir * length, dir, true));
  return trace(p, cfg, y0, dir, events);
}

}  // namespace detail

/// A sampled profile curve with its terminating event. `samples` hold
/// regular states with strictly increasing s; singular end points live in
/// `termination` (and the mirrored start when two-sided).
class ProfileCurve {
 public:
  explicit ProfileCurve(const WeingartenParams& params) : params(params) {}

  WeingartenParams params;
  IntegrationConfig config;
  std::vector<ProfileState> samples;
  TerminationEvent termination{TerminationKind::ArclengthCap, 0.0, {}};
  std::optional<double> period;
  std::optional<Milestones> milestones;
  /// Sum of per-step local error estimates (max component).
  double accumulated_error = 0.0;
  double max_drift = 0.0;
  /// True once reflect() has added the s < 0 branch.
  bool two_sided = false;
  std::vector<detail::DenseNode> nodes;

  double s_begin() const { return samples.front().s; }
  double s_end() const { return termination.s_event; }

  bool singular_end() const {
    return termination.kind == TerminationKind::AxisContact ||
           termination.kind == TerminationKind::DenominatorBlowup;
  }

  /// x(T) for a periodic curve.
  double x_period() const {
    if (!period) throw Error(ErrorCode::NotPeriodic, "curve is not periodic");
    return x_period_;
  }
  void set_period(double T, double xT) {
    period = T;
    x_period_ = xT;
  }

  /// State at arclength s, evaluated by re-stepping from the nearest node.
  ProfileState state_at(double s) const {
    if (two_sided && s < 0.0) {
      ProfileState st = state_at(-s);
      return mirror(st);
    }
    if (termination.kind == TerminationKind::Stationary) {
      return make_state(params, s, s, params.cylinder_height(), 0.0);
    }
    if (singular_end() && s >= nodes.back().y[detail::kS]) {
      if (s == termination.s_event) return termination.state_event;
      if (s > termination.s_event) {
        throw Error(ErrorCode::InvalidArgument, "arclength past curve end");
      }
    }
    const detail::Vec4 y =
        detail::dense_eval(params, nodes, s, config.event_tol);
    return make_state(params, s, y[detail::kX], y[detail::kZ],
                      y[detail::kTheta]);
  }

  /// Samples plus the singular end points, in order of s.
  std::vector<ProfileState> polyline() const {
    std::vector<ProfileState> out;
    out.reserve(samples.size() + 2);
    if (two_sided && singular_end()) out.push_back(mirror(termination.state_event));
    out.insert(out.end(), samples.begin(), samples.end());
    if (singular_end()) out.push_back(termination.state_event);
    return out;
  }

  static ProfileState mirror(ProfileState st) {
    st.s = -st.s;
    st.x = -st.x;
    st.theta = -st.theta;
    // kappa1, kappa2, H and K are invariant under the reflection.
    return st;
  }

 private:
  double x_period_ = 0.0;
};

namespace detail {

inline bool well_conditioned(const WeingartenParams& p, const Vec4& y) {
  return y[kZ] >= 1e-6 * p.z0() && std::abs(theta_prime_raw(p, y)) <= 1e6;
}

inline void fill_samples(ProfileCurve& curve) {
  const WeingartenParams& p = curve.params;
  for (const DenseNode& n : curve.nodes) {
    const bool first = curve.samples.empty();
    if (!first && !(n.y[kS] > curve.samples.back().s)) continue;
    if (!first && !well_conditioned(p, n.y)) continue;
    curve.samples.push_back(
        make_state(p, n.y[kS], n.y[kX], n.y[kZ], n.y[kTheta]));
  }
}

inline ProfileCurve stationary_curve(const WeingartenParams& p,
                                     const IntegrationConfig& cfg) {
  ProfileCurve curve(p);
  curve.config = cfg;
  const double L = cfg.stationary_length;
  const int n = std::max(2, static_cast<int>(std::ceil(L / cfg.max_step)) + 1);
  for (int i = 0; i < n; ++i) {
    const double s = L * static_cast<double>(i) / static_cast<double>(n - 1);
    curve.samples.push_back(make_state(p, s, s, p.cylinder_height(), 0.0));
  }
  curve.termination = {TerminationKind::Stationary, L, curve.samples.back()};
  return curve;
}

}  // namespace detail

inline bool is_stationary(const WeingartenParams& p) {
  return std::abs(p.z0() - p.cylinder_height()) < 1e-12 * p.a();
}

/// Integrates the profile system from (x, z, theta) = (0, z0, 0) until the
/// first of: axis contact, blow-up of theta', closure of one period.
inline ProfileCurve integrate(const WeingartenParams& p,
                              const IntegrationConfig& cfg = {}) {
  using namespace detail;
  cfg.validate();
  if (is_stationary(p)) return stationary_curve(p, cfg);

  const double eps_axis = 1e-10 * p.z0();
  enum : std::size_t { kAxis, kBlowup, kPeriod, kT1, kT2, kT3, kCap };
  std::vector<TraceEvent> events(7);
  events[kAxis] = {[eps_axis](const Vec4& y) { return y[kZ] - eps_axis; },
                   true, -1};
  events[kBlowup] = {[&p](const Vec4& y) {
                       return theta_denominator(p, y[kZ], y[kTheta]);
                     },
                     true, 0};
  events[kPeriod] = {[](const Vec4& y) { return y[kTheta] + 2.0 * kPi; },
                     cfg.stop_at_period, 0};
  events[kT1] = {[](const Vec4& y) { return y[kTheta] + 0.5 * kPi; }, false, 0};
  events[kT2] = {[](const Vec4& y) { return y[kTheta] + kPi; }, false, 0};
  events[kT3] = {[](const Vec4& y) { return y[kTheta] + 1.5 * kPi; }, false,
                 0};
  events[kCap] = arclength_event(cfg.max_arclength, 1.0, true);

  const Vec4 y0{0.0, 0.0, p.z0(), 0.0};
  TraceResult tr = trace(p, cfg, y0, 1.0, events);

  ProfileCurve curve(p);
  curve.config = cfg;
  curve.nodes = std::move(tr.nodes);
  curve.accumulated_error = tr.accumulated_error;
  curve.max_drift = tr.max_drift;

  if (tr.hits[kPeriod]) {
    const Vec4& yT = *tr.hits[kPeriod];
    curve.set_period(yT[kS], yT[kX]);
  }
  if (tr.hits[kT1] && tr.hits[kT2] && tr.hits[kT3]) {
    curve.milestones =
        Milestones{(*tr.hits[kT1])[kS], (*tr.hits[kT2])[kS],
                   (*tr.hits[kT3])[kS]};
  }

  const Vec4 y_end = curve.nodes.back().y;
  switch (*tr.terminal_event) {
    case kAxis: {
      // Extrapolate from z = eps_axis to z = 0 with a second-order Taylor
      // model; curvatures are undefined on the axis.
      const double tp = theta_prime_raw(p, y_end);
      const double zp = std::sin(y_end[kTheta]);
      const double zpp = std::cos(y_end[kTheta]) * tp;
      double ds = -y_end[kZ] / zp;
      ds = ds - (0.5 * zpp * ds * ds) / (zp + zpp * ds);
      const double x = y_end[kX] + std::cos(y_end[kTheta]) * ds -
                       0.5 * std::sin(y_end[kTheta]) * tp * ds * ds;
      const double theta = y_end[kTheta] + tp * ds;
      const double s = y_end[kS] + ds;
      curve.termination = {TerminationKind::AxisContact, s,
                           make_singular_state(s, x, 0.0, theta)};
      break;
    }
    case kBlowup:
      curve.termination = {
          TerminationKind::DenominatorBlowup, y_end[kS],
          make_singular_state(y_end[kS], y_end[kX], y_end[kZ],
                              y_end[kTheta])};
      break;
    case kPeriod:
      curve.termination = {TerminationKind::PeriodClosed, y_end[kS],
                           make_state(p, y_end[kS], y_end[kX], y_end[kZ],
                                      y_end[kTheta])};
      break;
    case kCap:
      if (cfg.stop_at_period) {
        throw Error(ErrorCode::CapReached,
                    "max_arclength " + std::to_string(cfg.max_arclength) +
                        " reached before any terminating event");
      }
      curve.termination = {TerminationKind::ArclengthCap, y_end[kS],
                           make_state(p, y_end[kS], y_end[kX], y_end[kZ],
                                      y_end[kTheta])};
      break;
    default:
      throw Error(ErrorCode::InvalidArgument, "unexpected terminal event");
  }
  fill_samples(curve);
  return curve;
}

/// Appends n translated copies of one closed period: x shifts by x(T),
/// theta by -2pi and s by T per copy. No re-integration.
inline ProfileCurve extend_periodic(const ProfileCurve& curve, int n_periods) {
  if (n_periods < 0) {
    throw Error(ErrorCode::InvalidArgument, "n_periods must be >= 0");
  }
  if (curve.termination.kind != TerminationKind::PeriodClosed ||
      !curve.period || curve.two_sided) {
    throw Error(ErrorCode::NotPeriodic,
                "extend_periodic needs a one-sided PeriodClosed curve");
  }
  if (n_periods == 0) return curve;

  const double T = *curve.period;
  const double xT = curve.x_period();
  const std::vector<ProfileState>& base = curve.samples;
  const std::vector<detail::DenseNode>& base_nodes = curve.nodes;

  ProfileCurve out = curve;
  out.samples.clear();
  out.nodes.clear();
  auto shift_state = [&](ProfileState st, int k) {
    st.s += k * T;
    st.x += k * xT;
    st.theta -= 2.0 * kPi * k;
    return st;
  };
  auto shift_node = [&](detail::DenseNode nd, int k) {
    nd.y[detail::kS] += k * T;
    nd.y[detail::kX] += k * xT;
    nd.y[detail::kTheta] -= 2.0 * kPi * k;
    return nd;
  };
  // The integrated end of each period is replaced by the translated start,
  // so copies agree exactly.
  for (int k = 0; k <= n_periods; ++k) {
    for (std::size_t i = 0; i + 1 < base.size(); ++i) {
      out.samples.push_back(shift_state(base[i], k));
    }
    for (std::size_t i = 0; i + 1 < base_nodes.size(); ++i) {
      out.nodes.push_back(shift_node(base_nodes[i], k));
    }
  }
  out.samples.push_back(shift_state(base.front(), n_periods + 1));
  detail::DenseNode last = shift_node(base_nodes.front(), n_periods + 1);
  last.h = 0.0;
  out.nodes.push_back(last);
  out.termination.s_event = out.samples.back().s;
  out.termination.state_event = out.samples.back();
  return out;
}

/// Adds the s < 0 branch through (x, z, theta)(-s) = (-x, z, -theta)(s).
inline ProfileCurve reflect(const ProfileCurve& curve) {
  if (curve.two_sided) return curve;
  ProfileCurve out = curve;
  out.samples.clear();
  out.samples.reserve(2 * curve.samples.size() - 1);
  for (std::size_t i = curve.samples.size(); i-- > 1;) {
    out.samples.push_back(ProfileCurve::mirror(curve.samples[i]));
  }
  out.samples.insert(out.samples.end(), curve.samples.begin(),
                     curve.samples.end());
  out.two_sided = true;
  return out;
}

}  // namespace lwrot
