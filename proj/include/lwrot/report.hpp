#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "json.hpp"

#include "lwrot/classify.hpp"
#include "lwrot/phase.hpp"

namespace lwrot {

inline constexpr int kReportSchema = 1;

namespace detail {

inline nlohmann::json real_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline nlohmann::json real_or_null(const std::optional<double>& v) {
  if (!v) return nullptr;
  return real_or_null(*v);
}

inline nlohmann::json state_json(const ProfileState& st) {
  return {{"s", real_or_null(st.s)},         {"x", real_or_null(st.x)},
          {"z", real_or_null(st.z)},         {"theta", real_or_null(st.theta)},
          {"kappa1", real_or_null(st.kappa1)},
          {"kappa2", real_or_null(st.kappa2)},
          {"H", real_or_null(st.H)},         {"K", real_or_null(st.K)}};
}

}  // namespace detail

/// Stable JSON shape of a ClassificationReport.
inline nlohmann::json to_json(const ClassificationReport& r) {
  using detail::real_or_null;
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["params"] = {{"a", r.a},
                 {"b", r.b},
                 {"z0", r.z0},
                 {"discriminant", r.discriminant},
                 {"f_z0", r.f_z0}};
  j["regime"] = std::string(to_string(r.regime));
  nlohmann::json ev;
  ev["termination"] = {
      {"kind", std::string(to_string(r.termination.kind))},
      {"s_event", real_or_null(r.termination.s_event)},
      {"state_event", detail::state_json(r.termination.state_event)}};
  if (r.milestones) {
    ev["milestones"] = {{"t1", r.milestones->t1},
                        {"t2", r.milestones->t2},
                        {"t3", r.milestones->t3}};
  } else {
    ev["milestones"] = nullptr;
  }
  j["events"] = ev;
  nlohmann::json checks = nlohmann::json::array();
  for (const Check& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"measured", real_or_null(c.measured)},
                      {"tolerance", real_or_null(c.tolerance)}});
  }
  j["checks"] = checks;
  j["domain_endpoint"] = real_or_null(r.domain_endpoint);
  j["arclength_endpoint"] = real_or_null(r.arclength_endpoint);
  j["period"] = real_or_null(r.period);
  j["x_period"] = real_or_null(r.x_period);
  j["extrema"] = {{"z_min", real_or_null(r.z_min)},
                  {"z_max", real_or_null(r.z_max)}};
  j["self_intersections"] = r.self_intersections;
  j["all_passed"] = r.all_passed();
  return j;
}

/// Saddles and their linearizations for the phase subcommand.
inline nlohmann::json to_json(const PhasePortrait& pp) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["params"] = {{"a", pp.a}, {"b", pp.b},
                 {"discriminant", pp.a * pp.a + 4.0 * pp.b}};
  j["predicted_eigenvalue"] = 2.0 / std::sqrt(-(pp.a * pp.a + 4.0 * pp.b));
  nlohmann::json sad = nlohmann::json::array();
  for (const SaddleData& s : pp.saddles) {
    const Linearization& l = s.lin;
    sad.push_back(
        {{"theta", s.point.theta},
         {"z", s.point.z},
         {"eigenvalues", {l.eigenvalues[0], l.eigenvalues[1]}},
         {"eigenvectors",
          {{l.eigenvectors[0].theta, l.eigenvectors[0].z},
           {l.eigenvectors[1].theta, l.eigenvectors[1].z}}},
         {"eigenvector_dot", l.eigenvector_dot()},
         {"jacobian",
          {{l.jacobian[0][0], l.jacobian[0][1]},
           {l.jacobian[1][0], l.jacobian[1][1]}}}});
  }
  j["singularities"] = sad;
  nlohmann::json br = nlohmann::json::array();
  for (std::size_t i = 0; i < pp.separatrices.size(); ++i) {
    const SeparatrixBranch& b = pp.separatrices[i];
    br.push_back({{"branch", i},
                  {"start", {b.start.theta, b.start.z}},
                  {"direction", {b.direction.theta, b.direction.z}},
                  {"time_sign", b.time_sign},
                  {"end", std::string(to_string(b.end))},
                  {"points", b.points.size()},
                  {"level_drift", b.level_drift}});
  }
  j["separatrices"] = br;
  return j;
}

}  // namespace lwrot
