#pragma once

// Command-line front end. `run` is kept in a header so tests can drive it
// in-process with captured streams.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lwrot/lwrot.hpp"

namespace lwrot::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kInvalidParams = 2;

struct Options {
  double a = 0.0;
  double b = 0.0;
  double z0 = 0.0;
  double c = 1.0;
  bool mirror = false;
  IntegrationConfig cfg;
  std::string format = "text";
  int n_periods = 1;
  int n_phi = 32;
  int s_stride = 1;
  bool two_sided = false;
  std::string output;
  std::string svg;
  std::string curvature;
  // phase
  std::size_t grid_theta = 64;
  std::size_t grid_z = 64;
  double z_max = 0.0;
  std::string field_path;
  std::string separatrix_path;
  std::string singular_path;
  // sweep
  double b_first = -1.1;
  double b_last = -6.0;
  double z0_first = 0.1;
  double z0_last = 5.0;
  int nb = 50;
  int nz = 50;
  unsigned threads = 0;
};

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string num(double v) { return fmt("%.10g", v); }

/// LW_ROT_TOL replaces the default rel_tol; an explicit --rel-tol wins.
inline void apply_env(IntegrationConfig& cfg) {
  if (const char* env = std::getenv("LW_ROT_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("LW_ROT_TOL is not a positive number: ") + env);
    }
    cfg.rel_tol = v;
  }
}

inline void add_params(CLI::App* sub, Options& o, bool with_z0) {
  sub->add_option("-a", o.a, "coefficient of H")->required();
  sub->add_option("-b", o.b, "coefficient of K")->required();
  if (with_z0) sub->add_option("--z0", o.z0, "initial height")->required();
  sub->add_option("-c,--c", o.c, "right-hand side; (a, b) are divided by it");
  if (with_z0) {
    sub->add_flag("--mirror", o.mirror,
                  "accept a < 0 by mapping (a, b, z0) to (-a, b, -z0)");
  }
}

inline void add_tolerances(CLI::App* sub, Options& o) {
  sub->add_option("--rel-tol", o.cfg.rel_tol);
  sub->add_option("--abs-tol", o.cfg.abs_tol);
  sub->add_option("--max-step", o.cfg.max_step);
  sub->add_option("--max-arclength", o.cfg.max_arclength);
  sub->add_option("--event-tol", o.cfg.event_tol);
  sub->add_option("--drift-threshold", o.cfg.drift_threshold);
}

inline void add_format(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.format)
      ->check(CLI::IsMember({"json", "text"}));
}

inline WeingartenParams resolve(const Options& o, std::ostream& err) {
  auto [a, b] = normalize_c(o.a, o.b, o.c);
  double z0 = o.z0;
  if (o.mirror && a < 0.0) {
    const RawParams m = canonicalize({a, b, z0});
    err << "note: mirrored (a, b, z0) = (" << num(a) << ", " << num(b) << ", "
        << num(z0) << ") to (" << num(m.a) << ", " << num(m.b) << ", "
        << num(m.z0) << ")\n";
    a = m.a;
    b = m.b;
    z0 = m.z0;
  }
  return validate_params(a, b, z0);
}

inline bool is_param_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonFinite:
    case ErrorCode::NotHyperbolic:
    case ErrorCode::NonPositiveA:
    case ErrorCode::NonPositiveZ0:
    case ErrorCode::ExcludedBoundary:
    case ErrorCode::ZeroC:
    case ErrorCode::InvalidArgument:
      return true;
    default:
      return false;
  }
}

inline std::string range_text(double lo, double hi) {
  return "z∈[" + num(lo) + "," + num(hi) + "]";
}

inline std::string summary_line(const ClassificationReport& r) {
  std::string line(to_string(r.regime));
  switch (r.regime) {
    case Regime::Periodic:
      line += ", T=" + num(r.period.value_or(kNaN)) + ", " +
              range_text(r.z_min, r.z_max);
      break;
    case Regime::Cylinder:
      line += ", z≡" + num(r.z0);
      break;
    default:
      line += ", s1=" + num(r.arclength_endpoint.value_or(kNaN)) +
              ", x1=" + num(r.domain_endpoint.value_or(kNaN)) + ", " +
              range_text(r.z_min, r.z_max);
      break;
  }
  return line;
}

inline void print_checks(const ClassificationReport& r, std::ostream& out) {
  out << summary_line(r) << "\n";
  for (const Check& c : r.checks) {
    out << (c.passed ? "  ok    " : "  FAIL  ") << c.name
        << "  measured=" << fmt("%.3e", c.measured)
        << "  tol=" << fmt("%.1e", c.tolerance) << "\n";
  }
  out << (r.all_passed() ? "all checks passed" : "some checks FAILED") << "\n";
}

inline ProfileCurve build_curve(const WeingartenParams& p, const Options& o) {
  ProfileCurve curve = integrate(p, o.cfg);
  if (curve.termination.kind == TerminationKind::PeriodClosed &&
      o.n_periods > 1) {
    curve = extend_periodic(curve, o.n_periods - 1);
  }
  if (o.two_sided) curve = reflect(curve);
  return curve;
}

inline void emit(const std::string& path, const std::string& content,
                 std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file(path, content);
  }
}

// --- subcommands ----------------------------------------------------------

inline int cmd_classify(const Options& o, std::ostream& out, std::ostream& err) {
  const WeingartenParams p = resolve(o, err);
  const ClassificationReport r = verify(integrate(p, o.cfg));
  if (o.format == "json") {
    nlohmann::json j = to_json(r);
    j.erase("checks");
    out << j.dump(2) << "\n";
  } else {
    out << summary_line(r) << "\n";
  }
  return kOk;
}

inline int cmd_integrate(const Options& o, std::ostream& out, std::ostream& err) {
  const WeingartenParams p = resolve(o, err);
  const ProfileCurve curve = build_curve(p, o);
  emit(o.output, to_csv(curve), out);
  if (!o.svg.empty()) write_file(o.svg, to_svg(curve));
  return kOk;
}

inline int cmd_mesh(const Options& o, std::ostream& out, std::ostream& err) {
  const WeingartenParams p = resolve(o, err);
  const ProfileCurve curve = build_curve(p, o);
  const SurfaceMesh mesh = make_mesh(curve, o.n_phi, o.s_stride);
  emit(o.output, to_obj(mesh), out);
  std::string side = o.curvature;
  if (side.empty() && !o.output.empty() && o.output != "-") {
    side = o.output + ".curvature.csv";
  }
  if (!side.empty()) write_file(side, to_curvature_csv(mesh));
  if (!o.svg.empty()) write_file(o.svg, to_svg(curve));
  err << "mesh: " << mesh.vertices.size() << " vertices, " << mesh.faces.size()
      << " faces, " << mesh.n_poles << " axis poles\n";
  return kOk;
}

inline int cmd_phase(const Options& o, std::ostream& out, std::ostream&) {
  auto [a, b] = normalize_c(o.a, o.b, o.c);
  const PhaseParams pp(a, b);
  const PhasePortrait portrait =
      phase_portrait(pp, o.grid_theta, o.grid_z, o.z_max);
  if (!o.field_path.empty()) write_file(o.field_path, to_field_csv(portrait));
  if (!o.separatrix_path.empty()) {
    write_file(o.separatrix_path, to_separatrix_csv(portrait));
  }
  if (!o.singular_path.empty()) {
    write_file(o.singular_path, to_singular_curve_csv(portrait));
  }
  if (!o.svg.empty()) write_file(o.svg, to_svg(portrait));
  std::string report;
  if (o.format == "json") {
    report = to_json(portrait).dump(2) + "\n";
  } else {
    const double predicted = 2.0 / std::sqrt(-pp.discriminant());
    report += "predicted eigenvalues: +-" + num(predicted) + "\n";
    for (const SaddleData& s : portrait.saddles) {
      report += "saddle (" + num(s.point.theta) + ", " + num(s.point.z) +
                "): eigenvalues " + num(s.lin.eigenvalues[0]) + ", " +
                num(s.lin.eigenvalues[1]) + "; eigenvector dot " +
                fmt("%.3e", s.lin.eigenvector_dot()) + "\n";
    }
    for (std::size_t k = 0; k < portrait.separatrices.size(); ++k) {
      const SeparatrixBranch& br = portrait.separatrices[k];
      report += "separatrix " + std::to_string(k) + ": " +
                std::string(br.time_sign > 0 ? "unstable" : "stable") +
                ", ends " + std::string(to_string(br.end)) + ", " +
                std::to_string(br.points.size()) + " points, drift " +
                fmt("%.2e", br.level_drift) + "\n";
    }
  }
  emit(o.output, report, out);
  return kOk;
}

inline int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const WeingartenParams p = resolve(o, err);
  const ClassificationReport r = verify(integrate(p, o.cfg));
  std::string text;
  if (o.format == "json") {
    text = to_json(r).dump(2) + "\n";
  } else {
    std::ostringstream ss;
    print_checks(r, ss);
    text = ss.str();
  }
  emit(o.output, text, out);
  return r.all_passed() ? kOk : kCheckFailed;
}

struct SweepCell {
  double b = 0.0;
  double z0 = 0.0;
  Regime regime = Regime::Excluded;
  bool rejected = false;
  bool matched = false;
  bool passed = false;
  std::string observed;
  std::string error;
};

inline char regime_glyph(const SweepCell& c) {
  if (c.rejected) return 'x';
  if (!c.error.empty()) return '!';
  switch (c.regime) {
    case Regime::GraphPositiveK: return '+';
    case Regime::Cylinder: return '=';
    case Regime::GraphNegativeK: return '-';
    case Regime::Periodic: return 'o';
    case Regime::Excluded: return 'x';
  }
  return '?';
}

inline SweepCell sweep_cell(double a, double b, double z0,
                            const IntegrationConfig& cfg) {
  SweepCell cell;
  cell.b = b;
  cell.z0 = z0;
  try {
    const WeingartenParams p = validate_params(a, b, z0);
    cell.regime = classify(p);
    const ProfileCurve curve = integrate(p, cfg);
    cell.observed = std::string(to_string(curve.termination.kind));
    cell.matched = expected_termination(cell.regime) == curve.termination.kind;
    cell.passed = verify(curve).all_passed();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ExcludedBoundary) {
      cell.rejected = true;
      cell.regime = Regime::Excluded;
    } else {
      cell.error = e.what();
    }
  }
  return cell;
}

inline double grid_value(double first, double last, int n, int i) {
  if (n == 1) return first;
  return first + (last - first) * static_cast<double>(i) / (n - 1);
}

/// Evaluates every cell, concurrently when threads > 1. Results are stored
/// by index so the output order never depends on scheduling.
inline std::vector<SweepCell> run_sweep(double a, const Options& o) {
  const std::size_t total = static_cast<std::size_t>(o.nb) * o.nz;
  std::vector<SweepCell> cells(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const int i = static_cast<int>(k / o.nz);
      const int j = static_cast<int>(k % o.nz);
      cells[k] = sweep_cell(a, grid_value(o.b_first, o.b_last, o.nb, i),
                            grid_value(o.z0_first, o.z0_last, o.nz, j), o.cfg);
    }
  };
  unsigned n = o.threads ? o.threads : std::thread::hardware_concurrency();
  n = std::clamp(n, 1u, 64u);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return cells;
}

inline int cmd_sweep(const Options& o, std::ostream& out, std::ostream&) {
  if (o.nb < 1 || o.nz < 1) {
    throw Error(ErrorCode::InvalidArgument, "grid sizes must be >= 1");
  }
  auto [a, unused] = normalize_c(o.a, 0.0, o.c);
  (void)unused;
  if (!(a > 0.0)) throw Error(ErrorCode::NonPositiveA, "a must be positive");
  for (int i = 0; i < o.nb; ++i) {
    const double b = grid_value(o.b_first, o.b_last, o.nb, i) / o.c;
    if (!(a * a + 4.0 * b < 0.0)) {
      throw Error(ErrorCode::NotHyperbolic,
                  "not hyperbolic: Δ=" + num(a * a + 4.0 * b) + " at b=" +
                      num(b));
    }
  }
  Options scaled = o;
  scaled.b_first = o.b_first / o.c;
  scaled.b_last = o.b_last / o.c;
  const std::vector<SweepCell> cells = run_sweep(a, scaled);

  std::size_t rejected = 0, matched = 0, evaluated = 0, passed = 0, errors = 0;
  std::size_t per_regime[4] = {0, 0, 0, 0};
  for (const SweepCell& c : cells) {
    if (c.rejected) {
      ++rejected;
      continue;
    }
    if (!c.error.empty()) {
      ++errors;
      continue;
    }
    ++evaluated;
    matched += c.matched;
    passed += c.passed;
    ++per_regime[static_cast<int>(c.regime)];
  }
  const bool ok = errors == 0 && matched == evaluated && passed == evaluated;

  if (o.format == "json") {
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["a"] = a;
    j["grid"] = {{"nb", o.nb}, {"nz", o.nz}};
    nlohmann::json arr = nlohmann::json::array();
    for (const SweepCell& c : cells) {
      nlohmann::json e{{"b", c.b},
                       {"z0", c.z0},
                       {"regime", c.rejected ? "Excluded"
                                             : std::string(to_string(c.regime))},
                       {"rejected", c.rejected}};
      if (!c.rejected && c.error.empty()) {
        e["observed"] = c.observed;
        e["matched"] = c.matched;
        e["checks_passed"] = c.passed;
      }
      if (!c.error.empty()) e["error"] = c.error;
      arr.push_back(std::move(e));
    }
    j["cells"] = std::move(arr);
    j["summary"] = {{"evaluated", evaluated}, {"rejected", rejected},
                    {"matched", matched},     {"checks_passed", passed},
                    {"errors", errors},       {"all_passed", ok}};
    emit(o.output, j.dump(2) + "\n", out);
    return ok ? kOk : kCheckFailed;
  }

  std::ostringstream ss;
  ss << "regime map at a=" << num(a)
     << "  (+ K>0 graph, = cylinder, - K<0 graph, o periodic, x rejected)\n";
  ss << "rows: z0 from " << num(o.z0_last) << " down to " << num(o.z0_first)
     << "; columns: b from " << num(scaled.b_first) << " to "
     << num(scaled.b_last) << "\n";
  for (int j = o.nz - 1; j >= 0; --j) {
    ss << fmt("%8.4f ", grid_value(o.z0_first, o.z0_last, o.nz, j)) << "|";
    for (int i = 0; i < o.nb; ++i) {
      const SweepCell& c = cells[static_cast<std::size_t>(i) * o.nz + j];
      char g = regime_glyph(c);
      if (!c.rejected && c.error.empty() && (!c.matched || !c.passed)) g = '#';
      ss << g;
    }
    ss << "\n";
  }
  ss << "boundaries: z0 = a/2 = " << num(0.5 * a)
     << " (all columns); z0 = -2b/a per column\n";
  ss << "GraphPositiveK " << per_regime[0] << ", Cylinder " << per_regime[1]
     << ", GraphNegativeK " << per_regime[2] << ", Periodic " << per_regime[3]
     << ", rejected " << rejected << "\n";
  ss << "termination matches regime: " << matched << "/" << evaluated
     << "; all checks passed: " << passed << "/" << evaluated
     << "; errors: " << errors << "\n";
  for (const SweepCell& c : cells) {
    if (!c.error.empty()) {
      ss << "error at b=" << num(c.b) << " z0=" << num(c.z0) << ": " << c.error
         << "\n";
    } else if (!c.rejected && (!c.matched || !c.passed)) {
      ss << "mismatch at b=" << num(c.b) << " z0=" << num(c.z0) << ": "
         << to_string(c.regime) << " ended " << c.observed
         << (c.passed ? "" : " (checks failed)") << "\n";
    }
  }
  emit(o.output, ss.str(), out);
  return ok ? kOk : kCheckFailed;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  Options o;
  CLI::App app{"Rotational linear Weingarten surfaces of hyperbolic type"};
  app.require_subcommand(1);

  CLI::App* classify_cmd = app.add_subcommand("classify", "print the regime");
  detail::add_params(classify_cmd, o, true);
  detail::add_tolerances(classify_cmd, o);
  detail::add_format(classify_cmd, o);

  CLI::App* integrate_cmd =
      app.add_subcommand("integrate", "write the profile curve as CSV");
  detail::add_params(integrate_cmd, o, true);
  detail::add_tolerances(integrate_cmd, o);
  integrate_cmd->add_option("-o,--output", o.output, "CSV path (default stdout)");
  integrate_cmd->add_option("--svg", o.svg, "also write an SVG profile plot");
  integrate_cmd->add_option("--n-periods", o.n_periods)->check(CLI::PositiveNumber);
  integrate_cmd->add_flag("--two-sided", o.two_sided,
                          "include the mirrored half s < 0");

  CLI::App* mesh_cmd = app.add_subcommand("mesh", "write the surface as OBJ");
  detail::add_params(mesh_cmd, o, true);
  detail::add_tolerances(mesh_cmd, o);
  mesh_cmd->add_option("-o,--output", o.output, "OBJ path (default stdout)");
  mesh_cmd->add_option("--curvature", o.curvature,
                       "curvature sidecar CSV (default <output>.curvature.csv)");
  mesh_cmd->add_option("--svg", o.svg);
  mesh_cmd->add_option("--n-periods", o.n_periods)->check(CLI::PositiveNumber);
  mesh_cmd->add_option("--n-phi", o.n_phi)->check(CLI::Range(3, 1 << 20));
  mesh_cmd->add_option("--s-stride", o.s_stride)->check(CLI::PositiveNumber);
  mesh_cmd->add_flag("--two-sided", o.two_sided);

  CLI::App* phase_cmd = app.add_subcommand("phase", "phase portrait in (theta, z)");
  detail::add_params(phase_cmd, o, false);
  detail::add_format(phase_cmd, o);
  phase_cmd->add_option("-o,--output", o.output, "report path (default stdout)");
  phase_cmd->add_option("--field", o.field_path, "field grid CSV");
  phase_cmd->add_option("--separatrices", o.separatrix_path, "separatrix CSV");
  phase_cmd->add_option("--singular-curve", o.singular_path, "singular curve CSV");
  phase_cmd->add_option("--svg", o.svg);
  phase_cmd->add_option("--n-theta", o.grid_theta)->check(CLI::Range(2, 100000));
  phase_cmd->add_option("--n-z", o.grid_z)->check(CLI::Range(1, 100000));
  phase_cmd->add_option("--z-max", o.z_max);

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the check suite");
  detail::add_params(verify_cmd, o, true);
  detail::add_tolerances(verify_cmd, o);
  detail::add_format(verify_cmd, o);
  verify_cmd->add_option("-o,--output", o.output);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "verify over a (b, z0) grid at fixed a");
  sweep_cmd->add_option("-a", o.a)->required();
  sweep_cmd->add_option("-c,--c", o.c);
  detail::add_tolerances(sweep_cmd, o);
  detail::add_format(sweep_cmd, o);
  sweep_cmd->add_option("-o,--output", o.output);
  sweep_cmd->add_option("--b-first", o.b_first);
  sweep_cmd->add_option("--b-last", o.b_last);
  sweep_cmd->add_option("--z0-first", o.z0_first);
  sweep_cmd->add_option("--z0-last", o.z0_last);
  sweep_cmd->add_option("--nb", o.nb)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--nz", o.nz)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--threads", o.threads);

  try {
    detail::apply_env(o.cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidParams;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidParams;
  }

  try {
    o.cfg.validate();
    if (*classify_cmd) return detail::cmd_classify(o, out, err);
    if (*integrate_cmd) return detail::cmd_integrate(o, out, err);
    if (*mesh_cmd) return detail::cmd_mesh(o, out, err);
    if (*phase_cmd) return detail::cmd_phase(o, out, err);
    if (*verify_cmd) return detail::cmd_verify(o, out, err);
    if (*sweep_cmd) return detail::cmd_sweep(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return detail::is_param_error(e.code()) ? kInvalidParams : kCheckFailed;
  }
  return kInvalidParams;
}

}  // namespace lwrot::cli
