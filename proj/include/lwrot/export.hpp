#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lwrot/classify.hpp"
#include "lwrot/core.hpp"
#include "lwrot/error.hpp"
#include "lwrot/integrate.hpp"
#include "lwrot/mesh.hpp"
#include "lwrot/phase.hpp"

namespace lwrot {

inline constexpr std::string_view kCsvHeader = "s,x,z,theta,kappa1,kappa2,H,K,E";

namespace detail {

/// 17 significant digits; non-finite values become empty cells.
inline void put_real(std::string& out, double v) {
  if (!std::isfinite(v)) return;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

/// Fixed-point coordinate for SVG output.
inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

inline double parse_real(std::string_view cell) {
  if (cell.empty()) return kNaN;
  const std::string tmp(cell);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) {
    throw Error(ErrorCode::ParseError, "bad number '" + tmp + "'");
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace detail

// --- CSV -------------------------------------------------------------------

/// One row per state of curve.polyline(); singular end points carry empty
/// curvature cells.
inline std::string to_csv(const ProfileCurve& curve) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const ProfileState& st : curve.polyline()) {
    const double e = first_integral_residual(curve.params, st.z, st.theta);
    const double cells[] = {st.s,      st.x,      st.z,  st.theta, st.kappa1,
                            st.kappa2, st.H,      st.K,  e};
    for (std::size_t i = 0; i < std::size(cells); ++i) {
      if (i) out += ',';
      detail::put_real(out, cells[i]);
    }
    out += '\n';
  }
  return out;
}

struct CsvRow {
  ProfileState state;
  double E;
};

inline std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != kCsvHeader) {
        throw Error(ErrorCode::ParseError, "unexpected CSV header");
      }
      header = false;
      continue;
    }
    const auto cells = detail::split(line, ',');
    if (cells.size() != 9) {
      throw Error(ErrorCode::ParseError, "expected 9 columns");
    }
    double v[9];
    for (std::size_t i = 0; i < 9; ++i) v[i] = detail::parse_real(cells[i]);
    rows.push_back({{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]}, v[8]});
  }
  if (header) throw Error(ErrorCode::ParseError, "missing CSV header");
  return rows;
}

// --- OBJ -------------------------------------------------------------------

/// Wavefront OBJ with vertex normals; faces are 1-based.
inline std::string to_obj(const SurfaceMesh& mesh) {
  std::string out = "# surface of revolution\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "# rings %zu phi %zu poles %zu\n",
                mesh.n_rings, mesh.n_phi, mesh.n_poles);
  out += buf;
  for (const Vertex& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.position[0],
                  v.position[1], v.position[2]);
    out += buf;
  }
  for (const Vertex& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "vn %.17g %.17g %.17g\n", v.normal[0],
                  v.normal[1], v.normal[2]);
    out += buf;
  }
  for (const auto& f : mesh.faces) {
    out += 'f';
    for (std::size_t i : f) {
      std::snprintf(buf, sizeof buf, " %zu//%zu", i + 1, i + 1);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

/// Per-vertex curvature keyed by the 1-based OBJ vertex index.
inline std::string to_curvature_csv(const SurfaceMesh& mesh) {
  std::string out = "vertex,kappa1,kappa2,H,K,singular\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vertex& v = mesh.vertices[i];
    out += std::to_string(i + 1);
    for (double c : {v.kappa1, v.kappa2, v.H, v.K}) {
      out += ',';
      detail::put_real(out, c);
    }
    out += v.singular ? ",1\n" : ",0\n";
  }
  return out;
}

// --- phase CSV -------------------------------------------------------------

inline std::string to_field_csv(const PhasePortrait& pp) {
  std::string out = "theta,z,dtheta,dz,singular_flag\n";
  for (const FieldSample& f : pp.grid) {
    detail::put_real(out, f.theta);
    out += ',';
    detail::put_real(out, f.z);
    out += ',';
    detail::put_real(out, f.dtheta);
    out += ',';
    detail::put_real(out, f.dz);
    out += f.singular ? ",1\n" : ",0\n";
  }
  return out;
}

inline std::string to_separatrix_csv(const PhasePortrait& pp) {
  std::string out = "branch,theta,z\n";
  for (std::size_t b = 0; b < pp.separatrices.size(); ++b) {
    for (const PhasePoint& q : pp.separatrices[b].points) {
      out += std::to_string(b);
      out += ',';
      detail::put_real(out, q.theta);
      out += ',';
      detail::put_real(out, q.z);
      out += '\n';
    }
  }
  return out;
}

inline std::string to_singular_curve_csv(const PhasePortrait& pp) {
  std::string out = "theta,z\n";
  for (const PhasePoint& q : pp.singular_curve) {
    detail::put_real(out, q.theta);
    out += ',';
    detail::put_real(out, q.z);
    out += '\n';
  }
  return out;
}

// --- SVG -------------------------------------------------------------------

inline constexpr double kSvgScale = 100.0;

namespace detail {

struct SvgFrame {
  double x_lo, x_hi, y_lo, y_hi;  // model coordinates
  double margin = 20.0;

  double px(double x) const { return margin + kSvgScale * (x - x_lo); }
  double py(double y) const { return margin + kSvgScale * (y_hi - y); }
  double width() const { return 2.0 * margin + kSvgScale * (x_hi - x_lo); }
  double height() const { return 2.0 * margin + kSvgScale * (y_hi - y_lo); }

  std::string open() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           svg_num(width()) + "\" height=\"" + svg_num(height()) +
           "\" viewBox=\"0 0 " + svg_num(width()) + " " + svg_num(height()) +
           "\">\n";
  }
  std::string hline(double y, const std::string& style) const {
    return "<line x1=\"" + svg_num(px(x_lo)) + "\" y1=\"" + svg_num(py(y)) +
           "\" x2=\"" + svg_num(px(x_hi)) + "\" y2=\"" + svg_num(py(y)) +
           "\" " + style + "/>\n";
  }
};

template <class Points, class GetX, class GetY>
std::string svg_polyline(const SvgFrame& fr, const Points& pts, GetX gx,
                         GetY gy, const char* style) {
  std::string out = "<polyline fill=\"none\" " + std::string(style) +
                    " points=\"";
  bool first = true;
  for (const auto& p : pts) {
    if (!first) out += ' ';
    first = false;
    out += svg_num(fr.px(gx(p))) + "," + svg_num(fr.py(gy(p)));
  }
  out += "\"/>\n";
  return out;
}

}  // namespace detail

/// Profile polyline in the (x, z) plane with the axis of rotation; periodic
/// curves also get the guide lines z = z0 and z = z0 - a.
inline std::string to_svg(const ProfileCurve& curve) {
  const std::vector<ProfileState> poly = curve.polyline();
  const bool periodic = classify(curve.params) == Regime::Periodic;
  double x_lo = poly.front().x, x_hi = x_lo, z_hi = 0.0, z_lo = 0.0;
  for (const ProfileState& st : poly) {
    x_lo = std::min(x_lo, st.x);
    x_hi = std::max(x_hi, st.x);
    z_hi = std::max(z_hi, st.z);
  }
  const double pad = 0.05 * std::max(1.0, std::max(x_hi - x_lo, z_hi));
  detail::SvgFrame fr{x_lo - pad, x_hi + pad, z_lo - pad, z_hi + pad};

  std::string out = fr.open();
  out += "<g id=\"axis\">\n";
  out += fr.hline(0.0, "stroke=\"#888888\" stroke-dasharray=\"4,4\"");
  out += "</g>\n";
  if (periodic) {
    const double zt = curve.params.z0();
    const double zb = curve.params.z0() - curve.params.a();
    out += "<g id=\"bounds\">\n";
    out += fr.hline(zt, "stroke=\"#cc3333\" data-z=\"" + detail::svg_num(zt) +
                            "\"");
    out += fr.hline(zb, "stroke=\"#3333cc\" data-z=\"" + detail::svg_num(zb) +
                            "\"");
    out += "</g>\n";
  }
  out += detail::svg_polyline(
      fr, poly, [](const ProfileState& s) { return s.x; },
      [](const ProfileState& s) { return s.z; },
      "stroke=\"#000000\" stroke-width=\"1.5\" id=\"profile\"");
  out += "</svg>\n";
  return out;
}

/// Phase plane (theta horizontal, z vertical): field directions, singular
/// curve, separatrices and saddles.
inline std::string to_svg(const PhasePortrait& pp) {
  detail::SvgFrame fr{0.0, 2.0 * kPi, 0.0, pp.z_max};
  std::string out = fr.open();
  const double cell =
      std::min(2.0 * kPi / pp.n_theta, pp.z_max / pp.n_z) * 0.4;
  out += "<g id=\"field\" stroke=\"#aaaaaa\">\n";
  for (const FieldSample& f : pp.grid) {
    if (f.singular) continue;
    const double n = std::hypot(f.dtheta, f.dz);
    if (!(n > 0.0)) continue;
    const double ux = cell * f.dtheta / n, uy = cell * f.dz / n;
    out += "<line x1=\"" + detail::svg_num(fr.px(f.theta)) + "\" y1=\"" +
           detail::svg_num(fr.py(f.z)) + "\" x2=\"" +
           detail::svg_num(fr.px(f.theta + ux)) + "\" y2=\"" +
           detail::svg_num(fr.py(f.z + uy)) + "\"/>\n";
  }
  out += "</g>\n";
  auto th = [](const PhasePoint& q) { return q.theta; };
  auto zz = [](const PhasePoint& q) { return q.z; };
  // The singular curve has two pieces: theta < pi/2 and theta > 3pi/2.
  std::vector<PhasePoint> left, right;
  for (const PhasePoint& q : pp.singular_curve) {
    (q.theta < kPi ? left : right).push_back(q);
  }
  for (const auto* piece : {&left, &right}) {
    if (piece->size() > 1) {
      out += detail::svg_polyline(fr, *piece, th, zz,
                                  "stroke=\"#cc3333\" stroke-width=\"2\"");
    }
  }
  for (const SeparatrixBranch& br : pp.separatrices) {
    out += detail::svg_polyline(fr, br.points, th, zz,
                                "stroke=\"#3333cc\" stroke-width=\"1.5\"");
  }
  for (const SaddleData& s : pp.saddles) {
    out += "<circle cx=\"" + detail::svg_num(fr.px(s.point.theta)) +
           "\" cy=\"" + detail::svg_num(fr.py(s.point.z)) +
           "\" r=\"3\" fill=\"#000000\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

// --- files -----------------------------------------------------------------

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  os.flush();
  if (!os) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace lwrot
