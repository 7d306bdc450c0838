#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "lwrot/lwrot.hpp"

using namespace lwrot;

namespace {

ProfileCurve run(double z0) { return integrate(validate_params(2.0, -2.0, z0)); }

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

bool same_bits(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

TEST(Csv, HeaderAndFirstRow) {
  const auto ls = lines(to_csv(run(3.0)));
  ASSERT_GE(ls.size(), 3u);
  EXPECT_EQ(ls[0], "s,x,z,theta,kappa1,kappa2,H,K,E");
  EXPECT_EQ(ls[1].substr(0, 8), "0,0,3,0,");
}

TEST(Csv, SeventeenDigits) {
  const ProfileCurve c = run(3.0);
  const auto ls = lines(to_csv(c));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", c.samples[5].s);
  EXPECT_EQ(ls[6].substr(0, std::string(buf).size()), buf);
}

TEST(Csv, RoundTripBitExact) {
  for (double z0 : {0.5, 1.0, 1.5, 3.0}) {
    const ProfileCurve c = reflect(run(z0));
    const auto poly = c.polyline();
    const auto rows = parse_csv(to_csv(c));
    ASSERT_EQ(rows.size(), poly.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const ProfileState& a = poly[i];
      const ProfileState& b = rows[i].state;
      ASSERT_TRUE(same_bits(a.s, b.s) && same_bits(a.x, b.x) &&
                  same_bits(a.z, b.z) && same_bits(a.theta, b.theta) &&
                  same_bits(a.kappa1, b.kappa1) &&
                  same_bits(a.kappa2, b.kappa2) && same_bits(a.H, b.H) &&
                  same_bits(a.K, b.K))
          << "row " << i;
    }
  }
}

TEST(Csv, SingularEndHasEmptyCells) {
  const auto ls = lines(to_csv(run(0.5)));
  const std::string& last = ls.back();
  EXPECT_NE(last.find(",,,,"), std::string::npos) << last;
  const auto rows = parse_csv(to_csv(run(0.5)));
  EXPECT_TRUE(std::isnan(rows.back().state.K));
  EXPECT_EQ(rows.back().state.z, 0.0);
}

TEST(Csv, ParseErrors) {
  EXPECT_THROW(parse_csv("a,b\n1,2\n"), Error);
  EXPECT_THROW(parse_csv(""), Error);
  EXPECT_THROW(parse_csv("s,x,z,theta,kappa1,kappa2,H,K,E\n1,2,3\n"), Error);
  EXPECT_THROW(parse_csv("s,x,z,theta,kappa1,kappa2,H,K,E\n1,2,3,4,5,6,7,8,zz\n"),
               Error);
}

TEST(Mesh, CylinderSquareSection) {
  const ProfileCurve c = run(1.0);
  const SurfaceMesh m = make_mesh(c, 4);
  EXPECT_EQ(m.vertices.size(), c.samples.size() * 4);
  EXPECT_EQ(m.n_poles, 0u);
  EXPECT_EQ(m.euler_characteristic(), 0);
  for (const Vertex& v : m.vertices) {
    EXPECT_NEAR(std::hypot(v.position[1], v.position[2]), 1.0, 1e-15);
  }
}

TEST(Mesh, AxisContactPoles) {
  const ProfileCurve one = run(0.5);
  const SurfaceMesh m1 = make_mesh(one, 12);
  EXPECT_EQ(m1.n_poles, 1u);
  EXPECT_EQ(m1.vertices.size(), one.samples.size() * 12 + 1);
  EXPECT_EQ(m1.euler_characteristic(), 1);

  const ProfileCurve two = reflect(one);
  const SurfaceMesh m2 = make_mesh(two, 12);
  EXPECT_EQ(m2.n_poles, 2u);
  EXPECT_EQ(m2.vertices.size(), two.samples.size() * 12 + 2);
  EXPECT_EQ(m2.euler_characteristic(), 2);
  std::size_t singular = 0;
  for (const Vertex& v : m2.vertices) {
    if (v.singular) {
      ++singular;
      EXPECT_EQ(v.position[1], 0.0);
      EXPECT_EQ(v.position[2], 0.0);
      EXPECT_TRUE(std::isnan(v.K));
    }
  }
  EXPECT_EQ(singular, 2u);
  EXPECT_DOUBLE_EQ(m2.vertices.front().position[0],
                   -one.termination.state_event.x);
}

TEST(Mesh, RevolutionAndRelationPerVertex) {
  for (double z0 : {0.5, 1.5, 3.0}) {
    const ProfileCurve c = run(z0);
    const SurfaceMesh m = make_mesh(c, 16, 3);
    const auto& p = c.params;
    for (const Vertex& v : m.vertices) {
      if (v.singular) continue;
      EXPECT_NEAR(p.a() * v.H + p.b() * v.K, 1.0, 1e-8);
      EXPECT_NEAR(std::hypot(v.normal[0], std::hypot(v.normal[1], v.normal[2])),
                  1.0, 1e-14);
    }
    // Ring r, angle k: y^2 + z^2 = z(s_r)^2.
    for (std::size_t r = 0; r < m.n_rings; ++r) {
      const std::size_t src = std::min(r * 3, c.samples.size() - 1);
      const double zr = c.samples[src].z;
      for (std::size_t k = 0; k < m.n_phi; ++k) {
        const Vertex& v = m.vertices[r * m.n_phi + k];
        const double r2 =
            v.position[1] * v.position[1] + v.position[2] * v.position[2];
        ASSERT_NEAR(r2, zr * zr, 1e-12 * std::max(1.0, zr * zr));
      }
    }
  }
}

TEST(Mesh, PeriodicOverTwoPeriods) {
  const ProfileCurve c = extend_periodic(run(3.0), 1);
  const SurfaceMesh m = make_mesh(c, 8);
  EXPECT_EQ(m.vertices.size(), c.samples.size() * 8);
  EXPECT_EQ(m.euler_characteristic(), 0);
}

TEST(Mesh, Errors) {
  const ProfileCurve c = run(3.0);
  EXPECT_THROW(make_mesh(c, 2), Error);
  EXPECT_THROW(make_mesh(c, 8, 0), Error);
  ProfileCurve empty = c;
  empty.samples.resize(1);
  try {
    make_mesh(empty, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateCurve);
  }
}

TEST(Obj, Format) {
  const ProfileCurve c = run(1.0);
  const SurfaceMesh m = make_mesh(c, 4, 50);
  const auto ls = lines(to_obj(m));
  std::size_t v = 0, vn = 0, f = 0;
  for (const std::string& l : ls) {
    if (l.rfind("v ", 0) == 0) ++v;
    if (l.rfind("vn ", 0) == 0) ++vn;
    if (l.rfind("f ", 0) == 0) {
      ++f;
      // 1-based v//vn references.
      EXPECT_EQ(l.find(" 0/"), std::string::npos);
      EXPECT_NE(l.find("//"), std::string::npos);
    }
  }
  EXPECT_EQ(v, m.vertices.size());
  EXPECT_EQ(vn, m.vertices.size());
  EXPECT_EQ(f, m.faces.size());
}

TEST(Obj, CurvatureSidecar) {
  const SurfaceMesh m = make_mesh(reflect(run(0.5)), 6, 20);
  const auto ls = lines(to_curvature_csv(m));
  ASSERT_EQ(ls.size(), m.vertices.size() + 1);
  EXPECT_EQ(ls[0], "vertex,kappa1,kappa2,H,K,singular");
  EXPECT_EQ(ls[1].substr(0, 2), "1,");
  EXPECT_EQ(ls[1].substr(ls[1].size() - 2), ",1");  // the start pole
}

TEST(Svg, PeriodicGuideLines) {
  const std::string svg = to_svg(run(3.0));
  EXPECT_NE(svg.find("data-z=\"3.000\""), std::string::npos);
  EXPECT_NE(svg.find("data-z=\"1.000\""), std::string::npos);
  EXPECT_NE(svg.find("id=\"axis\""), std::string::npos);
  EXPECT_NE(svg.find("id=\"profile\""), std::string::npos);
  EXPECT_EQ(to_svg(run(3.0)), svg);
}

TEST(Svg, NoGuideLinesForGraphs) {
  EXPECT_EQ(to_svg(run(0.5)).find("data-z"), std::string::npos);
}

TEST(Svg, PhasePortrait) {
  const PhasePortrait pt = phase_portrait(PhaseParams(2.0, -2.0), 16, 16);
  const std::string svg = to_svg(pt);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<circle"), std::string::npos);
  EXPECT_EQ(svg, to_svg(pt));
}

TEST(PhaseCsv, Columns) {
  const PhasePortrait pt = phase_portrait(PhaseParams(2.0, -2.0), 8, 4);
  auto ls = lines(to_field_csv(pt));
  EXPECT_EQ(ls[0], "theta,z,dtheta,dz,singular_flag");
  EXPECT_EQ(ls.size(), 8u * 4u + 1u);
  ls = lines(to_separatrix_csv(pt));
  EXPECT_EQ(ls[0], "branch,theta,z");
  ls = lines(to_singular_curve_csv(pt));
  EXPECT_GT(ls.size(), 2u);
}

TEST(Json, ReportSchema) {
  const auto j = to_json(verify(run(3.0)));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["regime"], "Periodic");
  EXPECT_TRUE(j["all_passed"].get<bool>());
  EXPECT_EQ(j["events"]["termination"]["kind"], "PeriodClosed");
  EXPECT_TRUE(j["period"].is_number());
  EXPECT_TRUE(j["domain_endpoint"].is_null());
  EXPECT_NEAR(j["extrema"]["z_min"].get<double>(), 1.0, 1e-7);
  EXPECT_TRUE(j["checks"].is_array());
  const auto g = to_json(verify(run(0.5)));
  EXPECT_TRUE(g["domain_endpoint"].is_number());
  EXPECT_TRUE(g["events"]["termination"]["state_event"]["K"].is_null());
}

TEST(Json, PhaseSchema) {
  const auto j = to_json(phase_portrait(PhaseParams(2.0, -3.0), 8, 8));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["singularities"].size(), 2u);
  EXPECT_NEAR(j["predicted_eigenvalue"].get<double>(), 1.0 / std::sqrt(2.0),
              1e-15);
}

TEST(Files, IoFailure) {
  try {
    write_file("/nonexistent-dir/x.csv", "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoFailure);
  }
  EXPECT_THROW(read_file("/nonexistent-dir/x.csv"), Error);
  const auto tmp = std::filesystem::temp_directory_path() / "lwrot_io_test.txt";
  write_file(tmp.string(), "abc\n");
  EXPECT_EQ(read_file(tmp.string()), "abc\n");
  std::filesystem::remove(tmp);
}
