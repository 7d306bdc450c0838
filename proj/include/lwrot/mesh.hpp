#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "lwrot/core.hpp"
#include "lwrot/error.hpp"
#include "lwrot/integrate.hpp"

namespace lwrot {

struct Vertex {
  std::array<double, 3> position;
  std::array<double, 3> normal;
  double kappa1;
  double kappa2;
  double H;
  double K;
  /// On the axis of rotation; curvature is undefined there.
  bool singular;
};

/// Surface of revolution X(s, phi) = (x(s), z(s) cos phi, z(s) sin phi) on a
/// tensor grid, closed in phi. Faces are quads between rings and triangle
/// fans to axis poles; indices are 0-based.
struct SurfaceMesh {
  std::vector<Vertex> vertices;
  std::vector<std::vector<std::size_t>> faces;
  std::size_t n_rings = 0;
  std::size_t n_phi = 0;
  std::size_t n_poles = 0;
  bool periodic_in_phi = true;

  /// V - E + F over the face list.
  long euler_characteristic() const {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& f : faces) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        std::size_t u = f[i], v = f[(i + 1) % f.size()];
        if (u > v) std::swap(u, v);
        edges.emplace_back(u, v);
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return static_cast<long>(vertices.size()) -
           static_cast<long>(edges.size()) + static_cast<long>(faces.size());
  }
};

namespace detail {

inline Vertex ring_vertex(const ProfileState& st, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  const double ct = std::cos(st.theta), st_ = std::sin(st.theta);
  return {{st.x, st.z * c, st.z * s},
          {-st_, ct * c, ct * s},
          st.kappa1,
          st.kappa2,
          st.H,
          st.K,
          false};
}

inline Vertex pole_vertex(const ProfileState& st) {
  // Unit normal along the axis, pointing away from the surface interior.
  const double nx = std::sin(st.theta) > 0.0 ? -1.0 : 1.0;
  return {{st.x, 0.0, 0.0}, {nx, 0.0, 0.0}, kNaN, kNaN, kNaN, kNaN, true};
}

}  // namespace detail

inline SurfaceMesh make_mesh(const ProfileCurve& curve, int n_phi,
                             int s_stride = 1) {
  if (n_phi < 3) throw Error(ErrorCode::InvalidArgument, "n_phi must be >= 3");
  if (s_stride < 1) {
    throw Error(ErrorCode::InvalidArgument, "s_stride must be >= 1");
  }
  if (curve.samples.size() < 2) {
    throw Error(ErrorCode::DegenerateCurve, "mesh needs at least 2 samples");
  }
  std::vector<const ProfileState*> rings;
  const std::size_t stride = static_cast<std::size_t>(s_stride);
  for (std::size_t i = 0; i < curve.samples.size(); i += stride) {
    rings.push_back(&curve.samples[i]);
  }
  if (rings.back() != &curve.samples.back()) rings.push_back(&curve.samples.back());

  const bool poles = curve.termination.kind == TerminationKind::AxisContact;
  const std::size_t np = static_cast<std::size_t>(n_phi);
  SurfaceMesh mesh;
  mesh.n_rings = rings.size();
  mesh.n_phi = np;

  std::optional<std::size_t> start_pole, end_pole;
  if (poles && curve.two_sided) {
    start_pole = mesh.vertices.size();
    mesh.vertices.push_back(
        detail::pole_vertex(ProfileCurve::mirror(curve.termination.state_event)));
  }
  const std::size_t ring0 = mesh.vertices.size();
  for (const ProfileState* st : rings) {
    for (std::size_t k = 0; k < np; ++k) {
      const double phi = 2.0 * kPi * static_cast<double>(k) / n_phi;
      mesh.vertices.push_back(detail::ring_vertex(*st, phi));
    }
  }
  if (poles) {
    end_pole = mesh.vertices.size();
    mesh.vertices.push_back(detail::pole_vertex(curve.termination.state_event));
  }
  mesh.n_poles = (start_pole ? 1 : 0) + (end_pole ? 1 : 0);

  auto idx = [&](std::size_t r, std::size_t k) {
    return ring0 + r * np + (k % np);
  };
  if (start_pole) {
    for (std::size_t k = 0; k < np; ++k) {
      mesh.faces.push_back({*start_pole, idx(0, k + 1), idx(0, k)});
    }
  }
  for (std::size_t r = 0; r + 1 < rings.size(); ++r) {
    for (std::size_t k = 0; k < np; ++k) {
      mesh.faces.push_back(
          {idx(r, k), idx(r, k + 1), idx(r + 1, k + 1), idx(r + 1, k)});
    }
  }
  if (end_pole) {
    const std::size_t r = rings.size() - 1;
    for (std::size_t k = 0; k < np; ++k) {
      mesh.faces.push_back({idx(r, k), idx(r, k + 1), *end_pole});
    }
  }
  return mesh;
}

}  // namespace lwrot
