#include "metacenter/hydrostatics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Geometry>

#include "metacenter/errors.hpp"

namespace metacenter {
namespace {

constexpr int kMaxBisectionIterations = 200;
constexpr double kEquilibriumTolerance = 1e-3;
constexpr double kParallelLineAngle = 1e-6;

struct ClipVertex {
  Vec3 p;
  bool on_plane;
};

// Sutherland-Hodgman against a single plane. `sign` selects the kept side:
// +1 keeps up.dot(p) <= waterline, -1 keeps up.dot(p) >= waterline.
int clip_triangle(const std::array<Vec3, 3>& tri, const Vec3& up, double waterline, double sign,
                  std::array<ClipVertex, 4>& out) {
  std::array<double, 3> d{};
  for (int i = 0; i < 3; ++i) d[i] = sign * (up.dot(tri[i]) - waterline);

  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const bool in_i = d[i] <= 0.0;
    const bool in_j = d[j] <= 0.0;
    if (in_i) out[n++] = {tri[i], d[i] == 0.0};
    if (in_i != in_j) {
      const double s = d[i] / (d[i] - d[j]);
      out[n++] = {tri[i] + s * (tri[j] - tri[i]), true};
    }
  }
  return n;
}

ClippedVolume clip(const HullSpec& hull, const Vec3& up, double waterline, double sign) {
  // Reference point on the plane, so the cap closing the clipped solid
  // contributes no volume to the tetrahedron fan.
  const Vec3 origin = waterline * up;
  ClippedVolume result;
  result.bbox_min = Vec3::Constant(std::numeric_limits<double>::infinity());
  result.bbox_max = Vec3::Constant(-std::numeric_limits<double>::infinity());
  Vec3 moment = Vec3::Zero();

  std::array<ClipVertex, 4> poly;
  for (const auto& f : hull.faces) {
    const std::array<Vec3, 3> tri{hull.vertices[f[0]], hull.vertices[f[1]], hull.vertices[f[2]]};
    const int n = clip_triangle(tri, up, waterline, sign, poly);
    for (int i = 0; i < n; ++i) {
      result.bbox_min = result.bbox_min.cwiseMin(poly[i].p);
      result.bbox_max = result.bbox_max.cwiseMax(poly[i].p);
    }
    for (int i = 1; i + 1 < n; ++i) {
      const Vec3 a = poly[0].p - origin;
      const Vec3 b = poly[i].p - origin;
      const Vec3 c = poly[i + 1].p - origin;
      const double v = a.dot(b.cross(c)) / 6.0;
      result.volume += v;
      moment += v * (a + b + c) / 4.0;
    }
  }
  if (result.volume > 0.0) {
    result.centroid = origin + moment / result.volume;
  } else {
    result.centroid = origin;
    result.bbox_min = result.bbox_max = origin;
  }
  return result;
}

double signed_volume(const HullSpec& hull) {
  double v = 0.0;
  for (const auto& f : hull.faces) {
    v += hull.vertices[f[0]].dot(hull.vertices[f[1]].cross(hull.vertices[f[2]])) / 6.0;
  }
  return v;
}

void check_attitude(const AttitudeSample& a) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (!std::isfinite(a.roll) || !std::isfinite(a.pitch) || !std::isfinite(a.yaw) ||
      std::abs(a.roll) >= half_pi || std::abs(a.pitch) >= half_pi) {
    throw ConfigurationError("attitude outside |roll|, |pitch| < pi/2");
  }
}

// Two unit vectors spanning the plane orthogonal to `up`, right-handed with it.
std::pair<Vec3, Vec3> plane_basis(const Vec3& up) {
  const Vec3 helper = std::abs(up.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = (helper - helper.dot(up) * up).normalized();
  return {u, up.cross(u)};
}

}  // namespace

double Waterplane::moment_about(const Vec3& axis) const {
  const Vec3 a = axis.normalized();
  // Distance to an in-plane axis through the centroid is the in-plane
  // component orthogonal to it: trace(J) - a^T J a.
  return second_moment.trace() - a.dot(second_moment * a);
}

void validate_hull(const HullSpec& hull) {
  if (hull.vertices.empty() || hull.faces.empty()) {
    throw ConfigurationError("hull mesh has no vertices or faces");
  }
  const int nv = static_cast<int>(hull.vertices.size());
  std::map<std::pair<int, int>, int> edges;
  for (const auto& f : hull.faces) {
    for (int i = 0; i < 3; ++i) {
      if (f[i] < 0 || f[i] >= nv) throw ConfigurationError("face index out of range");
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw ConfigurationError("degenerate face with repeated vertex");
    }
    for (int i = 0; i < 3; ++i) ++edges[{f[i], f[(i + 1) % 3]}];
  }
  for (const auto& [edge, count] : edges) {
    const auto it = edges.find({edge.second, edge.first});
    if (count != 1 || it == edges.end() || it->second != 1) {
      throw ConfigurationError("hull mesh is not closed and consistently oriented");
    }
  }
  for (const auto& v : hull.vertices) {
    if (!v.allFinite()) throw ConfigurationError("non-finite hull vertex");
  }
  const double volume = signed_volume(hull);
  if (!(volume > 0.0)) {
    throw ConfigurationError("hull signed volume is not positive (faces point inward?)");
  }
  if (!(hull.water_density > 0.0)) throw ConfigurationError("water density must be positive");
  if (!(hull.mass > 0.0)) throw ConfigurationError("hull mass must be positive");
  if (!(hull.mass / hull.water_density < volume)) {
    throw ConfigurationError("hull does not float: mass " + std::to_string(hull.mass) +
                             " kg exceeds maximum displacement " +
                             std::to_string(hull.water_density * volume) + " kg");
  }
}

double hull_volume(const HullSpec& hull) { return signed_volume(hull); }

HullSpec make_box_hull(double length, double beam, double depth, double mass,
                       double water_density) {
  if (!(length > 0.0) || !(beam > 0.0) || !(depth > 0.0)) {
    throw ConfigurationError("box dimensions must be positive");
  }
  HullSpec hull;
  hull.mass = mass;
  hull.water_density = water_density;
  hull.cog = Vec3::Zero();
  for (int i = 0; i < 8; ++i) {
    hull.vertices.emplace_back((i & 1 ? 0.5 : -0.5) * length, (i & 2 ? 0.5 : -0.5) * beam,
                               (i & 4 ? 0.5 : -0.5) * depth);
  }
  // Quads as corner index lists; winding is fixed below against the outward
  // direction.
  const std::array<std::array<int, 4>, 6> quads{{
      {0, 1, 3, 2},  // bottom
      {4, 5, 7, 6},  // deck
      {0, 1, 5, 4},  // starboard
      {2, 3, 7, 6},  // port
      {0, 2, 6, 4},  // stern
      {1, 3, 7, 5},  // bow
  }};
  for (const auto& q : quads) {
    Vec3 center = Vec3::Zero();
    for (int k : q) center += hull.vertices[k];
    center /= 4.0;
    for (const auto& tri : {std::array<int, 3>{q[0], q[1], q[2]}, std::array<int, 3>{q[0], q[2], q[3]}}) {
      const Vec3 normal = (hull.vertices[tri[1]] - hull.vertices[tri[0]])
                              .cross(hull.vertices[tri[2]] - hull.vertices[tri[0]]);
      if (normal.dot(center) >= 0.0) {
        hull.faces.push_back(tri);
      } else {
        hull.faces.push_back({tri[0], tri[2], tri[1]});
      }
    }
  }
  validate_hull(hull);
  return hull;
}

HullSpec default_hull() { return make_box_hull(9.5, 2.4, 1.2, 5000.0); }

Eigen::Matrix3d body_to_world(const AttitudeSample& a) {
  return (Eigen::AngleAxisd(a.yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(a.pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(a.roll, Vec3::UnitX()))
      .toRotationMatrix();
}

Vec3 world_up_in_body(double roll, double pitch) {
  // Third row of Rz * Ry * Rx; yaw drops out exactly.
  return {-std::sin(pitch), std::sin(roll) * std::cos(pitch), std::cos(roll) * std::cos(pitch)};
}

ClippedVolume clip_below(const HullSpec& hull, const Vec3& up, double waterline) {
  return clip(hull, up, waterline, 1.0);
}

ClippedVolume clip_above(const HullSpec& hull, const Vec3& up, double waterline) {
  return clip(hull, up, waterline, -1.0);
}

Waterplane waterplane_section(const HullSpec& hull, const Vec3& up, double waterline) {
  const auto [eu, ev] = plane_basis(up);
  const Vec3 origin = waterline * up;

  // Green's theorem over the section boundary. Each on-plane edge of a
  // clipped submerged face is traversed in reverse by the cap, whose outward
  // normal is +up.
  double area2 = 0.0, su = 0.0, sv = 0.0, suu = 0.0, svv = 0.0, suv = 0.0;
  std::array<ClipVertex, 4> poly;
  for (const auto& f : hull.faces) {
    const std::array<Vec3, 3> tri{hull.vertices[f[0]], hull.vertices[f[1]], hull.vertices[f[2]]};
    const int n = clip_triangle(tri, up, waterline, 1.0, poly);
    for (int i = 0; i < n && n >= 2; ++i) {
      const ClipVertex& p = poly[i];
      const ClipVertex& q = poly[(i + 1) % n];
      if (!p.on_plane || !q.on_plane) continue;
      // Cap edge runs q -> p.
      const double u0 = eu.dot(q.p - origin), v0 = ev.dot(q.p - origin);
      const double u1 = eu.dot(p.p - origin), v1 = ev.dot(p.p - origin);
      const double c = u0 * v1 - u1 * v0;
      area2 += c;
      su += (u0 + u1) * c;
      sv += (v0 + v1) * c;
      suu += (u0 * u0 + u0 * u1 + u1 * u1) * c;
      svv += (v0 * v0 + v0 * v1 + v1 * v1) * c;
      suv += (u0 * v1 + 2.0 * u0 * v0 + 2.0 * u1 * v1 + u1 * v0) * c;
    }
  }

  Waterplane wp;
  wp.area = area2 / 2.0;
  if (!(wp.area > 0.0)) return wp;
  const double cu = su / 6.0 / wp.area;
  const double cv = sv / 6.0 / wp.area;
  const double juu = suu / 12.0 - wp.area * cu * cu;
  const double jvv = svv / 12.0 - wp.area * cv * cv;
  const double juv = suv / 24.0 - wp.area * cu * cv;
  wp.centroid = origin + cu * eu + cv * ev;
  wp.second_moment = juu * eu * eu.transpose() + jvv * ev * ev.transpose() +
                     juv * (eu * ev.transpose() + ev * eu.transpose());
  return wp;
}

HullState solve_equilibrium_draft(const HullSpec& hull, const AttitudeSample& attitude) {
  check_attitude(attitude);
  if (!(hull.mass > 0.0) || !(hull.water_density > 0.0) || hull.faces.empty()) {
    throw ConfigurationError("invalid hull specification");
  }
  const Vec3 up = world_up_in_body(attitude.roll, attitude.pitch);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& v : hull.vertices) {
    lo = std::min(lo, up.dot(v));
    hi = std::max(hi, up.dot(v));
  }
  const double keel = lo;
  const double target = hull.mass / hull.water_density;

  // Bisect to machine precision; the metacenter construction differences two
  // nearby buoyancy centers, so the 1e-3 mass tolerance alone is too loose.
  int iter = 0;
  for (; iter < kMaxBisectionIterations; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (clip_below(hull, up, mid).volume < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double waterline = 0.5 * (lo + hi);
  const ClippedVolume sub = clip_below(hull, up, waterline);
  const double rel = std::abs(sub.volume * hull.water_density - hull.mass) / hull.mass;
  if (iter == kMaxBisectionIterations || !(rel <= kEquilibriumTolerance)) {
    throw NumericalError("equilibrium bisection did not converge (relative mass error " +
                         std::to_string(rel) + ")");
  }
  if (!(sub.volume > 0.0) || !sub.centroid.allFinite()) {
    throw GeometryError("degenerate submerged volume");
  }

  HullState state;
  state.attitude = attitude;
  state.waterline = waterline;
  state.up = up;
  state.draft = waterline - keel;
  state.displaced_volume = sub.volume;
  state.buoyancy_center = sub.centroid;
  state.gravity_center = hull.cog;
  state.metacenter = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  return state;
}

HullState compute_metacenter(const HullSpec& hull, const AttitudeSample& attitude, double delta) {
  HullState state = solve_equilibrium_draft(hull, attitude);

  const bool roll_axis = std::abs(attitude.roll) >= std::abs(attitude.pitch);
  const double dominant = roll_axis ? attitude.roll : attitude.pitch;
  const double step = dominant < 0.0 ? -delta : delta;
  AttitudeSample tilted = attitude;
  (roll_axis ? tilted.roll : tilted.pitch) += step;
  const HullState next = solve_equilibrium_draft(hull, tilted);

  const Vec3& b1 = state.buoyancy_center;
  const Vec3& b2 = next.buoyancy_center;
  const Vec3& n1 = state.up;
  const Vec3& n2 = next.up;
  const Vec3 cross = n1.cross(n2);
  const double angle = std::atan2(cross.norm(), n1.dot(n2));

  if (angle >= kParallelLineAngle) {
    // Closest points of b1 + t n1 and b2 + s n2 (unit directions).
    const Vec3 w = b1 - b2;
    const double b = n1.dot(n2);
    const double d = n1.dot(w);
    const double e = n2.dot(w);
    const double den = cross.squaredNorm();
    const double t = (b * e - d) / den;
    const double s = (e - b * d) / den;
    state.metacenter = 0.5 * ((b1 + t * n1) + (b2 + s * n2));
    return state;
  }

  // Small-angle limit: BM = I_t / V along the body-frame vertical.
  const Waterplane wp = waterplane_section(hull, n1, state.waterline);
  if (!(wp.area > 0.0)) throw GeometryError("degenerate waterplane section");
  Vec3 axis;
  if (roll_axis) {
    axis = Vec3::UnitX() - n1.x() * n1;
  } else {
    axis = Vec3(0.0, std::cos(attitude.roll), -std::sin(attitude.roll));
  }
  const double bm = wp.moment_about(axis) / state.displaced_volume;
  state.metacenter = b1 + bm * n1;
  return state;
}

MetacenterPosition to_centimeters(const Vec3& p) {
  return {100.0 * p.x(), 100.0 * p.y(), 100.0 * p.z()};
}

MetacenterPosition metacenter_cm(const HullSpec& hull, const AttitudeSample& attitude) {
  return to_centimeters(compute_metacenter(hull, attitude).metacenter);
}

}  // namespace metacenter
