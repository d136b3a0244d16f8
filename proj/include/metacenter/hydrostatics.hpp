#pragma once

// Hydrostatic ground truth for a floating polyhedral hull.
//
// Body frame: x forward, y to port, z up, meters. Attitudes use the intrinsic
// Z-Y-X convention (yaw, then pitch, then roll), so the body-to-world rotation
// is R = Rz(yaw) * Ry(pitch) * Rx(roll).
//
// The metacenter is the pro-metacenter: the closest point between the two
// buoyancy action lines at the given attitude and at a slightly larger tilt
// about the dominant tilt axis. At small angles it converges to B + BM with
// BM = I / V.

#include <array>
#include <vector>

#include <Eigen/Core>

namespace metacenter {

using Vec3 = Eigen::Vector3d;

inline constexpr double kSeawaterDensity = 1025.0;
// 0.1 degree.
inline constexpr double kDefaultTiltDelta = 0.001745;

struct AttitudeSample {
  double t = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

// Body frame, centimeters.
struct MetacenterPosition {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const MetacenterPosition&, const MetacenterPosition&) = default;
};

struct HullSpec {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  double mass = 0.0;
  double water_density = kSeawaterDensity;
  Vec3 cog = Vec3::Zero();
};

// Output of the equilibrium solve; the metacenter is filled in by
// compute_metacenter.
struct HullState {
  AttitudeSample attitude;
  double draft = 0.0;
  double displaced_volume = 0.0;
  Vec3 buoyancy_center = Vec3::Zero();
  Vec3 metacenter = Vec3::Zero();
  Vec3 gravity_center = Vec3::Zero();
  // Waterplane height along the body-frame up vector: points p with
  // up.dot(p) < waterline are submerged.
  double waterline = 0.0;
  Vec3 up = Vec3::UnitZ();
};

// Volume and centroid of the part of the hull on one side of a plane.
struct ClippedVolume {
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
  Vec3 bbox_min = Vec3::Constant(0.0);
  Vec3 bbox_max = Vec3::Constant(0.0);
};

// Area properties of the waterplane section, expressed in the body frame.
// Second moments are centroidal.
struct Waterplane {
  double area = 0.0;
  Vec3 centroid = Vec3::Zero();
  // Centroidal second moment tensor restricted to the plane:
  // J = integral of (r - c)(r - c)^T dA.
  Eigen::Matrix3d second_moment = Eigen::Matrix3d::Zero();

  // Second moment about an in-plane axis through the centroid.
  double moment_about(const Vec3& axis) const;
};

// Throws ConfigurationError on an open or inward-facing mesh, non-positive
// mass or density, or a hull too heavy to float.
void validate_hull(const HullSpec& hull);

double hull_volume(const HullSpec& hull);

HullSpec make_box_hull(double length, double beam, double depth, double mass,
                       double water_density = kSeawaterDensity);

// Box 9.5 x 2.4 x 1.2 m, 5000 kg, seawater.
HullSpec default_hull();

Eigen::Matrix3d body_to_world(const AttitudeSample& attitude);

// World +z expressed in the body frame. Independent of yaw.
Vec3 world_up_in_body(double roll, double pitch);

ClippedVolume clip_below(const HullSpec& hull, const Vec3& up, double waterline);
ClippedVolume clip_above(const HullSpec& hull, const Vec3& up, double waterline);
Waterplane waterplane_section(const HullSpec& hull, const Vec3& up, double waterline);

// Bisection on the waterline height until displaced mass matches hull mass.
// Fills every HullState field except metacenter.
HullState solve_equilibrium_draft(const HullSpec& hull, const AttitudeSample& attitude);

// Perturbation direction is away from upright (sign of the dominant angle),
// which keeps the result mirror-symmetric for symmetric hulls.
HullState compute_metacenter(const HullSpec& hull, const AttitudeSample& attitude,
                             double delta = kDefaultTiltDelta);

MetacenterPosition to_centimeters(const Vec3& point_m);

// Convenience for labeling: compute_metacenter(...).metacenter in cm.
MetacenterPosition metacenter_cm(const HullSpec& hull, const AttitudeSample& attitude);

}  // namespace metacenter
