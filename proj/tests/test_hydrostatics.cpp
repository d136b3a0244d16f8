#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "metacenter/errors.hpp"
#include "metacenter/hydrostatics.hpp"
#include "test_support.hpp"

namespace metacenter {
namespace {

// Wall-sided box heeled about its long axis: with k = B^2 / (12 T) and
// t = tan(roll), buoyancy sits at y = -k t, z = z0 + k t^2 / 2, and the
// center of curvature of that path (the pro-metacenter in the limit of a
// vanishing perturbation) sits at y = k t^3, z = z0 + k + 1.5 k t^2.
struct WallSidedOracle {
  double k;
  double z0;
  Vec3 buoyancy(double t) const { return {0.0, -k * t, z0 + 0.5 * k * t * t}; }
  Vec3 metacenter(double t) const { return {0.0, k * t * t * t, z0 + k + 1.5 * k * t * t}; }
};

TEST(BoxHull, TwelveTrianglesAndVolume) {
  const HullSpec hull = make_box_hull(9.5, 2.0, 1.0, 4000.0);
  EXPECT_EQ(hull.faces.size(), 12u);
  EXPECT_EQ(hull.vertices.size(), 8u);
  EXPECT_NEAR(hull_volume(hull), 19.0, 1e-12);
  EXPECT_TRUE(hull.cog.isZero(0.0));
  EXPECT_NO_THROW(validate_hull(hull));
}

TEST(BoxHull, TooHeavyToFloat) {
  EXPECT_THROW(make_box_hull(1.0, 1.0, 1.0, 2000.0), ConfigurationError);
  EXPECT_THROW(make_box_hull(1.0, -1.0, 1.0, 100.0), ConfigurationError);
  EXPECT_THROW(make_box_hull(1.0, 1.0, 1.0, 0.0), ConfigurationError);
}

TEST(ValidateHull, RejectsOpenAndInvertedMeshes) {
  HullSpec open = make_box_hull(2.0, 1.0, 1.0, 100.0);
  open.faces.pop_back();
  EXPECT_THROW(validate_hull(open), ConfigurationError);

  HullSpec inverted = make_box_hull(2.0, 1.0, 1.0, 100.0);
  for (auto& f : inverted.faces) std::swap(f[1], f[2]);
  EXPECT_THROW(validate_hull(inverted), ConfigurationError);

  HullSpec bad_index = make_box_hull(2.0, 1.0, 1.0, 100.0);
  bad_index.faces[0][0] = 99;
  EXPECT_THROW(validate_hull(bad_index), ConfigurationError);
}

TEST(Equilibrium, UnitBoxAtRest) {
  const HullSpec hull = make_box_hull(1.0, 1.0, 1.0, 500.0);
  const HullState s = solve_equilibrium_draft(hull, {});
  const double draft = 500.0 / 1025.0;
  EXPECT_NEAR(s.draft, 0.4878, 1e-4);
  EXPECT_NEAR(s.draft, draft, 1e-9);
  EXPECT_NEAR(s.displaced_volume, draft, 1e-9);
  // Keel at -0.5, so B is draft / 2 above it.
  EXPECT_NEAR(s.buoyancy_center.x(), 0.0, 1e-12);
  EXPECT_NEAR(s.buoyancy_center.y(), 0.0, 1e-12);
  EXPECT_NEAR(s.buoyancy_center.z(), -0.5 + draft / 2.0, 1e-9);
}

TEST(Equilibrium, HeeledUnitBoxKeepsDisplacement) {
  const HullSpec hull = make_box_hull(1.0, 1.0, 1.0, 500.0);
  const HullState s = solve_equilibrium_draft(hull, {0.0, 0.1, 0.0, 0.0});
  EXPECT_NEAR(s.displaced_volume, 0.4878, 0.4878 * 1e-3);
  EXPECT_NEAR(s.displaced_volume * hull.water_density, hull.mass, hull.mass * 1e-9);
}

TEST(Equilibrium, RejectsCapsizedAttitudes) {
  const HullSpec hull = default_hull();
  EXPECT_THROW(solve_equilibrium_draft(hull, {0.0, std::numbers::pi / 2, 0.0, 0.0}),
               ConfigurationError);
  EXPECT_THROW(solve_equilibrium_draft(hull, {0.0, 0.0, -2.0, 0.0}), ConfigurationError);
  EXPECT_THROW(solve_equilibrium_draft(hull, {0.0, NAN, 0.0, 0.0}), ConfigurationError);
}

TEST(Equilibrium, RandomAttitudesFloatAtHullMass) {
  std::mt19937_64 rng(7);
  const HullSpec hull = default_hull();
  for (int i = 0; i < 200; ++i) {
    const AttitudeSample a = test::random_attitude(rng, 1.2, 1.2);
    const HullState s = solve_equilibrium_draft(hull, a);
    EXPECT_NEAR(s.displaced_volume * hull.water_density, hull.mass, hull.mass * 1e-3);
    // B lies inside the bounding box of the submerged part.
    const ClippedVolume below = clip_below(hull, s.up, s.waterline);
    for (int c = 0; c < 3; ++c) {
      EXPECT_GE(s.buoyancy_center[c], below.bbox_min[c] - 1e-12);
      EXPECT_LE(s.buoyancy_center[c], below.bbox_max[c] + 1e-12);
    }
  }
}

TEST(Rotation, WorldUpMatchesRotationMatrix) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const AttitudeSample a = test::random_attitude(rng, 1.5, 1.5);
    const Eigen::Matrix3d r = (Eigen::AngleAxisd(a.yaw, Vec3::UnitZ()) *
                               Eigen::AngleAxisd(a.pitch, Vec3::UnitY()) *
                               Eigen::AngleAxisd(a.roll, Vec3::UnitX()))
                                  .toRotationMatrix();
    EXPECT_TRUE(body_to_world(a).isApprox(r, 1e-14));
    EXPECT_TRUE(world_up_in_body(a.roll, a.pitch).isApprox(r.transpose() * Vec3::UnitZ(), 1e-14));
  }
}

TEST(Clipping, BelowPlusAboveIsTotal) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> offset(-1.5, 1.5);
  for (const HullSpec& hull : {default_hull(), test::wedge_hull()}) {
    const double total = hull_volume(hull);
    for (int i = 0; i < 300; ++i) {
      const Vec3 n = Vec3::Random().normalized();
      const double w = offset(rng);
      const double sum = clip_below(hull, n, w).volume + clip_above(hull, n, w).volume;
      EXPECT_NEAR(sum, total, 1e-9 * total);
    }
  }
}

TEST(Clipping, CentroidsRecombineToHullCentroid) {
  const HullSpec hull = test::wedge_hull();
  const ClippedVolume all = clip_below(hull, Vec3::UnitZ(), 10.0);
  const Vec3 n = Vec3(0.3, -0.2, 0.9).normalized();
  const ClippedVolume lo = clip_below(hull, n, 0.1);
  const ClippedVolume hi = clip_above(hull, n, 0.1);
  const Vec3 combined = (lo.volume * lo.centroid + hi.volume * hi.centroid) / (lo.volume + hi.volume);
  EXPECT_TRUE(combined.isApprox(all.centroid, 1e-12));
}

TEST(Waterplane, BoxSecondMoments) {
  const double length = 9.5, beam = 2.4;
  const HullSpec hull = make_box_hull(length, beam, 1.2, 5000.0);
  const Waterplane wp = waterplane_section(hull, Vec3::UnitZ(), -0.4);
  EXPECT_NEAR(wp.area, length * beam, 1e-12);
  EXPECT_NEAR(wp.moment_about(Vec3::UnitX()), length * beam * beam * beam / 12.0, 1e-10);
  EXPECT_NEAR(wp.moment_about(Vec3::UnitY()), beam * length * length * length / 12.0, 1e-9);
  EXPECT_NEAR(wp.centroid.z(), -0.4, 1e-12);
}

TEST(Metacenter, SmallAngleMatchesBoxFormula) {
  // Beam 2, draft 0.5: BM = 4 / 6.
  const HullSpec hull = make_box_hull(6.0, 2.0, 1.5, 1025.0 * 6.0 * 2.0 * 0.5);
  const double bm = 2.0 * 2.0 / (12.0 * 0.5);
  EXPECT_NEAR(solve_equilibrium_draft(hull, {}).draft, 0.5, 1e-9);
  const HullState s = compute_metacenter(hull, {0.0, 1e-3, 0.0, 0.0});
  EXPECT_NEAR(s.metacenter.z() - s.buoyancy_center.z(), bm, 0.01 * bm);
}

TEST(Metacenter, ParallelLinesFallBackToSmallAngleFormula) {
  const HullSpec hull = make_box_hull(6.0, 2.0, 1.5, 1025.0 * 6.0 * 2.0 * 0.5);
  const HullState s = compute_metacenter(hull, {}, 1e-8);
  EXPECT_NEAR(s.metacenter.z() - s.buoyancy_center.z(), 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(s.metacenter.y(), 0.0, 1e-12);
}

TEST(Metacenter, WallSidedHeelAgreesWithClosedForm) {
  const HullSpec hull = default_hull();
  const double draft = hull.mass / (hull.water_density * 9.5 * 2.4);
  const WallSidedOracle oracle{2.4 * 2.4 / (12.0 * draft), -0.6 + draft / 2.0};
  for (double roll : {0.02, 0.05, 0.1, 0.15}) {
    const HullState s = compute_metacenter(hull, {0.0, roll, 0.0, 0.0});
    const double t = std::tan(roll);
    EXPECT_TRUE(s.buoyancy_center.isApprox(oracle.buoyancy(t), 1e-9)) << "roll " << roll;
    // The perturbation is finite, so the intersection differs from the
    // curvature center by O(delta * k).
    EXPECT_NEAR(s.metacenter.y(), oracle.metacenter(t).y(), 5e-3 * oracle.k);
    EXPECT_NEAR(s.metacenter.z(), oracle.metacenter(t).z(), 5e-3 * oracle.k);
  }
}

TEST(Metacenter, WallSidedTrimAgreesWithClosedForm) {
  const HullSpec hull = default_hull();
  const double draft = hull.mass / (hull.water_density * 9.5 * 2.4);
  const double k = 9.5 * 9.5 / (12.0 * draft);
  const double z0 = -0.6 + draft / 2.0;
  const double pitch = 0.02;
  const double t = std::tan(pitch);
  const HullState s = compute_metacenter(hull, {0.0, 0.0, pitch, 0.0});
  // Bow-down trim moves buoyancy forward (+x).
  EXPECT_NEAR(s.buoyancy_center.x(), k * t, 1e-9);
  EXPECT_NEAR(s.buoyancy_center.z(), z0 + 0.5 * k * t * t, 1e-9);
  EXPECT_NEAR(s.metacenter.x(), -k * t * t * t, 5e-3 * k);
  EXPECT_NEAR(s.metacenter.z(), z0 + k + 1.5 * k * t * t, 5e-3 * k);
}

TEST(Metacenter, ZeroAttitudeDefaultHull) {
  const HullSpec hull = default_hull();
  const double draft = 5000.0 / (1025.0 * 9.5 * 2.4);
  const MetacenterPosition m = metacenter_cm(hull, {});
  EXPECT_NEAR(m.x, 0.0, 1e-9);
  EXPECT_NEAR(m.y, 0.0, 1e-9);
  EXPECT_NEAR(m.z, 100.0 * (-0.6 + draft / 2.0 + 2.4 * 2.4 / (12.0 * draft)), 0.5);
}

TEST(Metacenter, OddInRollAndPitch) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(1e-4, 1.2);
  const HullSpec hull = default_hull();
  for (int i = 0; i < 60; ++i) {
    const double th = angle(rng);
    const HullState p = compute_metacenter(hull, {0.0, th, 0.0, 0.0});
    const HullState n = compute_metacenter(hull, {0.0, -th, 0.0, 0.0});
    EXPECT_NEAR(p.metacenter.y(), -n.metacenter.y(), 1e-6) << "roll " << th;
    EXPECT_NEAR(p.metacenter.x(), 0.0, 1e-6);
    EXPECT_NEAR(n.metacenter.x(), 0.0, 1e-6);

    const double ph = std::min(th, 1.0);
    const HullState fp = compute_metacenter(hull, {0.0, 0.0, ph, 0.0});
    const HullState fn = compute_metacenter(hull, {0.0, 0.0, -ph, 0.0});
    EXPECT_NEAR(fp.metacenter.x(), -fn.metacenter.x(), 1e-6) << "pitch " << ph;
  }
}

TEST(Metacenter, YawInvariant) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> yaw(-std::numbers::pi, std::numbers::pi);
  const HullSpec hull = default_hull();
  for (int i = 0; i < 60; ++i) {
    AttitudeSample a = test::random_attitude(rng, 0.8, 0.6);
    const HullState s1 = compute_metacenter(hull, a);
    a.yaw = yaw(rng);
    const HullState s2 = compute_metacenter(hull, a);
    EXPECT_LE((s1.metacenter - s2.metacenter).norm(), 1e-9);
  }
}

TEST(Metacenter, LabelsStayWithinTenMeters) {
  std::mt19937_64 rng(13);
  const HullSpec hull = default_hull();
  for (int i = 0; i < 300; ++i) {
    const MetacenterPosition m = metacenter_cm(hull, test::random_attitude(rng, 0.5, 0.4));
    EXPECT_LT(std::abs(m.x), 1e4);
    EXPECT_LT(std::abs(m.y), 1e4);
    EXPECT_LT(std::abs(m.z), 1e4);
  }
}

TEST(Metacenter, CentimeterConversion) {
  const MetacenterPosition m = to_centimeters(Vec3(0.01, -1.5, 2.0));
  EXPECT_DOUBLE_EQ(m.x, 1.0);
  EXPECT_DOUBLE_EQ(m.y, -150.0);
  EXPECT_DOUBLE_EQ(m.z, 200.0);
}

}  // namespace
}  // namespace metacenter
