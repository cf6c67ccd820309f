#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kinesphere/error.hpp"
#include "kinesphere/kinematics.hpp"
#include "oracles/grid_oracle.hpp"
#include "test_support.hpp"

using namespace kinesphere;

namespace {

struct PlanarCase {
  double q1, q2;
  std::array<double, 3> link2, tip;
};
const PlanarCase planar_cases[] = {
#include "oracles/fk_planar2.inc"
};

struct FrameCase {
  const char* link;
  std::array<double, 9> rotation;
  std::array<double, 3> translation;
};
const FrameCase baxter_neutral[] = {
#include "oracles/fk_baxter_neutral.inc"
};

Eigen::Vector3d position_of(const PlatformDescription& p, const std::vector<FrameTransform>& fk, const char* link) {
  return fk[*p.tree.find_link(link)].translation;
}

}  // namespace

TEST(ForwardKinematics, StraightChain) {
  PlatformDescription p = support::load("planar2");
  auto fk = forward_kinematics(p, Pose{{0.0, 0.0}});
  EXPECT_NEAR((position_of(p, fk, "tip") - Eigen::Vector3d(2, 0, 0)).norm(), 0.0, 1e-15);
  fk = forward_kinematics(p, Pose{{std::numbers::pi / 2, 0.0}});
  EXPECT_NEAR((position_of(p, fk, "tip") - Eigen::Vector3d(0, 2, 0)).norm(), 0.0, 1e-12);
}

TEST(ForwardKinematics, MatchesMatrixOracle) {
  PlatformDescription p = support::load("planar2");
  ASSERT_EQ(std::size(planar_cases), 100u);
  for (const PlanarCase& c : planar_cases) {
    auto fk = forward_kinematics(p, Pose{{c.q1, c.q2}});
    Eigen::Vector3d tip = position_of(p, fk, "tip"), link2 = position_of(p, fk, "link2");
    auto hand = oracle::planar2_tip(c.q1, c.q2);
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(tip[i], c.tip[i], 1e-9);
      EXPECT_NEAR(link2[i], c.link2[i], 1e-9);
      EXPECT_NEAR(tip[i], hand[i], 1e-9);
    }
  }
}

TEST(ForwardKinematics, NeutralFramesMatchOracle) {
  PlatformDescription p = support::load("baxter");
  auto fk = forward_kinematics(p, p.neutral_pose());
  ASSERT_EQ(std::size(baxter_neutral), p.tree.links.size());
  for (const FrameCase& c : baxter_neutral) {
    const FrameTransform& f = fk[*p.tree.find_link(c.link)];
    for (int r = 0; r < 3; ++r) {
      EXPECT_NEAR(f.translation[r], c.translation[r], 1e-9) << c.link;
      for (int col = 0; col < 3; ++col) EXPECT_NEAR(f.rotation(r, col), c.rotation[r * 3 + col], 1e-9) << c.link;
    }
  }
}

TEST(ForwardKinematics, RotationsStayOrthonormal) {
  PlatformDescription p = support::load("nao");
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Pose q = p.neutral_pose();
    for (std::size_t i = 0; i < q.size(); ++i)
      q.values[i] = std::uniform_real_distribution<double>(p.joint_space.dims[i].min, p.joint_space.dims[i].max)(rng);
    for (const FrameTransform& f : forward_kinematics(p, q)) {
      EXPECT_NEAR((f.rotation.transpose() * f.rotation - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-9);
      EXPECT_NEAR(f.rotation.determinant(), 1.0, 1e-9);
    }
  }
}

TEST(LimbEndpoint, DistalMostLinkAndLocality) {
  PlatformDescription p = support::load("split_core");
  Pose n = p.neutral_pose();
  auto fk = forward_kinematics(p, n);
  EXPECT_EQ((limb_endpoint(p, "limb_23", n) - position_of(p, fk, "leg_lower")).norm(), 0.0);
  Pose moved = n;
  moved.values[*p.joint_space.index_of(p.labels.distals.at("distal_11"))] = 1.0;
  EXPECT_EQ(limb_endpoint(p, "limb_23", moved), limb_endpoint(p, "limb_23", n));
  moved = n;
  moved.values[*p.joint_space.index_of(p.labels.distals.at("distal_21"))] = 1.0;
  EXPECT_NE(limb_endpoint(p, "limb_23", moved), limb_endpoint(p, "limb_23", n));
  EXPECT_EQ(limb_endpoint(p, "limb_11", moved), limb_endpoint(p, "limb_11", n));
  EXPECT_THROW(limb_endpoint(p, "limb_31", n), Error);
}

TEST(LimbEndpoint, Reach) {
  EXPECT_DOUBLE_EQ(limb_reach(support::load("planar2"), "limb_11"), 2.0);
  EXPECT_DOUBLE_EQ(limb_reach(support::load("planar2"), "limb_12"), 1.0);
  EXPECT_NEAR(limb_reach(support::load("baxter"), "limb_11"), 0.97, 1e-12);
}

TEST(VerifyDirection, LateralJoint) {
  PlatformDescription p = support::load("lateral1");
  Pose n = p.neutral_pose();
  PartialPose full_left{{0.3}};
  auto left = verify_direction(p, n, full_left, "distal_11", "limb_11", parse_direction("left-middle"));
  EXPECT_NEAR(left.cosine, 1.0, 1e-12);
  EXPECT_NEAR(left.magnitude, 0.3, 1e-12);
  auto right = verify_direction(p, n, full_left, "distal_11", "limb_11", parse_direction("right-middle"));
  EXPECT_NEAR(right.cosine, -1.0, 1e-12);
  auto still = verify_direction(p, n, PartialPose{{0.0}}, "distal_11", "limb_11", parse_direction("left-middle"));
  EXPECT_EQ(still.magnitude, 0.0);
  EXPECT_EQ(still.cosine, 0.0);
}

TEST(VerifyDirection, GridSearchConfirmsLateralLimit) {
  auto best = oracle::exhaustive({{-0.3, 0.3, 0.001}}, [](const std::vector<double>& q) { return oracle::lateral1_tip(q[0]); },
                                 oracle::lateral1_tip(0.0), {1.0, 0.0, 0.0}, 0.5);
  EXPECT_NEAR(best.q[0], 0.3, 1e-12);
}

TEST(VerifyDirection, SupportMismatch) {
  PlatformDescription p = support::load("split_core");
  PartialPose wrong = PartialPose::empty(p.dof());
  wrong.values[0] = 0.1;
  try {
    verify_direction(p, p.neutral_pose(), wrong, "distal_21", "limb_21", parse_direction("left-high"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SupportMismatch);
  }
}
