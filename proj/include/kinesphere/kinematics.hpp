#pragma once

// Forward kinematics over a platform tree and direction-fidelity checks.
//
// FK runs in the root link frame, which follows the usual URDF convention
// (x forward, y left, z up). Spatial directions live in the body frame
// (x = Left, y = Forward, z = High); body_from_root converts between them.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "kinesphere/eurdf.hpp"
#include "kinesphere/pose.hpp"
#include "kinesphere/vsam.hpp"

namespace kinesphere {

struct FrameTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

Eigen::Vector3d body_from_root(const Eigen::Vector3d& v);
Eigen::Vector3d root_from_body(const Eigen::Vector3d& v);

/// Transform placing a joint frame in its parent link frame (xyz + rpy).
Eigen::Isometry3d origin_transform(const Origin& origin);

/// Link frames in the root frame, indexed by link id.
std::vector<FrameTransform> forward_kinematics(const PlatformDescription& platform, const Pose& pose);

/// Deepest link of a limb subtree (first in traversal order on ties).
LinkId distal_most_link(const PlatformDescription& platform, const std::string& limb);

/// Position of the distal-most link frame of a limb, root frame.
Eigen::Vector3d limb_endpoint(const PlatformDescription& platform, const std::string& limb, const Pose& pose);

/// Length of the serial path from a limb's root to its distal-most link:
/// the sum of joint offsets along it. Used as the limb's far-reach radius.
double limb_reach(const PlatformDescription& platform, const std::string& limb);

/// Evaluates the root-frame position of one link for many poses without
/// computing the rest of the tree.
class EndpointChain {
 public:
  EndpointChain(const PlatformDescription& platform, LinkId link);

  /// `values` is indexed like a Pose.
  Eigen::Vector3d position(std::span<const double> values) const;

  /// Joint-space indices that influence this link, root first.
  const std::vector<std::size_t>& joint_indices() const { return indices_; }

 private:
  struct Step {
    Eigen::Isometry3d origin;
    Eigen::Vector3d axis;
    JointType type;
    std::size_t index;  ///< joint-space index; unused for fixed joints
  };
  std::vector<Step> steps_;
  std::vector<std::size_t> indices_;
};

struct FidelityReport {
  Eigen::Vector3d displacement = Eigen::Vector3d::Zero();  ///< body frame
  double cosine = 0.0;     ///< 0 when the limb did not move
  double magnitude = 0.0;  ///< meters
};

/// Endpoint motion of `limb` between neutral and overlay(neutral, pose),
/// compared against the direction's unit vector. No threshold is applied.
/// Throws SupportMismatch when the pose does not cover exactly the limb.
FidelityReport verify_direction(const PlatformDescription& platform, const Pose& neutral, const PartialPose& pose,
                                const std::string& origin, const std::string& limb, DirectionPull direction);

}  // namespace kinesphere
