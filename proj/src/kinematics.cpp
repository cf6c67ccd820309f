#include "kinesphere/kinematics.hpp"

#include <algorithm>

#include "kinesphere/error.hpp"

namespace kinesphere {

namespace {

Eigen::Isometry3d joint_motion(JointType type, const Eigen::Vector3d& axis, double q) {
  Eigen::Isometry3d m = Eigen::Isometry3d::Identity();
  if (type == JointType::revolute) m.linear() = Eigen::AngleAxisd(q, axis).toRotationMatrix();
  if (type == JointType::prismatic) m.translation() = axis * q;
  return m;
}

Eigen::Vector3d to_eigen(const Vec3& v) { return {v[0], v[1], v[2]}; }

}  // namespace

Eigen::Vector3d body_from_root(const Eigen::Vector3d& v) { return {v.y(), v.x(), v.z()}; }
Eigen::Vector3d root_from_body(const Eigen::Vector3d& v) { return {v.y(), v.x(), v.z()}; }

Eigen::Isometry3d origin_transform(const Origin& origin) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = (Eigen::AngleAxisd(origin.rpy[2], Eigen::Vector3d::UnitZ()) *
                Eigen::AngleAxisd(origin.rpy[1], Eigen::Vector3d::UnitY()) *
                Eigen::AngleAxisd(origin.rpy[0], Eigen::Vector3d::UnitX()))
                   .toRotationMatrix();
  t.translation() = to_eigen(origin.xyz);
  return t;
}

std::vector<FrameTransform> forward_kinematics(const PlatformDescription& platform, const Pose& pose) {
  const auto& tree = platform.tree;
  if (pose.size() != platform.dof()) throw std::invalid_argument("forward_kinematics: pose length differs from dof");
  std::vector<Eigen::Isometry3d> world(tree.links.size(), Eigen::Isometry3d::Identity());
  for (LinkId link : tree.traversal_order()) {
    const auto& parent_joint = tree.links[link].parent_joint;
    if (!parent_joint) continue;
    const Joint& joint = tree.joints[*parent_joint];
    double q = 0.0;
    if (joint.actuated()) q = pose.values[*platform.joint_space.index_of(*parent_joint)];
    world[link] = world[joint.parent] * origin_transform(joint.origin) * joint_motion(joint.type, to_eigen(joint.axis), q);
  }
  std::vector<FrameTransform> out(world.size());
  for (std::size_t i = 0; i < world.size(); ++i) out[i] = {world[i].linear(), world[i].translation()};
  return out;
}

LinkId distal_most_link(const PlatformDescription& platform, const std::string& limb) {
  auto links = subtree(platform, limb).links;
  const auto& tree = platform.tree;
  auto depth = [&](LinkId l) {
    int d = 0;
    for (auto p = tree.parent_link(l); p; p = tree.parent_link(*p)) ++d;
    return d;
  };
  LinkId best = *links.begin();
  int best_depth = -1;
  for (LinkId l : tree.traversal_order()) {
    if (!links.count(l)) continue;
    int d = depth(l);
    if (d > best_depth) {
      best = l;
      best_depth = d;
    }
  }
  return best;
}

Eigen::Vector3d limb_endpoint(const PlatformDescription& platform, const std::string& limb, const Pose& pose) {
  if (!platform.labels.is_limb(limb)) throw Error(ErrorCode::UnknownLabel, "'" + limb + "' is not a limb label");
  return EndpointChain(platform, distal_most_link(platform, limb)).position(pose.values);
}

double limb_reach(const PlatformDescription& platform, const std::string& limb) {
  const auto& tree = platform.tree;
  LinkId root = platform.labels.limbs.at(limb);
  double reach = 0.0;
  for (LinkId l = distal_most_link(platform, limb); l != root;) {
    const Joint& joint = tree.joints[*tree.links[l].parent_joint];
    reach += to_eigen(joint.origin.xyz).norm();
    l = joint.parent;
  }
  return reach;
}

EndpointChain::EndpointChain(const PlatformDescription& platform, LinkId link) {
  const auto& tree = platform.tree;
  for (auto cur = tree.links[link].parent_joint; cur; cur = tree.links[tree.joints[*cur].parent].parent_joint) {
    const Joint& joint = tree.joints[*cur];
    std::size_t index = 0;
    if (joint.actuated()) index = *platform.joint_space.index_of(*cur);
    steps_.push_back({origin_transform(joint.origin), to_eigen(joint.axis), joint.type, index});
  }
  std::reverse(steps_.begin(), steps_.end());
  for (const Step& s : steps_)
    if (s.type != JointType::fixed) indices_.push_back(s.index);
}

Eigen::Vector3d EndpointChain::position(std::span<const double> values) const {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (const Step& s : steps_) {
    t = t * s.origin;
    if (s.type != JointType::fixed) t = t * joint_motion(s.type, s.axis, values[s.index]);
  }
  return t.translation();
}

FidelityReport verify_direction(const PlatformDescription& platform, const Pose& neutral, const PartialPose& pose,
                                const std::string& origin, const std::string& limb, DirectionPull direction) {
  if (!platform.labels.is_distal(origin) && !platform.labels.is_core(origin))
    throw Error(ErrorCode::UnknownLabel, "'" + origin + "' is not an origin label");
  if (!platform.labels.is_limb(limb)) throw Error(ErrorCode::UnknownLabel, "'" + limb + "' is not a limb label");
  if (pose.size() != platform.dof() || pose.support() != support_indices(platform, limb))
    throw Error(ErrorCode::SupportMismatch, "pose does not cover exactly the joints of " + limb);
  EndpointChain chain(platform, distal_most_link(platform, limb));
  Pose moved = overlay(neutral, pose);
  FidelityReport report;
  report.displacement = body_from_root(chain.position(moved.values) - chain.position(neutral.values));
  report.magnitude = report.displacement.norm();
  if (report.magnitude > 0.0) {
    auto d = direction_vector(direction);
    report.cosine = report.displacement.dot(Eigen::Vector3d(d[0], d[1], d[2])) / report.magnitude;
  }
  return report;
}

}  // namespace kinesphere
