#pragma once

// Platform descriptions with overlapping hierarchical body-part labels.
//
// A platform is a URDF kinematic tree plus three label families:
//   c_<k>        core parts (the linkage holding the center of mass)
//   limb_<c><d>  the subtree hanging off joint location <d> of chain <c>
//   distal_<c><d> the joint rooting limb_<c><d>
// Chains are the maximal serial chains leaving the core, numbered in
// traversal order (children visited by joint name). Depth counts joint
// locations, where consecutive actuated joints separated by a zero offset
// form a single location (a shoulder with pitch and roll, for example).
// Joints connecting two core parts are labeled distal_<k> with a single
// index. Indices of 10 or more are written with an underscore separator
// (limb_12_3); chain 0 denotes core joints.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kinesphere/pose.hpp"

namespace kinesphere {

using LinkId = std::size_t;
using JointId = std::size_t;
using Vec3 = std::array<double, 3>;

enum class JointType { revolute, prismatic, fixed };

struct Origin {
  Vec3 xyz{0.0, 0.0, 0.0};
  Vec3 rpy{0.0, 0.0, 0.0};
  bool operator==(const Origin&) const = default;
};

struct Link {
  std::string name;
  std::optional<double> geometry_extent;
  std::optional<JointId> parent_joint;
  bool operator==(const Link&) const = default;
};

struct Joint {
  std::string name;
  JointType type = JointType::fixed;
  Vec3 axis{1.0, 0.0, 0.0};
  Origin origin;
  LinkId parent = 0;
  LinkId child = 0;
  double limit_min = 0.0;
  double limit_max = 0.0;
  double increment = 0.0;
  double neutral = 0.0;

  bool actuated() const { return type != JointType::fixed; }
  bool operator==(const Joint&) const = default;
};

/// Links and joints indexed by id (their position in the vectors).
struct KinematicTree {
  std::vector<Link> links;
  std::vector<Joint> joints;

  std::optional<LinkId> find_link(std::string_view name) const;
  std::optional<JointId> find_joint(std::string_view name) const;
  /// The unique link without a parent joint. Assumes a well-formed tree.
  LinkId root() const;
  /// Joints whose parent is `link`, ordered by joint name.
  std::vector<JointId> child_joints(LinkId link) const;
  /// `link` and every link below it.
  std::set<LinkId> descendants(LinkId link) const;
  /// Parent link of `link`, if any.
  std::optional<LinkId> parent_link(LinkId link) const;
  /// Links ordered root to leaf, children by joint name.
  std::vector<LinkId> traversal_order() const;

  bool operator==(const KinematicTree&) const = default;
};

struct JointDim {
  JointId joint = 0;
  double min = 0.0;
  double max = 0.0;
  double increment = 0.0;
  bool operator==(const JointDim&) const = default;
};

/// The discretized configuration space: one dimension per actuated joint,
/// in joint-id order. Every Pose is interpreted against this ordering.
struct JointSpace {
  std::vector<JointDim> dims;

  std::size_t size() const { return dims.size(); }
  std::optional<std::size_t> index_of(JointId joint) const;
  bool operator==(const JointSpace&) const = default;
};

struct LabelSets {
  std::map<std::string, std::set<LinkId>> core;  ///< core label -> links
  std::map<std::string, LinkId> limbs;           ///< limb label -> subtree root link
  std::map<std::string, JointId> distals;        ///< distal label -> joint

  bool is_core(std::string_view label) const { return core.count(std::string(label)) != 0; }
  bool is_limb(std::string_view label) const { return limbs.count(std::string(label)) != 0; }
  bool is_distal(std::string_view label) const { return distals.count(std::string(label)) != 0; }
  bool operator==(const LabelSets&) const = default;
};

enum class LocomotionMode { none, ground };

struct Locomotion {
  LocomotionMode mode = LocomotionMode::none;
  /// Translation quantum in meters; when unset the resolver derives one.
  std::optional<double> quantum;
  bool operator==(const Locomotion&) const = default;
};

struct PlatformDescription {
  std::string name;
  KinematicTree tree;
  JointSpace joint_space;
  LabelSets labels;
  std::optional<LinkId> com_link;
  Locomotion locomotion;

  std::size_t dof() const { return joint_space.size(); }
  Pose neutral_pose() const;
  bool operator==(const PlatformDescription&) const = default;
};

// ---------------------------------------------------------------------------
// Label names

struct LabelIndex {
  int chain = 0;  ///< 0 for joints between core parts
  int depth = 0;  ///< location depth, or the core joint counter when chain == 0
  bool operator==(const LabelIndex&) const = default;
};

enum class LabelKind { core, limb, distal };

std::string core_label(int index);
std::string limb_label(int chain, int depth);
std::string distal_label(LabelIndex index);
std::optional<LabelKind> label_kind(std::string_view label);
/// Index of a limb_ or distal_ label, nullopt when malformed.
std::optional<LabelIndex> label_index(std::string_view label);

// ---------------------------------------------------------------------------
// Operations

struct ValidationIssue {
  std::string code;
  std::string message;
  bool operator==(const ValidationIssue&) const = default;
};
using ValidationReport = std::vector<ValidationIssue>;

/// Platform as read from a document plus the labeling problems found while
/// reconstructing label sets from per-element tags.
struct EurdfReadResult {
  PlatformDescription platform;
  ValidationReport issues;
};

/// Structural parse. Throws MalformedXml or SchemaViolation; labeling
/// problems are returned as issues so they can be reported.
EurdfReadResult read_eurdf(std::string_view document);

/// read_eurdf followed by validate(); throws LabelingError when either
/// reports anything.
PlatformDescription parse_eurdf(std::string_view document);

PlatformDescription load_eurdf_file(const std::string& path);

std::string serialize_eurdf(const PlatformDescription& platform);

/// Labels from the tree and the core parts (part i becomes c_<i+1>).
LabelSets derive_labels(const KinematicTree& tree, const std::vector<std::set<LinkId>>& core_parts);
LabelSets derive_labels(const KinematicTree& tree, const std::set<LinkId>& core_links);

JointSpace make_joint_space(const KinematicTree& tree);

struct Subtree {
  std::set<LinkId> links;
  std::set<JointId> joints;  ///< actuated joints only
  bool operator==(const Subtree&) const = default;
};

/// Links and actuated joints of a limb or core label. Throws UnknownLabel.
Subtree subtree(const PlatformDescription& platform, std::string_view label);

/// Joint-space indices of subtree(label).joints, ascending.
std::vector<std::size_t> support_indices(const PlatformDescription& platform, std::string_view label);

ValidationReport validate(const PlatformDescription& platform);

}  // namespace kinesphere
