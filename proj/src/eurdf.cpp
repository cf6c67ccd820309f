#include "kinesphere/eurdf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "kinesphere/error.hpp"
#include "text_util.hpp"

namespace kinesphere {

namespace pt = boost::property_tree;

// ---------------------------------------------------------------------------
// Tree queries

std::optional<LinkId> KinematicTree::find_link(std::string_view name) const {
  for (LinkId i = 0; i < links.size(); ++i)
    if (links[i].name == name) return i;
  return std::nullopt;
}

std::optional<JointId> KinematicTree::find_joint(std::string_view name) const {
  for (JointId i = 0; i < joints.size(); ++i)
    if (joints[i].name == name) return i;
  return std::nullopt;
}

LinkId KinematicTree::root() const {
  for (LinkId i = 0; i < links.size(); ++i)
    if (!links[i].parent_joint) return i;
  return 0;
}

std::vector<JointId> KinematicTree::child_joints(LinkId link) const {
  std::vector<JointId> out;
  for (JointId j = 0; j < joints.size(); ++j)
    if (joints[j].parent == link) out.push_back(j);
  std::sort(out.begin(), out.end(),
            [&](JointId a, JointId b) { return joints[a].name < joints[b].name; });
  return out;
}

std::set<LinkId> KinematicTree::descendants(LinkId link) const {
  std::set<LinkId> out{link};
  std::vector<LinkId> stack{link};
  while (!stack.empty()) {
    LinkId cur = stack.back();
    stack.pop_back();
    for (const Joint& j : joints) {
      if (j.parent == cur && out.insert(j.child).second) stack.push_back(j.child);
    }
  }
  return out;
}

std::optional<LinkId> KinematicTree::parent_link(LinkId link) const {
  if (link >= links.size() || !links[link].parent_joint) return std::nullopt;
  return joints[*links[link].parent_joint].parent;
}

std::vector<LinkId> KinematicTree::traversal_order() const {
  std::vector<LinkId> order;
  if (links.empty()) return order;
  std::vector<LinkId> stack{root()};
  std::vector<bool> seen(links.size(), false);
  while (!stack.empty()) {
    LinkId cur = stack.back();
    stack.pop_back();
    if (seen[cur]) continue;
    seen[cur] = true;
    order.push_back(cur);
    auto kids = child_joints(cur);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(joints[*it].child);
  }
  return order;
}

std::optional<std::size_t> JointSpace::index_of(JointId joint) const {
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (dims[i].joint == joint) return i;
  return std::nullopt;
}

Pose PlatformDescription::neutral_pose() const {
  Pose pose;
  pose.values.reserve(joint_space.size());
  for (const JointDim& d : joint_space.dims) pose.values.push_back(tree.joints[d.joint].neutral);
  return pose;
}

JointSpace make_joint_space(const KinematicTree& tree) {
  JointSpace space;
  for (JointId j = 0; j < tree.joints.size(); ++j) {
    const Joint& joint = tree.joints[j];
    if (!joint.actuated()) continue;
    space.dims.push_back({j, joint.limit_min, joint.limit_max, joint.increment});
  }
  return space;
}

// ---------------------------------------------------------------------------
// Label names

namespace {

std::string join_index(int a, int b) {
  if (a < 10 && b < 10) return std::to_string(a) + std::to_string(b);
  return std::to_string(a) + "_" + std::to_string(b);
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::optional<LabelIndex> parse_suffix(std::string_view rest, bool allow_core) {
  if (auto us = rest.find('_'); us != std::string_view::npos) {
    auto a = rest.substr(0, us), b = rest.substr(us + 1);
    if (!all_digits(a) || !all_digits(b)) return std::nullopt;
    auto chain = detail::parse_int(a), depth = detail::parse_int(b);
    if (!chain || !depth || *depth < 1 || *chain < 0) return std::nullopt;
    if (*chain == 0 && !allow_core) return std::nullopt;
    return LabelIndex{*chain, *depth};
  }
  if (!all_digits(rest)) return std::nullopt;
  if (rest.size() == 1) {
    if (!allow_core || rest[0] == '0') return std::nullopt;
    return LabelIndex{0, rest[0] - '0'};
  }
  if (rest.size() == 2 && rest[0] != '0' && rest[1] != '0') return LabelIndex{rest[0] - '0', rest[1] - '0'};
  return std::nullopt;
}

}  // namespace

std::string core_label(int index) { return "c_" + std::to_string(index); }

std::string limb_label(int chain, int depth) { return "limb_" + join_index(chain, depth); }

std::string distal_label(LabelIndex index) {
  if (index.chain == 0) {
    if (index.depth < 10) return "distal_" + std::to_string(index.depth);
    return "distal_0_" + std::to_string(index.depth);
  }
  return "distal_" + join_index(index.chain, index.depth);
}

std::optional<LabelIndex> label_index(std::string_view label) {
  if (label.starts_with("limb_")) return parse_suffix(label.substr(5), false);
  if (label.starts_with("distal_")) return parse_suffix(label.substr(7), true);
  return std::nullopt;
}

std::optional<LabelKind> label_kind(std::string_view label) {
  if (label.starts_with("c_")) {
    auto rest = label.substr(2);
    if (all_digits(rest) && rest[0] != '0') return LabelKind::core;
    return std::nullopt;
  }
  if (label.starts_with("limb_") && label_index(label)) return LabelKind::limb;
  if (label.starts_with("distal_") && label_index(label)) return LabelKind::distal;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Label derivation

LabelSets derive_labels(const KinematicTree& tree, const std::set<LinkId>& core_links) {
  return derive_labels(tree, std::vector<std::set<LinkId>>{core_links});
}

LabelSets derive_labels(const KinematicTree& tree, const std::vector<std::set<LinkId>>& core_parts) {
  std::vector<int> part_of(tree.links.size(), -1);
  for (std::size_t p = 0; p < core_parts.size(); ++p) {
    for (LinkId l : core_parts[p]) {
      if (l >= tree.links.size()) throw Error(ErrorCode::DisconnectedCore, "core link id out of range");
      if (part_of[l] >= 0) throw Error(ErrorCode::DisconnectedCore, "link " + tree.links[l].name + " is in two core parts");
      part_of[l] = static_cast<int>(p);
    }
  }
  if (tree.links.empty() || part_of[tree.root()] < 0)
    throw Error(ErrorCode::DisconnectedCore, "core does not contain the root link");
  for (LinkId l = 0; l < tree.links.size(); ++l) {
    if (part_of[l] < 0 || l == tree.root()) continue;
    auto parent = tree.parent_link(l);
    if (!parent || part_of[*parent] < 0)
      throw Error(ErrorCode::DisconnectedCore, "core link " + tree.links[l].name + " is not attached to the core");
  }

  LabelSets labels;
  for (std::size_t p = 0; p < core_parts.size(); ++p) labels.core[core_label(static_cast<int>(p) + 1)] = core_parts[p];

  int core_joint_counter = 0;
  std::deque<JointId> chain_starts;
  for (LinkId link : tree.traversal_order()) {
    if (part_of[link] < 0) continue;
    for (JointId j : tree.child_joints(link)) {
      const Joint& joint = tree.joints[j];
      if (part_of[joint.child] >= 0) {
        if (joint.actuated() && part_of[joint.child] != part_of[link])
          labels.distals[distal_label({0, ++core_joint_counter})] = j;
      } else {
        chain_starts.push_back(j);
      }
    }
  }

  int chain = 0;
  while (!chain_starts.empty()) {
    JointId cur = chain_starts.front();
    chain_starts.pop_front();
    ++chain;
    int depth = 0;
    bool prev_actuated = false;
    for (;;) {
      const Joint& joint = tree.joints[cur];
      if (joint.actuated()) {
        const auto& t = joint.origin.xyz;
        bool collocated = prev_actuated && std::hypot(t[0], t[1], t[2]) < 1e-9;
        if (!collocated) {
          ++depth;
          labels.distals[distal_label({chain, depth})] = cur;
          labels.limbs[limb_label(chain, depth)] = joint.child;
        }
        prev_actuated = true;
      } else {
        prev_actuated = false;
      }
      auto kids = tree.child_joints(joint.child);
      if (kids.empty()) break;
      cur = kids.front();
      for (std::size_t k = 1; k < kids.size(); ++k) chain_starts.push_back(kids[k]);
    }
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Subtrees

Subtree subtree(const PlatformDescription& platform, std::string_view label) {
  const auto& tree = platform.tree;
  Subtree out;
  std::string key(label);
  if (auto it = platform.labels.limbs.find(key); it != platform.labels.limbs.end()) {
    out.links = tree.descendants(it->second);
    for (JointId j = 0; j < tree.joints.size(); ++j) {
      const Joint& joint = tree.joints[j];
      if (joint.actuated() && out.links.count(joint.child)) out.joints.insert(j);
    }
    return out;
  }
  if (auto it = platform.labels.core.find(key); it != platform.labels.core.end()) {
    out.links = it->second;
    std::set<LinkId> all_core;
    for (const auto& [_, links] : platform.labels.core) all_core.insert(links.begin(), links.end());
    for (JointId j = 0; j < tree.joints.size(); ++j) {
      const Joint& joint = tree.joints[j];
      if (joint.actuated() && out.links.count(joint.parent) && all_core.count(joint.child)) out.joints.insert(j);
    }
    return out;
  }
  throw Error(ErrorCode::UnknownLabel, "unknown body-part label '" + key + "'");
}

std::vector<std::size_t> support_indices(const PlatformDescription& platform, std::string_view label) {
  std::vector<std::size_t> out;
  for (JointId j : subtree(platform, label).joints)
    if (auto idx = platform.joint_space.index_of(j)) out.push_back(*idx);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void add(ValidationReport& report, std::string code, std::string message) {
  report.push_back({std::move(code), std::move(message)});
}

bool tree_is_sound(const KinematicTree& tree, ValidationReport& report) {
  std::size_t before = report.size();
  if (tree.links.empty()) {
    add(report, "NO_LINKS", "platform has no links");
    return false;
  }
  std::vector<int> parents(tree.links.size(), 0);
  for (JointId j = 0; j < tree.joints.size(); ++j) {
    const Joint& joint = tree.joints[j];
    if (joint.parent >= tree.links.size() || joint.child >= tree.links.size()) {
      add(report, "BAD_REFERENCE", "joint " + joint.name + " references a missing link");
      continue;
    }
    ++parents[joint.child];
    if (tree.links[joint.child].parent_joint != j)
      add(report, "BAD_REFERENCE", "link " + tree.links[joint.child].name + " does not record joint " + joint.name);
  }
  if (report.size() > before) return false;
  int roots = 0;
  for (LinkId l = 0; l < tree.links.size(); ++l) {
    if (parents[l] > 1) add(report, "MULTIPLE_PARENTS", "link " + tree.links[l].name + " has several parent joints");
    if (parents[l] == 0) ++roots;
  }
  if (roots != 1) add(report, "NOT_SINGLE_ROOT", "kinematic tree has " + std::to_string(roots) + " roots");
  if (report.size() > before) return false;
  auto reachable = tree.descendants(tree.root());
  if (reachable.size() != tree.links.size()) {
    add(report, "CYCLE", "some links are not reachable from the root");
    return false;
  }
  return true;
}

}  // namespace

ValidationReport validate(const PlatformDescription& platform) {
  ValidationReport report;
  const auto& tree = platform.tree;
  if (!tree_is_sound(tree, report)) return report;

  for (const Joint& joint : tree.joints) {
    if (!joint.actuated()) continue;
    if (!(joint.limit_min < joint.limit_max))
      add(report, "EMPTY_JOINT_RANGE", "joint " + joint.name + " has limit_min >= limit_max");
    if (!(joint.increment > 0.0)) add(report, "BAD_INCREMENT", "joint " + joint.name + " has a non-positive increment");
    double n = std::hypot(joint.axis[0], joint.axis[1], joint.axis[2]);
    if (std::abs(n - 1.0) > 1e-6) add(report, "BAD_AXIS", "joint " + joint.name + " axis is not a unit vector");
    if (joint.limit_min < joint.limit_max && (joint.neutral < joint.limit_min || joint.neutral > joint.limit_max))
      add(report, "NEUTRAL_OUT_OF_RANGE", "joint " + joint.name + " neutral value is outside its limits");
  }
  if (platform.joint_space != make_joint_space(tree))
    add(report, "JOINT_SPACE_MISMATCH", "joint space does not list the actuated joints in id order");

  const auto& labels = platform.labels;
  std::vector<int> core_of(tree.links.size(), -1);
  if (labels.core.empty()) add(report, "CORE_MISSING", "no core label");
  int part = 0;
  for (const auto& [name, links] : labels.core) {
    if (label_kind(name) != LabelKind::core) add(report, "BAD_LABEL", "'" + name + "' is not a core label");
    for (LinkId l : links) {
      if (l >= tree.links.size()) {
        add(report, "BAD_REFERENCE", "core label " + name + " references a missing link");
        continue;
      }
      if (core_of[l] >= 0) add(report, "CORE_OVERLAP", "link " + tree.links[l].name + " carries two core labels");
      core_of[l] = part;
    }
    ++part;
  }
  if (!labels.core.empty()) {
    if (core_of[tree.root()] < 0) add(report, "CORE_DISCONNECTED", "core does not contain the root link");
    for (LinkId l = 0; l < tree.links.size(); ++l) {
      if (core_of[l] < 0 || l == tree.root()) continue;
      auto parent = tree.parent_link(l);
      if (!parent || core_of[*parent] < 0)
        add(report, "CORE_DISCONNECTED", "core link " + tree.links[l].name + " is not attached to the core");
    }
  }
  if (!platform.com_link) {
    add(report, "COM_MISSING", "no link is designated as holding the center of mass");
  } else if (*platform.com_link >= tree.links.size() || core_of[*platform.com_link] < 0) {
    add(report, "COM_NOT_IN_CORE", "center-of-mass link is not a core link");
  }

  for (const auto& [name, joint] : labels.distals) {
    auto idx = label_index(name);
    if (!idx || !name.starts_with("distal_")) {
      add(report, "BAD_LABEL", "'" + name + "' is not a distal label");
      continue;
    }
    if (joint >= tree.joints.size()) {
      add(report, "BAD_REFERENCE", name + " references a missing joint");
      continue;
    }
    const Joint& j = tree.joints[joint];
    if (!j.actuated()) add(report, "DISTAL_NOT_ACTUATED", name + " labels fixed joint " + j.name);
    if (idx->chain == 0) {
      if (core_of[j.parent] < 0 || core_of[j.child] < 0)
        add(report, "DISTAL_NOT_CORE_JOINT", name + " does not connect two core parts");
    } else if (!labels.limbs.count(limb_label(idx->chain, idx->depth))) {
      add(report, "ORPHAN_DISTAL", name + " has no matching limb label");
    }
  }

  std::set<LinkId> covered;
  for (LinkId l = 0; l < tree.links.size(); ++l)
    if (core_of[l] >= 0) covered.insert(l);

  for (const auto& [name, root] : labels.limbs) {
    auto idx = label_index(name);
    if (!idx || !name.starts_with("limb_")) {
      add(report, "BAD_LABEL", "'" + name + "' is not a limb label");
      continue;
    }
    if (root >= tree.links.size()) {
      add(report, "BAD_REFERENCE", name + " references a missing link");
      continue;
    }
    auto below = tree.descendants(root);
    covered.insert(below.begin(), below.end());
    if (core_of[root] >= 0) add(report, "LIMB_IN_CORE", name + " is rooted at a core link");

    auto distal = labels.distals.find(distal_label(*idx));
    if (distal == labels.distals.end()) {
      add(report, "ORPHAN_LIMB", name + " has no matching distal label");
    } else if (distal->second < tree.joints.size() && tree.joints[distal->second].child != root) {
      add(report, "PAIRING_MISMATCH", distal->first + " is not the proximal joint of " + name);
    }

    if (idx->depth > 1) {
      auto outer = labels.limbs.find(limb_label(idx->chain, idx->depth - 1));
      if (outer == labels.limbs.end()) {
        add(report, "NESTING_VIOLATION", name + " has no enclosing limb at depth " + std::to_string(idx->depth - 1));
      } else if (outer->second >= tree.links.size() || outer->second == root ||
                 !tree.descendants(outer->second).count(root)) {
        add(report, "NESTING_VIOLATION", name + " is not strictly inside " + outer->first);
      }
    }
  }

  for (LinkId l = 0; l < tree.links.size(); ++l)
    if (!covered.count(l)) add(report, "UNCOVERED_LINK", "link " + tree.links[l].name + " carries no core or limb label");
  return report;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

const pt::ptree* body_part_node(const pt::ptree& node) {
  if (auto it = node.find("body_part"); it != node.not_found()) return &it->second;
  if (auto it = node.find("Body_part"); it != node.not_found()) return &it->second;
  return nullptr;
}

Vec3 parse_vec3(const std::string& text, const std::string& what) {
  auto parts = detail::split_whitespace(text);
  if (parts.size() != 3) throw Error(ErrorCode::SchemaViolation, what + " needs three numbers");
  Vec3 v{};
  for (int i = 0; i < 3; ++i) {
    auto d = detail::parse_double(parts[i]);
    if (!d) throw Error(ErrorCode::SchemaViolation, what + " has a non-numeric component '" + parts[i] + "'");
    v[i] = *d;
  }
  return v;
}

double parse_number(const std::string& text, const std::string& what) {
  auto d = detail::parse_double(text);
  if (!d) throw Error(ErrorCode::SchemaViolation, what + " is not a number: '" + text + "'");
  return *d;
}

std::string required_attr(const pt::ptree& node, const std::string& attr, const std::string& what) {
  auto value = node.get_optional<std::string>("<xmlattr>." + attr);
  if (!value) throw Error(ErrorCode::SchemaViolation, what + " is missing attribute '" + attr + "'");
  return *value;
}

}  // namespace

EurdfReadResult read_eurdf(std::string_view document) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::MalformedXml, std::string("malformed XML: ") + e.what());
  }
  auto robot_it = doc.find("robot");
  if (robot_it == doc.not_found()) throw Error(ErrorCode::SchemaViolation, "document has no <robot> element");
  const pt::ptree& robot = robot_it->second;

  EurdfReadResult result;
  PlatformDescription& platform = result.platform;
  platform.name = robot.get<std::string>("<xmlattr>.name", "");
  KinematicTree& tree = platform.tree;

  std::vector<std::vector<std::string>> link_tags;
  std::vector<std::vector<std::string>> joint_tags;
  int com_count = 0;

  for (const auto& [tag, node] : robot) {
    if (tag == "link") {
      Link link;
      link.name = required_attr(node, "name", "<link>");
      if (tree.find_link(link.name)) throw Error(ErrorCode::SchemaViolation, "duplicate link '" + link.name + "'");
      if (auto extent = node.get_optional<std::string>("<xmlattr>.extent"))
        link.geometry_extent = parse_number(*extent, "extent of link " + link.name);
      if (node.get<std::string>("<xmlattr>.com", "false") == "true") {
        platform.com_link = tree.links.size();
        ++com_count;
      }
      const pt::ptree* bp = body_part_node(node);
      if (!bp) throw Error(ErrorCode::SchemaViolation, "link '" + link.name + "' has no <body_part>");
      link_tags.push_back(detail::split_whitespace(bp->data()));
      tree.links.push_back(std::move(link));
    } else if (tag == "locomotion") {
      std::string mode = node.get<std::string>("<xmlattr>.mode", "none");
      if (mode == "ground") {
        platform.locomotion.mode = LocomotionMode::ground;
      } else if (mode != "none") {
        throw Error(ErrorCode::SchemaViolation, "unknown locomotion mode '" + mode + "'");
      }
      if (auto q = node.get_optional<std::string>("<xmlattr>.quantum"))
        platform.locomotion.quantum = parse_number(*q, "locomotion quantum");
    }
  }
  if (com_count > 1) throw Error(ErrorCode::SchemaViolation, "more than one link carries com=\"true\"");

  for (const auto& [tag, node] : robot) {
    if (tag != "joint") continue;
    Joint joint;
    joint.name = required_attr(node, "name", "<joint>");
    if (tree.find_joint(joint.name)) throw Error(ErrorCode::SchemaViolation, "duplicate joint '" + joint.name + "'");
    std::string type = required_attr(node, "type", "joint " + joint.name);
    if (type == "revolute") joint.type = JointType::revolute;
    else if (type == "prismatic") joint.type = JointType::prismatic;
    else if (type == "fixed") joint.type = JointType::fixed;
    else throw Error(ErrorCode::SchemaViolation, "joint " + joint.name + " has unsupported type '" + type + "'");

    auto link_ref = [&](const char* which) {
      auto name = node.get_optional<std::string>(std::string(which) + ".<xmlattr>.link");
      if (!name) throw Error(ErrorCode::SchemaViolation, "joint " + joint.name + " has no <" + which + ">");
      auto id = tree.find_link(*name);
      if (!id) throw Error(ErrorCode::SchemaViolation, "joint " + joint.name + " references unknown link '" + *name + "'");
      return *id;
    };
    joint.parent = link_ref("parent");
    joint.child = link_ref("child");
    if (auto xyz = node.get_optional<std::string>("origin.<xmlattr>.xyz"))
      joint.origin.xyz = parse_vec3(*xyz, "origin of joint " + joint.name);
    if (auto rpy = node.get_optional<std::string>("origin.<xmlattr>.rpy"))
      joint.origin.rpy = parse_vec3(*rpy, "origin of joint " + joint.name);

    if (joint.actuated()) {
      if (auto axis = node.get_optional<std::string>("axis.<xmlattr>.xyz"))
        joint.axis = parse_vec3(*axis, "axis of joint " + joint.name);
      auto limit = node.get_child_optional("limit");
      if (!limit) throw Error(ErrorCode::SchemaViolation, "joint " + joint.name + " has no <limit>");
      joint.limit_min = parse_number(required_attr(*limit, "lower", "limit of " + joint.name), "lower limit");
      joint.limit_max = parse_number(required_attr(*limit, "upper", "limit of " + joint.name), "upper limit");
      joint.increment = 0.001;
      if (auto inc = limit->get_optional<std::string>("<xmlattr>.increment"))
        joint.increment = parse_number(*inc, "increment of " + joint.name);
      if (auto neutral = limit->get_optional<std::string>("<xmlattr>.neutral")) {
        joint.neutral = parse_number(*neutral, "neutral of " + joint.name);
      } else {
        joint.neutral = std::clamp(0.0, std::min(joint.limit_min, joint.limit_max), std::max(joint.limit_min, joint.limit_max));
      }
    }
    const pt::ptree* bp = body_part_node(node);
    joint_tags.push_back(bp ? detail::split_whitespace(bp->data()) : std::vector<std::string>{});

    JointId id = tree.joints.size();
    if (tree.links[joint.child].parent_joint)
      throw Error(ErrorCode::SchemaViolation, "link '" + tree.links[joint.child].name + "' has several parent joints");
    tree.links[joint.child].parent_joint = id;
    tree.joints.push_back(std::move(joint));
  }

  ValidationReport structural;
  if (!tree_is_sound(tree, structural))
    throw Error(ErrorCode::SchemaViolation, structural.front().code + ": " + structural.front().message);

  platform.joint_space = make_joint_space(tree);

  // Labels from per-element tags.
  std::map<int, std::set<LinkId>> core_parts;
  std::map<std::string, std::set<LinkId>> limb_tags;
  for (LinkId l = 0; l < tree.links.size(); ++l) {
    if (link_tags[l].empty())
      throw Error(ErrorCode::SchemaViolation, "link '" + tree.links[l].name + "' has an empty <body_part>");
    for (const std::string& token : link_tags[l]) {
      auto kind = label_kind(token);
      if (kind == LabelKind::core) {
        platform.labels.core[token].insert(l);
      } else if (kind == LabelKind::limb) {
        limb_tags[token].insert(l);
      } else {
        add(result.issues, "BAD_LABEL", "link " + tree.links[l].name + " carries unusable label '" + token + "'");
      }
    }
  }
  for (JointId j = 0; j < tree.joints.size(); ++j) {
    for (const std::string& token : joint_tags[j]) {
      if (label_kind(token) != LabelKind::distal) {
        add(result.issues, "BAD_LABEL", "joint " + tree.joints[j].name + " carries unusable label '" + token + "'");
        continue;
      }
      if (platform.labels.distals.count(token)) {
        add(result.issues, "DUPLICATE_LABEL", token + " is attached to several joints");
        continue;
      }
      platform.labels.distals[token] = j;
    }
  }
  for (const auto& [label, tagged] : limb_tags) {
    // The root is the tagged link whose parent is untagged; all links below it
    // must carry the label too.
    std::vector<LinkId> roots;
    for (LinkId l : tagged) {
      auto parent = tree.parent_link(l);
      if (!parent || !tagged.count(*parent)) roots.push_back(l);
    }
    platform.labels.limbs[label] = roots.front();
    if (roots.size() != 1 || tree.descendants(roots.front()) != tagged)
      add(result.issues, "LIMB_TAG_MISMATCH", label + " is not carried by exactly one complete subtree");
  }
  return result;
}

PlatformDescription parse_eurdf(std::string_view document) {
  EurdfReadResult result = read_eurdf(document);
  ValidationReport report = result.issues;
  for (auto& issue : validate(result.platform)) report.push_back(std::move(issue));
  if (!report.empty()) {
    std::string message = "platform '" + result.platform.name + "' fails validation:";
    for (const auto& issue : report) message += " " + issue.code + " (" + issue.message + ");";
    throw Error(ErrorCode::LabelingError, message);
  }
  return std::move(result.platform);
}

PlatformDescription load_eurdf_file(const std::string& path) { return parse_eurdf(detail::read_file(path)); }

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string vec3_text(const Vec3& v) {
  return detail::format_shortest(v[0]) + " " + detail::format_shortest(v[1]) + " " + detail::format_shortest(v[2]);
}

std::string joint_type_name(JointType t) {
  switch (t) {
    case JointType::revolute: return "revolute";
    case JointType::prismatic: return "prismatic";
    case JointType::fixed: return "fixed";
  }
  return "fixed";
}

}  // namespace

std::string serialize_eurdf(const PlatformDescription& platform) {
  const auto& tree = platform.tree;
  const auto& labels = platform.labels;
  std::vector<std::pair<LabelIndex, std::string>> limbs_ordered;
  for (const auto& [name, _] : labels.limbs) limbs_ordered.emplace_back(label_index(name).value_or(LabelIndex{}), name);
  std::sort(limbs_ordered.begin(), limbs_ordered.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.chain, a.first.depth, a.second) < std::tie(b.first.chain, b.first.depth, b.second);
  });
  std::map<std::string, std::set<LinkId>> limb_links;
  for (const auto& [name, root] : labels.limbs) limb_links[name] = tree.descendants(root);

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
  out << "<robot name=\"" << detail::xml_escape(platform.name) << "\">\n";
  if (platform.locomotion.mode != LocomotionMode::none || platform.locomotion.quantum) {
    out << "  <locomotion mode=\"" << (platform.locomotion.mode == LocomotionMode::ground ? "ground" : "none") << "\"";
    if (platform.locomotion.quantum) out << " quantum=\"" << detail::format_shortest(*platform.locomotion.quantum) << "\"";
    out << "/>\n";
  }
  for (LinkId l = 0; l < tree.links.size(); ++l) {
    const Link& link = tree.links[l];
    out << "  <link name=\"" << detail::xml_escape(link.name) << "\"";
    if (platform.com_link == l) out << " com=\"true\"";
    if (link.geometry_extent) out << " extent=\"" << detail::format_shortest(*link.geometry_extent) << "\"";
    out << ">\n    <body_part>";
    bool first = true;
    auto emit = [&](const std::string& token) {
      if (!first) out << ' ';
      out << token;
      first = false;
    };
    for (const auto& [name, links] : labels.core)
      if (links.count(l)) emit(name);
    for (const auto& [_, name] : limbs_ordered)
      if (limb_links[name].count(l)) emit(name);
    out << "</body_part>\n  </link>\n";
  }
  for (JointId j = 0; j < tree.joints.size(); ++j) {
    const Joint& joint = tree.joints[j];
    out << "  <joint name=\"" << detail::xml_escape(joint.name) << "\" type=\"" << joint_type_name(joint.type) << "\">\n";
    out << "    <parent link=\"" << detail::xml_escape(tree.links[joint.parent].name) << "\"/>\n";
    out << "    <child link=\"" << detail::xml_escape(tree.links[joint.child].name) << "\"/>\n";
    out << "    <origin xyz=\"" << vec3_text(joint.origin.xyz) << "\" rpy=\"" << vec3_text(joint.origin.rpy) << "\"/>\n";
    if (joint.actuated()) {
      out << "    <axis xyz=\"" << vec3_text(joint.axis) << "\"/>\n";
      out << "    <limit lower=\"" << detail::format_shortest(joint.limit_min) << "\" upper=\""
          << detail::format_shortest(joint.limit_max) << "\" increment=\"" << detail::format_shortest(joint.increment)
          << "\" neutral=\"" << detail::format_shortest(joint.neutral) << "\"/>\n";
    }
    std::vector<std::string> tokens;
    for (const auto& [name, id] : labels.distals)
      if (id == j) tokens.push_back(name);
    if (!tokens.empty()) {
      out << "    <body_part>";
      for (std::size_t i = 0; i < tokens.size(); ++i) out << (i ? " " : "") << tokens[i];
      out << "</body_part>\n";
    }
    out << "  </joint>\n";
  }
  out << "</robot>\n";
  return out.str();
}

}  // namespace kinesphere
