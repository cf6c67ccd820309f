#include "kinesphere/ecl.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "kinesphere/canonical_json.hpp"
#include "kinesphere/error.hpp"

namespace kinesphere {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

std::string describe(const EntryKey& key) {
  return "(" + key.origin + ", " + key.limb + ", " + key.direction.name() + ")";
}

}  // namespace

EclStore::EclStore(std::string platform_name, std::size_t dof, VsamSpec spec)
    : platform_name_(std::move(platform_name)), dof_(dof), spec_(std::move(spec)) {
  spec_.kmax.clear();
}

EclStore make_store(const PlatformDescription& platform, VsamSpec spec) {
  return EclStore(platform.name, platform.dof(), std::move(spec));
}

std::vector<VsamRow> EclStore::vsam_rows() const {
  std::vector<VsamRow> out;
  out.reserve(vsam_.size());
  for (const auto& [_, row] : vsam_) out.push_back(row);
  return out;
}

std::vector<PoseRow> EclStore::pose_rows() const {
  std::vector<PoseRow> out;
  out.reserve(poses_.size());
  for (const auto& [key, values] : poses_) out.push_back({key.second, key.first, values});
  return out;
}

const VsamRow* EclStore::find(const EntryKey& key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &vsam_.at(it->second);
}

const VsamRow* EclStore::find(int k_id) const {
  auto it = vsam_.find(k_id);
  return it == vsam_.end() ? nullptr : &it->second;
}

int EclStore::kmax(int k_id) const {
  const VsamRow* row = find(k_id);
  if (!row) throw Error(ErrorCode::UnknownKId, "no vsam row with k_id " + std::to_string(k_id));
  auto it = spec_.kmax.find(row->key());
  return it == spec_.kmax.end() ? 0 : it->second;
}

const PartialPose* EclStore::pose(int k_id, int p_id) const {
  auto it = poses_.find({k_id, p_id});
  return it == poses_.end() ? nullptr : &it->second;
}

std::vector<VsamRow> EclStore::entries_for(const std::string& origin, const std::string& limb) const {
  std::vector<VsamRow> out;
  for (const auto& [key, k_id] : by_key_)
    if (key.origin == origin && key.limb == limb) out.push_back(vsam_.at(k_id));
  return out;
}

int EclStore::insert_entry(const PlatformDescription& platform, const std::string& origin, const std::string& limb,
                           DirectionPull direction) {
  if (!platform.labels.is_distal(origin) && !platform.labels.is_core(origin))
    throw Error(ErrorCode::UnknownLabel, "origin '" + origin + "' is not a joint or core label");
  if (!platform.labels.is_limb(limb) && !platform.labels.is_core(limb))
    throw Error(ErrorCode::UnknownLabel, "body part '" + limb + "' is not a limb or core label");
  if (direction.is_place_middle())
    throw Error(ErrorCode::ZeroDirection, "place-middle cannot be stored as a direction entry");
  EntryKey key{origin, limb, direction};
  if (by_key_.count(key)) throw Error(ErrorCode::DuplicateEntry, "entry " + describe(key) + " already exists");
  int k_id = next_k_id_++;
  vsam_[k_id] = VsamRow{k_id, origin, limb, direction};
  by_key_[key] = k_id;
  spec_.kmax[key] = 0;
  return k_id;
}

int EclStore::append_pose(const PlatformDescription& platform, int k_id, const PartialPose& pose) {
  const VsamRow* row = find(k_id);
  if (!row) throw Error(ErrorCode::UnknownKId, "no vsam row with k_id " + std::to_string(k_id));
  if (pose.size() != dof_)
    throw Error(ErrorCode::SupportMismatch, "pose has " + std::to_string(pose.size()) + " entries, platform has " +
                                                std::to_string(dof_));
  if (pose.support() != support_indices(platform, row->limb))
    throw Error(ErrorCode::SupportMismatch, "pose support differs from the joints of " + row->limb);
  PartialPose stored = pose;
  for (std::size_t i = 0; i < stored.size(); ++i) {
    if (!stored.values[i]) continue;
    const JointDim& dim = platform.joint_space.dims[i];
    double v = *stored.values[i];
    if (!(v >= dim.min && v <= dim.max))
      throw Error(ErrorCode::LimitViolation, "value " + std::to_string(v) + " outside the limits of joint " +
                                                 platform.tree.joints[dim.joint].name);
    stored.values[i] = std::clamp(round_significant9(v), dim.min, dim.max);
  }
  int current = spec_.kmax[row->key()];
  if (current + 1 > spec_.s_max)
    throw SizeOverflowError(current, "entry " + describe(row->key()) + " already holds " + std::to_string(current) +
                                         " sizes");
  int p_id = current + 1;
  poses_[{k_id, p_id}] = std::move(stored);
  spec_.kmax[row->key()] = p_id;
  return p_id;
}

void EclStore::remove_entry(int k_id) {
  const VsamRow* row = find(k_id);
  if (!row) throw Error(ErrorCode::UnknownKId, "no vsam row with k_id " + std::to_string(k_id));
  EntryKey key = row->key();
  std::erase_if(poses_, [&](const auto& item) { return item.first.first == k_id; });
  spec_.kmax.erase(key);
  by_key_.erase(key);
  vsam_.erase(k_id);
}

PartialPose query(const EclStore& store, const std::string& limb, const std::string& origin, DirectionPull direction,
                  int size) {
  EntryKey key{origin, limb, direction};
  const VsamRow* row = store.find(key);
  if (!row) throw Error(ErrorCode::NoSuchEntry, "no library entry " + describe(key));
  if (size < 1) throw Error(ErrorCode::InvalidSizeCount, "size must be at least 1");
  int kmax = store.kmax(row->k_id);
  if (size > kmax)
    throw SizeOverflowError(kmax, "size " + std::to_string(size) + " exceeds kmax " + std::to_string(kmax) + " of " +
                                      describe(key));
  return *store.pose(row->k_id, size);
}

PartialPose join_poses(const std::vector<PartialPose>& poses) {
  if (poses.empty()) throw std::invalid_argument("join_poses needs at least one pose");
  PartialPose out = PartialPose::empty(poses.front().size());
  for (const PartialPose& p : poses) {
    if (p.size() != out.size()) throw std::invalid_argument("join_poses: poses differ in length");
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!p.values[i]) continue;
      if (out.values[i] && *out.values[i] != *p.values[i])
        throw JointConflictError(i, "joint index " + std::to_string(i) + " is set to two different values");
      out.values[i] = p.values[i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Portable format

std::string export_store(const EclStore& store) {
  json doc = json::object();
  doc["version"] = kFormatVersion;
  doc["platform"] = store.platform_name();
  doc["dof"] = store.dof();
  doc["next_k_id"] = store.next_k_id();

  const VsamSpec& spec = store.spec();
  json jspec = json::object();
  jspec["origins"] = spec.origins;
  json dirs = json::array();
  for (const auto& d : spec.directions) dirs.push_back(d.name());
  jspec["directions"] = dirs;
  jspec["s_max"] = spec.s_max;
  json kmax = json::array();
  for (const auto& [key, k] : spec.kmax)
    kmax.push_back({{"origin", key.origin}, {"limb", key.limb}, {"direction", key.direction.name()}, {"kmax", k}});
  jspec["kmax"] = kmax;
  doc["spec"] = jspec;

  json vsam = json::array();
  for (const VsamRow& row : store.vsam_rows())
    vsam.push_back({{"k_id", row.k_id}, {"origin", row.origin}, {"limb", row.limb}, {"direction", row.direction.name()}});
  doc["vsam"] = vsam;

  json pose = json::array();
  for (const PoseRow& row : store.pose_rows()) {
    json q = json::array();
    for (const auto& v : row.values.values) q.push_back(v ? json(*v) : json(nullptr));
    pose.push_back({{"k_id", row.k_id}, {"p_id", row.p_id}, {"q", q}});
  }
  doc["pose"] = pose;
  return canonical_dump(doc);
}

namespace {

template <class T>
T field(const json& node, const char* name) {
  if (!node.is_object() || !node.contains(name)) throw Error(ErrorCode::FormatError, std::string("missing field '") + name + "'");
  try {
    return node.at(name).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("field '") + name + "': " + e.what());
  }
}

DirectionPull direction_field(const json& node) {
  auto name = field<std::string>(node, "direction");
  auto d = try_parse_direction(name);
  if (!d || d->is_place_middle()) throw Error(ErrorCode::FormatError, "bad direction '" + name + "'");
  return *d;
}

}  // namespace

EclStore import_store(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, std::string("ECL document is not JSON: ") + e.what());
  }
  if (field<int>(doc, "version") != kFormatVersion)
    throw Error(ErrorCode::FormatError, "unsupported ECL version");

  const json& jspec = doc.contains("spec") ? doc.at("spec") : throw Error(ErrorCode::FormatError, "missing field 'spec'");
  VsamSpec spec;
  spec.origins = field<std::vector<std::string>>(jspec, "origins");
  for (const auto& name : field<std::vector<std::string>>(jspec, "directions")) {
    auto d = try_parse_direction(name);
    if (!d || d->is_place_middle()) throw Error(ErrorCode::FormatError, "bad direction '" + name + "'");
    spec.directions.push_back(*d);
  }
  spec.s_max = field<int>(jspec, "s_max");
  if (spec.s_max < 1) throw Error(ErrorCode::FormatError, "s_max must be at least 1");

  EclStore store(field<std::string>(doc, "platform"), field<std::size_t>(doc, "dof"), spec);
  store.next_k_id_ = field<int>(doc, "next_k_id");

  for (const json& jrow : field<json>(doc, "vsam")) {
    VsamRow row{field<int>(jrow, "k_id"), field<std::string>(jrow, "origin"), field<std::string>(jrow, "limb"),
                direction_field(jrow)};
    if (row.k_id < 1 || row.k_id >= store.next_k_id_)
      throw Error(ErrorCode::IntegrityError, "k_id " + std::to_string(row.k_id) + " outside the allocated range");
    if (store.vsam_.count(row.k_id)) throw Error(ErrorCode::IntegrityError, "duplicate k_id " + std::to_string(row.k_id));
    if (store.by_key_.count(row.key())) throw Error(ErrorCode::IntegrityError, "duplicate entry " + describe(row.key()));
    store.by_key_[row.key()] = row.k_id;
    store.vsam_[row.k_id] = row;
  }

  for (const json& jrow : field<json>(doc, "pose")) {
    int k_id = field<int>(jrow, "k_id"), p_id = field<int>(jrow, "p_id");
    if (!store.vsam_.count(k_id))
      throw Error(ErrorCode::IntegrityError, "pose row references absent k_id " + std::to_string(k_id));
    const json& q = field<json>(jrow, "q");
    if (!q.is_array() || q.size() != store.dof_)
      throw Error(ErrorCode::IntegrityError, "pose row (" + std::to_string(p_id) + ", " + std::to_string(k_id) +
                                                 ") has the wrong length");
    PartialPose values = PartialPose::empty(store.dof_);
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (q[i].is_null()) continue;
      if (!q[i].is_number()) throw Error(ErrorCode::FormatError, "pose value is neither a number nor null");
      values.values[i] = q[i].get<double>();
    }
    if (!store.poses_.emplace(std::make_pair(k_id, p_id), std::move(values)).second)
      throw Error(ErrorCode::IntegrityError, "duplicate pose key (" + std::to_string(p_id) + ", " + std::to_string(k_id) + ")");
  }

  for (const auto& [k_id, row] : store.vsam_) {
    int count = 0;
    for (auto it = store.poses_.lower_bound({k_id, 0}); it != store.poses_.end() && it->first.first == k_id; ++it) {
      if (it->first.second != count + 1)
        throw Error(ErrorCode::IntegrityError, "p_id values of k_id " + std::to_string(k_id) + " are not 1..kmax");
      ++count;
    }
    if (count > spec.s_max) throw Error(ErrorCode::IntegrityError, "k_id " + std::to_string(k_id) + " exceeds s_max");
    store.spec_.kmax[row.key()] = count;
  }

  std::map<EntryKey, int> declared;
  for (const json& jk : field<json>(jspec, "kmax"))
    declared[{field<std::string>(jk, "origin"), field<std::string>(jk, "limb"), direction_field(jk)}] = field<int>(jk, "kmax");
  if (declared != store.spec_.kmax) throw Error(ErrorCode::IntegrityError, "declared kmax table disagrees with pose rows");
  return store;
}

ValidationReport check_store(const EclStore& store, const PlatformDescription& platform) {
  ValidationReport report;
  if (store.platform_name() != platform.name)
    report.push_back({"PLATFORM_MISMATCH", "store belongs to '" + store.platform_name() + "'"});
  if (store.dof() != platform.dof()) {
    report.push_back({"PLATFORM_MISMATCH", "store dof differs from the platform's"});
    return report;
  }
  for (const VsamRow& row : store.vsam_rows()) {
    if (!platform.labels.is_distal(row.origin) && !platform.labels.is_core(row.origin))
      report.push_back({"UNKNOWN_LABEL", "origin " + row.origin});
    if (!platform.labels.is_limb(row.limb) && !platform.labels.is_core(row.limb)) {
      report.push_back({"UNKNOWN_LABEL", "body part " + row.limb});
      continue;
    }
    auto support = support_indices(platform, row.limb);
    for (int p = 1; p <= store.kmax(row.k_id); ++p) {
      const PartialPose& pose = *store.pose(row.k_id, p);
      if (pose.support() != support)
        report.push_back({"SUPPORT_MISMATCH", "pose (" + std::to_string(p) + ", " + std::to_string(row.k_id) + ")"});
      for (std::size_t i = 0; i < pose.size(); ++i) {
        const JointDim& dim = platform.joint_space.dims[i];
        if (pose.values[i] && (*pose.values[i] < dim.min || *pose.values[i] > dim.max))
          report.push_back({"LIMIT_VIOLATION", "pose (" + std::to_string(p) + ", " + std::to_string(row.k_id) + ")"});
      }
    }
  }
  return report;
}

}  // namespace kinesphere
