#pragma once

// Embodied configuration library: the two-table pose databank.
//
//   vsam(k_id PK, origin, limb, direction)       unique (origin, limb, direction)
//   pose(p_id, k_id FK -> vsam, q_1 .. q_M)      PK (p_id, k_id)
//
// p_id runs 1..kmax without gaps for every k_id and doubles as the reach
// size. Pose entries for joints outside the row's body part are null.

#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "kinesphere/eurdf.hpp"
#include "kinesphere/pose.hpp"
#include "kinesphere/vsam.hpp"

namespace kinesphere {

struct VsamRow {
  int k_id = 0;
  std::string origin;
  std::string limb;
  DirectionPull direction;

  EntryKey key() const { return {origin, limb, direction}; }
  bool operator==(const VsamRow&) const = default;
};

struct PoseRow {
  int p_id = 0;
  int k_id = 0;
  PartialPose values;
  bool operator==(const PoseRow&) const = default;
};

class EclStore {
 public:
  EclStore() = default;
  EclStore(std::string platform_name, std::size_t dof, VsamSpec spec);

  const std::string& platform_name() const { return platform_name_; }
  std::size_t dof() const { return dof_; }
  const VsamSpec& spec() const { return spec_; }
  int next_k_id() const { return next_k_id_; }

  /// Rows ordered by k_id.
  std::vector<VsamRow> vsam_rows() const;
  /// Rows ordered by (k_id, p_id).
  std::vector<PoseRow> pose_rows() const;
  std::size_t vsam_size() const { return vsam_.size(); }
  std::size_t pose_size() const { return poses_.size(); }

  const VsamRow* find(const EntryKey& key) const;
  const VsamRow* find(int k_id) const;
  /// Highest stored size for a row (0 when it has no poses).
  int kmax(int k_id) const;
  const PartialPose* pose(int k_id, int p_id) const;

  /// Rows for one origin and body part, ordered by direction.
  std::vector<VsamRow> entries_for(const std::string& origin, const std::string& limb) const;

  int insert_entry(const PlatformDescription& platform, const std::string& origin, const std::string& limb,
                   DirectionPull direction);
  int append_pose(const PlatformDescription& platform, int k_id, const PartialPose& pose);
  /// Removes a row and its poses. Its k_id is never handed out again.
  void remove_entry(int k_id);

  bool operator==(const EclStore&) const = default;

 private:
  friend EclStore import_store(std::string_view text);

  std::string platform_name_;
  std::size_t dof_ = 0;
  VsamSpec spec_;
  int next_k_id_ = 1;
  std::map<int, VsamRow> vsam_;
  std::map<std::pair<int, int>, PartialPose> poses_;  ///< (k_id, p_id)
  std::map<EntryKey, int> by_key_;
};

EclStore make_store(const PlatformDescription& platform, VsamSpec spec);

/// f_SB: the stored pose for (l, o, d, s). Throws NoSuchEntry when the triple
/// is absent and SizeOverflowError (carrying kmax) when s exceeds it.
PartialPose query(const EclStore& store, const std::string& limb, const std::string& origin, DirectionPull direction,
                  int size);

/// Union of supports. Identical values on shared joints merge; differing
/// ones throw JointConflictError.
PartialPose join_poses(const std::vector<PartialPose>& poses);

std::string export_store(const EclStore& store);
/// Throws FormatError for malformed documents and IntegrityError for broken
/// keys (dangling k_id, gaps in p_id, kmax disagreeing with the pose table).
EclStore import_store(std::string_view text);

/// Checks a store against the platform it claims to describe: labels exist,
/// null discipline holds, values are inside joint limits.
ValidationReport check_store(const EclStore& store, const PlatformDescription& platform);

/// Reader-writer wrapper: any number of concurrent readers or one writer.
class SharedStore {
 public:
  explicit SharedStore(EclStore store) : store_(std::move(store)) {}

  template <class F>
  decltype(auto) read(F&& f) const {
    std::shared_lock lock(mutex_);
    return std::forward<F>(f)(std::as_const(store_));
  }

  template <class F>
  decltype(auto) write(F&& f) {
    std::unique_lock lock(mutex_);
    return std::forward<F>(f)(store_);
  }

 private:
  mutable std::shared_mutex mutex_;
  EclStore store_;
};

}  // namespace kinesphere
