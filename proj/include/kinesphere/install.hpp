#pragma once

// Library installation: filling an ECL either from recorded poses (the
// manual-manipulation path) or by searching the discretized joint grid for
// poses that reach along each direction.
//
// Automatic installation searches every (origin, limb, direction) entry
// independently. Entries are evaluated in parallel with OpenMP and
// committed to the store in a fixed order, so the result does not depend on
// the thread count. auto_install_serial runs the same search on one thread
// and is kept as the reference the parallel path is tested against.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kinesphere/ecl.hpp"
#include "kinesphere/eurdf.hpp"
#include "kinesphere/kinematics.hpp"
#include "kinesphere/vsam.hpp"

namespace kinesphere {

struct InstallConfig {
  int restarts = 16;
  int iterations = 200;             ///< coordinate sweeps per restart
  double orthogonal_penalty = 0.5;  ///< weight on off-direction displacement
  std::uint64_t seed = 0;
  /// Fractions of the best projection at which sizes 1..s_max are stored.
  /// Empty means k / s_max.
  std::vector<double> size_fractions;
  /// An entry is kept only if its best projection reaches this fraction of
  /// the limb's reach.
  double reach_floor = 0.05;
  /// Every stored size must point along its direction at least this well.
  double min_cosine = 0.7;
};

/// Search problem for one limb and direction on the joint grid. Grid
/// coordinates are integer steps from each joint's lower limit.
class PairProblem {
 public:
  PairProblem(const PlatformDescription& platform, const std::string& limb, DirectionPull direction, double penalty);

  struct Eval {
    double objective = 0.0;
    double projection = 0.0;
    Eigen::Vector3d displacement = Eigen::Vector3d::Zero();  ///< body frame
  };

  /// Number of searched joints (the limb's actuated joints).
  std::size_t dims() const { return joints_.size(); }
  /// Highest grid coordinate of searched joint k.
  int grid_max(std::size_t k) const { return grid_max_[k]; }
  double value(std::size_t k, int coord) const;
  /// Grid point nearest to the neutral pose.
  std::vector<int> neutral_coords() const;
  Eval evaluate(std::span<const int> coords) const;
  /// Stored form: searched joints set, everything else null.
  PartialPose to_partial(std::span<const int> coords) const;
  /// Unit direction in the body frame.
  const Eigen::Vector3d& direction() const { return direction_; }
  /// Squared joint-space distance from neutral.
  double distance_from_neutral(std::span<const int> coords) const;

 private:
  const PlatformDescription* platform_;
  std::vector<std::size_t> joints_;  ///< joint-space indices of the limb
  std::vector<int> grid_max_;
  EndpointChain chain_;
  std::vector<double> neutral_;
  Eigen::Vector3d neutral_endpoint_;
  Eigen::Vector3d direction_;
  double penalty_;
};

struct SearchResult {
  std::vector<int> best;
  PairProblem::Eval eval;
};

/// Random-restart coordinate ascent. Restart 0 starts at neutral, the rest at
/// uniformly drawn grid points. Steps start at a quarter of the widest joint
/// range and halve whenever a full sweep finds no improvement.
SearchResult coordinate_ascent(const PairProblem& problem, int restarts, int iterations, std::uint64_t seed);

enum class PairOutcome { stored, translation, below_floor, low_fidelity, non_monotonic };

std::string_view to_string(PairOutcome outcome);

struct PairReport {
  EntryKey key;
  PairOutcome outcome = PairOutcome::stored;
  double best_objective = 0.0;
  double max_projection = 0.0;
  std::vector<double> size_projections;
  std::vector<double> size_magnitudes;
  std::vector<double> size_cosines;
};

struct InstallResult {
  EclStore store;
  std::vector<PairReport> pairs;  ///< in commit order
};

/// Entries the installer considers: each joint origin with its paired limb
/// and every limb nested in it, times the spec's directions; core origins
/// get the horizontal directions as translation rows when the platform can
/// locomote.
std::vector<EntryKey> install_entries(const PlatformDescription& platform, const VsamSpec& spec);

/// Throws InstallFailure when the platform has limbs but no entry reaches
/// a positive projection in any direction.
InstallResult auto_install(const PlatformDescription& platform, const VsamSpec& spec, const InstallConfig& config);
InstallResult auto_install_serial(const PlatformDescription& platform, const VsamSpec& spec,
                                  const InstallConfig& config);

struct RecordResult {
  EclStore store;
  std::vector<std::string> warnings;
};

/// Populates a store from a recorded-poses document:
///   [{"origin", "limb", "direction", "poses": [[q...], ...]}, ...]
/// Values outside the limb are nulled (with a warning); nulls inside it are
/// a SupportMismatch.
RecordResult record_install(const PlatformDescription& platform, const VsamSpec& spec, std::string_view recorded);

}  // namespace kinesphere
