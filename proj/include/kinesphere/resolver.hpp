#pragma once

// Turning sparse commands (limb, origin, direction, size) into platform
// targets and timed trajectories.
//
// Command text, one command per line:
//   limb_11 @ distal_11 -> left-high * 3
//   limb_11 @ distal_11 -> left-high * 2 & limb_21 @ distal_21 -> right-high * 2
//   # comment
// `&` joins commands into one compound target.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kinesphere/ecl.hpp"
#include "kinesphere/eurdf.hpp"
#include "kinesphere/pose.hpp"
#include "kinesphere/vsam.hpp"

namespace kinesphere {

struct CommandQuery {
  std::string limb;
  std::string origin;
  DirectionPull direction;
  int size = 1;

  std::string text() const;
  bool operator==(const CommandQuery&) const = default;
};

struct CommandLine {
  int line = 0;  ///< 1-based line in the source text
  std::vector<CommandQuery> commands;
};

/// Parses a command file. Throws SyntaxError (with line and column) or
/// UnknownDirectionName. Labels are not checked here.
std::vector<CommandLine> parse_commands(std::string_view text);

/// Parses exactly one command.
CommandQuery parse_command(std::string_view text);

struct TranslationDirective {
  DirectionPull direction;  ///< ground-projected, vertical == 0
  int magnitude = 0;        ///< quanta
  double quantum = 0.0;     ///< meters per quantum
  bool operator==(const TranslationDirective&) const = default;
};

struct ResolvedTarget {
  PartialPose articulation;
  std::optional<TranslationDirective> translation;
  bool operator==(const ResolvedTarget&) const = default;
};

/// Throws LimitViolation when a pose has the wrong length or leaves its limits.
void check_pose(const PlatformDescription& platform, const Pose& pose);

/// overlay() with the result checked against joint limits.
Pose overlay(const PlatformDescription& platform, const Pose& current, const PartialPose& partial);

/// Translation quantum for commands issued through `limb`.
double translation_quantum(const PlatformDescription& platform, const std::string& limb);

/// Root-frame base displacement a directive asks for.
Vec3 translation_offset(const TranslationDirective& translation);

ResolvedTarget resolve(const EclStore& store, const PlatformDescription& platform, const CommandQuery& cmd,
                       const Pose& current);

/// Joins the targets of several commands; at most one distinct translation.
ResolvedTarget compose(const EclStore& store, const PlatformDescription& platform,
                       const std::vector<CommandQuery>& cmds, const Pose& current);

struct TrajectoryStep {
  double t = 0.0;
  Pose pose;
  Vec3 base_offset{0.0, 0.0, 0.0};  ///< root frame, relative to the start
  bool operator==(const TrajectoryStep&) const = default;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  double duration = 0.0;
};

struct Timing {
  int steps = 50;
  double duration = 2.0;
};

/// Linear interpolation from `start` to overlay(start, target.articulation),
/// with the base moving linearly to the translation offset. The first and
/// last poses equal start and goal exactly.
Trajectory interpolate(const PlatformDescription& platform, const Pose& start, const ResolvedTarget& target,
                       Timing timing = {});

/// [{"t", "q", "base"}...]
nlohmann::json trajectory_json(const std::vector<TrajectoryStep>& steps);

/// Runs command lines one after another, each starting where the previous
/// ended, and returns the concatenated steps (time and base accumulate).
/// Errors carry the failing line number in their message.
std::vector<TrajectoryStep> execute_sequence(const EclStore& store, const PlatformDescription& platform,
                                             const std::vector<CommandLine>& lines, const Pose& start,
                                             Timing timing = {});

}  // namespace kinesphere
