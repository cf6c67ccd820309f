#include "kinesphere/resolver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "kinesphere/error.hpp"
#include "kinesphere/kinematics.hpp"

namespace kinesphere {

std::string CommandQuery::text() const {
  return limb + " @ " + origin + " -> " + direction.name() + " * " + std::to_string(size);
}

// ---------------------------------------------------------------------------
// Command grammar

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, int line_no) : s_(line), line_(line_no) {}

  std::vector<CommandQuery> parse() {
    std::vector<CommandQuery> out;
    for (;;) {
      out.push_back(command());
      skip_space();
      if (pos_ == s_.size()) break;
      expect("&", "'&' or end of line");
    }
    return out;
  }

 private:
  CommandQuery command() {
    CommandQuery q;
    q.limb = identifier("body-part label");
    expect("@", "'@'");
    q.origin = identifier("origin label");
    expect("->", "'->'");
    skip_space();
    std::size_t col = pos_;
    std::string name = take([](char c) { return std::islower(static_cast<unsigned char>(c)) || c == '-'; });
    if (name.empty()) fail(col, "expected a direction name");
    auto d = try_parse_direction(name);
    if (!d)
      throw Error(ErrorCode::UnknownDirectionName, std::to_string(line_) + ":" + std::to_string(col + 1) +
                                                       ": unknown direction '" + name + "'");
    q.direction = *d;
    expect("*", "'*'");
    skip_space();
    col = pos_;
    std::string digits = take([](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
    if (digits.empty() || digits.size() > 6 || std::stoi(digits) < 1) fail(col, "size must be a positive integer");
    q.size = std::stoi(digits);
    return q;
  }

  std::string identifier(const char* what) {
    skip_space();
    std::size_t col = pos_;
    std::string id = take([](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
    if (id.empty()) fail(col, std::string("expected ") + what);
    return id;
  }

  void expect(std::string_view token, const char* what) {
    skip_space();
    if (s_.substr(pos_, token.size()) != token) fail(pos_, std::string("expected ") + what);
    pos_ += token.size();
  }

  template <class Pred>
  std::string take(Pred pred) {
    std::size_t start = pos_;
    while (pos_ < s_.size() && pred(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(std::size_t col, const std::string& message) {
    throw SyntaxError(line_, static_cast<int>(col) + 1, message);
  }

  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<CommandLine> parse_commands(std::string_view text) {
  std::vector<CommandLine> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    bool blank = std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (!blank) out.push_back({line_no, LineParser(line, line_no).parse()});
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

CommandQuery parse_command(std::string_view text) {
  auto lines = parse_commands(text);
  if (lines.size() != 1 || lines.front().commands.size() != 1)
    throw SyntaxError(1, 1, "expected exactly one command");
  return lines.front().commands.front();
}

// ---------------------------------------------------------------------------
// Resolution

void check_pose(const PlatformDescription& platform, const Pose& pose) {
  if (pose.size() != platform.dof())
    throw Error(ErrorCode::LimitViolation, "pose has " + std::to_string(pose.size()) + " values, platform has " +
                                               std::to_string(platform.dof()));
  for (std::size_t i = 0; i < pose.size(); ++i) {
    const JointDim& dim = platform.joint_space.dims[i];
    if (!(pose.values[i] >= dim.min && pose.values[i] <= dim.max))
      throw Error(ErrorCode::LimitViolation, "joint " + platform.tree.joints[dim.joint].name + " value " +
                                                 std::to_string(pose.values[i]) + " is outside its limits");
  }
}

Pose overlay(const PlatformDescription& platform, const Pose& current, const PartialPose& partial) {
  Pose out = overlay(current, partial);
  check_pose(platform, out);
  return out;
}

double translation_quantum(const PlatformDescription& platform, const std::string& limb) {
  if (platform.locomotion.quantum) return *platform.locomotion.quantum;
  if (platform.labels.is_limb(limb)) {
    double reach = limb_reach(platform, limb);
    if (reach > 0.0) return reach;
  }
  return 0.25;
}

Vec3 translation_offset(const TranslationDirective& translation) {
  auto d = direction_vector(translation.direction);
  Eigen::Vector3d v = root_from_body(Eigen::Vector3d(d[0], d[1], d[2])) * (translation.magnitude * translation.quantum);
  return {v.x(), v.y(), v.z()};
}

namespace {

PartialPose neutral_over(const PlatformDescription& platform, const std::string& label) {
  Pose neutral = platform.neutral_pose();
  PartialPose out = PartialPose::empty(platform.dof());
  for (std::size_t i : support_indices(platform, label)) out.values[i] = neutral.values[i];
  return out;
}

TranslationDirective make_translation(const PlatformDescription& platform, const CommandQuery& cmd, int magnitude) {
  if (platform.locomotion.mode == LocomotionMode::none)
    throw Error(ErrorCode::NoLocomotion, platform.name + " has no locomotion mode to fulfil '" + cmd.text() + "'");
  DirectionPull ground{cmd.direction.lateral, cmd.direction.sagittal, 0};
  if (ground.is_place_middle())
    throw Error(ErrorCode::GroundProjectionDegenerate,
                "'" + cmd.direction.name() + "' has no horizontal component to translate along");
  return {ground, magnitude, translation_quantum(platform, cmd.limb)};
}

}  // namespace

ResolvedTarget resolve(const EclStore& store, const PlatformDescription& platform, const CommandQuery& cmd,
                       const Pose& current) {
  check_pose(platform, current);
  const auto& labels = platform.labels;
  if (!labels.is_limb(cmd.limb) && !labels.is_core(cmd.limb))
    throw Error(ErrorCode::UnknownLabel, "unknown body-part label '" + cmd.limb + "'");
  if (!labels.is_distal(cmd.origin) && !labels.is_core(cmd.origin))
    throw Error(ErrorCode::UnknownLabel, "unknown origin label '" + cmd.origin + "'");
  if (cmd.size < 1) throw Error(ErrorCode::InvalidSizeCount, "size must be at least 1");

  ResolvedTarget target{PartialPose::empty(platform.dof()), std::nullopt};
  if (cmd.direction.is_place_middle()) {
    target.articulation = neutral_over(platform, cmd.limb);
    return target;
  }
  const VsamRow* row = store.find(EntryKey{cmd.origin, cmd.limb, cmd.direction});
  if (!row) throw Error(ErrorCode::NoSuchEntry, "no library entry for '" + cmd.text() + "'");

  if (labels.is_core(cmd.limb)) {
    target.translation = make_translation(platform, cmd, cmd.size);
    return target;
  }
  int kmax = store.kmax(row->k_id);
  if (cmd.size <= kmax) {
    target.articulation = query(store, cmd.limb, cmd.origin, cmd.direction, cmd.size);
    return target;
  }
  target.translation = make_translation(platform, cmd, cmd.size - kmax);
  if (kmax > 0) target.articulation = query(store, cmd.limb, cmd.origin, cmd.direction, kmax);
  return target;
}

ResolvedTarget compose(const EclStore& store, const PlatformDescription& platform,
                       const std::vector<CommandQuery>& cmds, const Pose& current) {
  if (cmds.empty()) throw std::invalid_argument("compose needs at least one command");
  std::vector<PartialPose> parts;
  std::optional<TranslationDirective> translation;
  for (const CommandQuery& cmd : cmds) {
    ResolvedTarget t = resolve(store, platform, cmd, current);
    parts.push_back(std::move(t.articulation));
    if (!t.translation) continue;
    if (translation && *translation != *t.translation)
      throw Error(ErrorCode::MultipleTranslations, "a compound command may translate the base only once");
    translation = t.translation;
  }
  return {join_poses(parts), translation};
}

// ---------------------------------------------------------------------------
// Trajectories

Trajectory interpolate(const PlatformDescription& platform, const Pose& start, const ResolvedTarget& target,
                       Timing timing) {
  if (timing.steps < 2) throw std::invalid_argument("a trajectory needs at least two steps");
  if (!(timing.duration > 0.0)) throw std::invalid_argument("trajectory duration must be positive");
  check_pose(platform, start);
  const Pose goal = overlay(platform, start, target.articulation);
  const Vec3 offset = target.translation ? translation_offset(*target.translation) : Vec3{0.0, 0.0, 0.0};

  Trajectory traj;
  traj.duration = timing.duration;
  const int last = timing.steps - 1;
  traj.steps.reserve(timing.steps);
  for (int k = 0; k <= last; ++k) {
    TrajectoryStep step;
    if (k == 0) {
      step.pose = start;
    } else if (k == last) {
      step.t = timing.duration;
      step.pose = goal;
      step.base_offset = offset;
    } else {
      double tau = static_cast<double>(k) / last;
      step.t = timing.duration * tau;
      step.pose.values.resize(start.size());
      for (std::size_t i = 0; i < start.size(); ++i) {
        double a = start.values[i], b = goal.values[i];
        step.pose.values[i] = std::clamp(a + tau * (b - a), std::min(a, b), std::max(a, b));
      }
      for (int c = 0; c < 3; ++c) step.base_offset[c] = tau * offset[c];
    }
    traj.steps.push_back(std::move(step));
  }
  return traj;
}

nlohmann::json trajectory_json(const std::vector<TrajectoryStep>& steps) {
  nlohmann::json out = nlohmann::json::array();
  for (const TrajectoryStep& s : steps)
    out.push_back({{"t", s.t}, {"q", s.pose.values}, {"base", s.base_offset}});
  return out;
}

std::vector<TrajectoryStep> execute_sequence(const EclStore& store, const PlatformDescription& platform,
                                             const std::vector<CommandLine>& lines, const Pose& start,
                                             Timing timing) {
  std::vector<TrajectoryStep> out;
  Pose current = start;
  Vec3 base{0.0, 0.0, 0.0};
  double t0 = 0.0;
  out.push_back({0.0, start, base});
  for (const CommandLine& line : lines) {
    Trajectory segment;
    try {
      segment = interpolate(platform, current, compose(store, platform, line.commands, current), timing);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line.line) + ": " + e.what());
    }
    for (std::size_t k = 1; k < segment.steps.size(); ++k) {
      const TrajectoryStep& s = segment.steps[k];
      out.push_back({t0 + s.t, s.pose, {base[0] + s.base_offset[0], base[1] + s.base_offset[1], base[2] + s.base_offset[2]}});
    }
    current = segment.steps.back().pose;
    base = out.back().base_offset;
    t0 += segment.duration;
  }
  return out;
}

}  // namespace kinesphere
