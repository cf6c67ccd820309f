#include <gtest/gtest.h>

#include <cmath>

#include "kinesphere/ecl.hpp"
#include "kinesphere/error.hpp"
#include "kinesphere/install.hpp"
#include "kinesphere/kinematics.hpp"
#include "kinesphere/resolver.hpp"
#include "test_support.hpp"

using namespace kinesphere;

namespace {

struct Installed {
  PlatformDescription platform;
  EclStore store;
};

const Installed& installed(const std::string& name) {
  static std::map<std::string, Installed> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  PlatformDescription p = support::load(name);
  std::vector<std::string> origins;
  for (const auto& [label, joint] : p.labels.distals) origins.push_back(label);
  for (const auto& [label, links] : p.labels.core) origins.push_back(label);
  EclStore store = auto_install(p, build_vsam(p, origins, laban26(), 3), {}).store;
  return cache.emplace(name, Installed{std::move(p), std::move(store)}).first->second;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

}  // namespace

TEST(CommandGrammar, SingleAndCompound) {
  auto lines = parse_commands(
      "# warm up\n"
      "limb_11 @ distal_11 -> left-high * 3\n"
      "\n"
      "limb_11@distal_11->right-middle*1 & limb_21 @ distal_21 -> place-middle * 2  # both\n");
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].line, 2);
  EXPECT_EQ(lines[1].line, 4);
  EXPECT_EQ(lines[0].commands[0], (CommandQuery{"limb_11", "distal_11", parse_direction("left-high"), 3}));
  ASSERT_EQ(lines[1].commands.size(), 2u);
  EXPECT_EQ(lines[1].commands[1].limb, "limb_21");
  EXPECT_TRUE(lines[1].commands[1].direction.is_place_middle());
  EXPECT_EQ(parse_command(lines[0].commands[0].text()), lines[0].commands[0]);
}

TEST(CommandGrammar, SyntaxErrorsCarryPosition) {
  struct Case {
    const char* text;
    int line, column;
  };
  for (const Case& c : {Case{"limb_11 distal_11 -> left-high * 1", 1, 9}, Case{"\nlimb_11 @ distal_11 -> left-high * 0", 2, 36},
                        Case{"limb_11 @ distal_11 -> left-high * 1 limb_12", 1, 38},
                        Case{"limb_11 @ distal_11 -> left-high * 1 &", 1, 39}, Case{"@ distal_11", 1, 1}}) {
    try {
      parse_commands(c.text);
      ADD_FAILURE() << c.text;
    } catch (const SyntaxError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text;
      EXPECT_EQ(e.column(), c.column) << c.text;
    }
  }
}

TEST(CommandGrammar, UnknownDirection) {
  EXPECT_EQ(code_of([] { parse_command("limb_11 @ distal_11 -> up-high * 1"); }), ErrorCode::UnknownDirectionName);
  EXPECT_EQ(code_of([] { parse_command("limb_11 @ distal_11 -> Left-High * 1"); }), ErrorCode::SyntaxError);
}

TEST(Resolve, StoredSizeIsQueried) {
  const Installed& b = installed("baxter");
  Pose n = b.platform.neutral_pose();
  CommandQuery cmd = parse_command("limb_11 @ distal_11 -> left-high * 2");
  ResolvedTarget t = resolve(b.store, b.platform, cmd, n);
  EXPECT_EQ(t.articulation, query(b.store, "limb_11", "distal_11", cmd.direction, 2));
  EXPECT_FALSE(t.translation);
}

TEST(Resolve, OverflowTranslatesThePlatform) {
  const Installed& y = installed("youbot");
  Pose n = y.platform.neutral_pose();
  int checked = 0;
  for (const VsamRow& row : y.store.vsam_rows()) {
    if (y.platform.labels.is_core(row.limb)) continue;
    if (row.direction.lateral == 0 && row.direction.sagittal == 0) continue;
    int kmax = y.store.kmax(row.k_id);
    for (int s = kmax + 1; s <= kmax + 5; ++s) {
      ResolvedTarget t = resolve(y.store, y.platform, {row.limb, row.origin, row.direction, s}, n);
      ASSERT_TRUE(t.translation);
      EXPECT_EQ(t.translation->magnitude, s - kmax);
      EXPECT_EQ(t.translation->direction, (DirectionPull{row.direction.lateral, row.direction.sagittal, 0}));
      EXPECT_EQ(t.articulation, query(y.store, row.limb, row.origin, row.direction, kmax));
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(Resolve, VerticalOverflowHasNoGroundDirection) {
  const Installed& y = installed("youbot");
  const VsamRow* row = y.store.find(EntryKey{"distal_11", "limb_11", parse_direction("place-high")});
  ASSERT_NE(row, nullptr);
  CommandQuery cmd{"limb_11", "distal_11", row->direction, y.store.kmax(row->k_id) + 1};
  EXPECT_EQ(code_of([&] { resolve(y.store, y.platform, cmd, y.platform.neutral_pose()); }),
            ErrorCode::GroundProjectionDegenerate);
}

TEST(Resolve, FixedBaseCannotOverflow) {
  const Installed& b = installed("baxter");
  CommandQuery cmd = parse_command("limb_11 @ distal_11 -> left-high * 4");
  EXPECT_EQ(code_of([&] { resolve(b.store, b.platform, cmd, b.platform.neutral_pose()); }), ErrorCode::NoLocomotion);
}

TEST(Resolve, CoreCommandsTranslate) {
  const Installed& k = installed("khepera");
  ResolvedTarget t = resolve(k.store, k.platform, parse_command("c_1 @ c_1 -> left-forward-middle * 4"),
                             k.platform.neutral_pose());
  ASSERT_TRUE(t.translation);
  EXPECT_EQ(t.translation->magnitude, 4);
  EXPECT_DOUBLE_EQ(t.translation->quantum, 0.05);
  EXPECT_TRUE(t.articulation.support().empty());
  Vec3 offset = translation_offset(*t.translation);
  EXPECT_NEAR(offset[0], 0.2 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(offset[1], 0.2 / std::sqrt(2.0), 1e-12);
  EXPECT_EQ(offset[2], 0.0);
}

TEST(Resolve, PlaceMiddleReturnsToNeutral) {
  const Installed& b = installed("baxter");
  Pose n = b.platform.neutral_pose();
  ResolvedTarget t = resolve(b.store, b.platform, parse_command("limb_11 @ distal_11 -> place-middle * 1"), n);
  EXPECT_EQ(t.articulation.support(), support_indices(b.platform, "limb_11"));
  for (std::size_t i : t.articulation.support()) EXPECT_EQ(*t.articulation.values[i], n.values[i]);
}

TEST(Resolve, LookupErrors) {
  const Installed& b = installed("baxter");
  Pose n = b.platform.neutral_pose();
  EXPECT_EQ(code_of([&] { resolve(b.store, b.platform, parse_command("limb_91 @ distal_11 -> left-high * 1"), n); }),
            ErrorCode::UnknownLabel);
  EXPECT_EQ(code_of([&] { resolve(b.store, b.platform, parse_command("limb_11 @ distal_12 -> left-high * 1"), n); }),
            ErrorCode::NoSuchEntry);
  Pose bad = n;
  bad.values[0] = 100.0;
  EXPECT_EQ(code_of([&] { resolve(b.store, b.platform, parse_command("limb_11 @ distal_11 -> left-high * 1"), bad); }),
            ErrorCode::LimitViolation);
}

TEST(Compose, DisjointLimbsJoin) {
  const Installed& b = installed("baxter");
  Pose n = b.platform.neutral_pose();
  auto line = parse_commands("limb_11 @ distal_11 -> left-high * 2 & limb_21 @ distal_21 -> right-high * 2")[0];
  ResolvedTarget t = compose(b.store, b.platform, line.commands, n);
  auto left = resolve(b.store, b.platform, line.commands[0], n).articulation;
  auto right = resolve(b.store, b.platform, line.commands[1], n).articulation;
  EXPECT_EQ(t.articulation, join_poses({left, right}));
  EXPECT_EQ(t.articulation.support().size(), left.support().size() + right.support().size());
}

TEST(Compose, OverlappingLimbsConflict) {
  const Installed& b = installed("baxter");
  auto line = parse_commands("limb_11 @ distal_11 -> left-high * 2 & limb_11 @ distal_11 -> right-high * 2")[0];
  EXPECT_EQ(code_of([&] { compose(b.store, b.platform, line.commands, b.platform.neutral_pose()); }),
            ErrorCode::JointConflict);
  auto same = parse_commands("limb_11 @ distal_11 -> left-high * 2 & limb_11 @ distal_11 -> left-high * 2")[0];
  EXPECT_NO_THROW(compose(b.store, b.platform, same.commands, b.platform.neutral_pose()));
}

TEST(Compose, OneTranslationPerTarget) {
  const Installed& k = installed("khepera");
  Pose n = k.platform.neutral_pose();
  auto two = parse_commands("c_1 @ c_1 -> forward-middle * 1 & c_1 @ c_1 -> left-middle * 1")[0];
  EXPECT_EQ(code_of([&] { compose(k.store, k.platform, two.commands, n); }), ErrorCode::MultipleTranslations);
  auto same = parse_commands("c_1 @ c_1 -> forward-middle * 1 & c_1 @ c_1 -> forward-middle * 1")[0];
  EXPECT_EQ(compose(k.store, k.platform, same.commands, n).translation->magnitude, 1);
}

TEST(Trajectory, EndpointsAreExact) {
  const Installed& b = installed("baxter");
  Pose n = b.platform.neutral_pose();
  ResolvedTarget t = resolve(b.store, b.platform, parse_command("limb_11 @ distal_11 -> left-high * 3"), n);
  Trajectory traj = interpolate(b.platform, n, t, {7, 1.5});
  ASSERT_EQ(traj.steps.size(), 7u);
  EXPECT_EQ(traj.steps.front().pose, n);
  EXPECT_EQ(traj.steps.back().pose, overlay(n, t.articulation));
  EXPECT_EQ(traj.steps.back().t, 1.5);
  for (std::size_t k = 1; k < traj.steps.size(); ++k) {
    EXPECT_GT(traj.steps[k].t, traj.steps[k - 1].t);
    EXPECT_NO_THROW(check_pose(b.platform, traj.steps[k].pose));
  }
  EXPECT_THROW(interpolate(b.platform, n, t, {1, 1.0}), std::invalid_argument);
}

TEST(Trajectory, BaseMovesLinearly) {
  const Installed& k = installed("khepera");
  Pose n = k.platform.neutral_pose();
  ResolvedTarget t = resolve(k.store, k.platform, parse_command("c_1 @ c_1 -> forward-middle * 2"), n);
  Trajectory traj = interpolate(k.platform, n, t, {5, 1.0});
  EXPECT_EQ(traj.steps.back().base_offset, (Vec3{0.1, 0.0, 0.0}));
  EXPECT_NEAR(traj.steps[2].base_offset[0], 0.05, 1e-15);
}

TEST(ExecuteSequence, ChainsSegments) {
  const Installed& y = installed("youbot");
  Pose n = y.platform.neutral_pose();
  auto lines = parse_commands("limb_11 @ distal_11 -> forward-high * 1\nlimb_11 @ distal_11 -> place-middle * 1\n");
  auto steps = execute_sequence(y.store, y.platform, lines, n, {4, 1.0});
  ASSERT_EQ(steps.size(), 7u);
  EXPECT_EQ(steps.front().pose, n);
  EXPECT_EQ(steps[3].pose, overlay(n, query(y.store, "limb_11", "distal_11", parse_direction("forward-high"), 1)));
  EXPECT_EQ(steps.back().pose, n);
  EXPECT_DOUBLE_EQ(steps.back().t, 2.0);
}

TEST(ExecuteSequence, ErrorsNameTheLine) {
  const Installed& b = installed("baxter");
  auto lines = parse_commands("limb_11 @ distal_11 -> left-high * 1\n\nlimb_11 @ distal_11 -> left-high * 9\n");
  try {
    execute_sequence(b.store, b.platform, lines, b.platform.neutral_pose());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoLocomotion);
    EXPECT_EQ(std::string(e.what()).rfind("line 3:", 0), 0u) << e.what();
  }
}
