#include <gtest/gtest.h>

#include <algorithm>

#include "kinesphere/error.hpp"
#include "kinesphere/eurdf.hpp"
#include "test_support.hpp"

using namespace kinesphere;

namespace {

std::vector<std::string> keys(const auto& map) {
  std::vector<std::string> out;
  for (const auto& [k, v] : map) out.push_back(k);
  return out;
}

bool has_issue(const ValidationReport& report, const std::string& code) {
  return std::any_of(report.begin(), report.end(), [&](const ValidationIssue& i) { return i.code == code; });
}

ValidationReport read_and_validate(const std::string& text) {
  EurdfReadResult r = read_eurdf(text);
  ValidationReport out = r.issues;
  for (auto& i : validate(r.platform)) out.push_back(i);
  return out;
}

}  // namespace

TEST(EurdfLabels, ExamplePlatformSets) {
  PlatformDescription p = support::load("split_core");
  EXPECT_EQ(keys(p.labels.core), (std::vector<std::string>{"c_1", "c_2"}));
  EXPECT_EQ(keys(p.labels.distals),
            (std::vector<std::string>{"distal_1", "distal_11", "distal_21", "distal_22", "distal_23"}));
  EXPECT_EQ(keys(p.labels.limbs), (std::vector<std::string>{"limb_11", "limb_21", "limb_22", "limb_23"}));
  EXPECT_EQ(p.dof(), 5u);
}

TEST(EurdfLabels, DeriveMatchesDocumentTags) {
  for (const char* name : support::all_fixtures) {
    PlatformDescription p = support::load(name);
    std::vector<std::set<LinkId>> parts;
    for (const auto& [label, links] : p.labels.core) parts.push_back(links);
    EXPECT_EQ(derive_labels(p.tree, parts), p.labels) << name;
  }
}

TEST(EurdfLabels, PlatformCardinalities) {
  PlatformDescription baxter = support::load("baxter");
  EXPECT_EQ(baxter.labels.limbs.size(), 6u);
  EXPECT_EQ(baxter.labels.distals.size(), 6u);
  EXPECT_EQ(baxter.dof(), 14u);

  PlatformDescription nao = support::load("nao");
  EXPECT_EQ(nao.labels.limbs.size(), 9u);
  EXPECT_EQ(nao.labels.distals.size(), 9u);
  EXPECT_EQ(nao.dof(), 26u);
  EXPECT_TRUE(nao.labels.is_limb("limb_51"));

  PlatformDescription youbot = support::load("youbot");
  EXPECT_EQ(youbot.labels.limbs.size(), 3u);
  EXPECT_EQ(youbot.labels.distals.size(), 3u);
  EXPECT_EQ(youbot.dof(), 5u);
}

TEST(EurdfLabels, AllCoreWheelBase) {
  PlatformDescription k = support::load("khepera");
  EXPECT_EQ(keys(k.labels.core), std::vector<std::string>{"c_1"});
  EXPECT_TRUE(k.labels.distals.empty());
  EXPECT_TRUE(k.labels.limbs.empty());
  EXPECT_EQ(k.dof(), 2u);
}

TEST(EurdfLabels, CollocatedJointsShareOneLocation) {
  PlatformDescription baxter = support::load("baxter");
  EXPECT_EQ(baxter.tree.joints[baxter.labels.distals.at("distal_11")].name, "left_s0");
  EXPECT_EQ(baxter.tree.joints[baxter.labels.distals.at("distal_12")].name, "left_e0");
  EXPECT_EQ(baxter.tree.joints[baxter.labels.distals.at("distal_13")].name, "left_w0");
  EXPECT_EQ(subtree(baxter, "limb_11").joints.size(), 7u);
  EXPECT_EQ(subtree(baxter, "limb_13").joints.size(), 3u);
}

TEST(EurdfLabels, NamesWithWideIndices) {
  EXPECT_EQ(limb_label(1, 2), "limb_12");
  EXPECT_EQ(limb_label(12, 3), "limb_12_3");
  EXPECT_EQ(distal_label({0, 1}), "distal_1");
  EXPECT_EQ(distal_label({0, 12}), "distal_0_12");
  EXPECT_EQ(label_index("limb_12_3"), (LabelIndex{12, 3}));
  EXPECT_EQ(label_index("distal_23"), (LabelIndex{2, 3}));
  EXPECT_EQ(label_index("distal_1"), (LabelIndex{0, 1}));
  EXPECT_FALSE(label_index("limb_1").has_value());
  EXPECT_FALSE(label_kind("hand").has_value());
  EXPECT_EQ(label_kind("c_3"), LabelKind::core);
}

TEST(EurdfSubtree, NestingAndMembership) {
  PlatformDescription p = support::load("split_core");
  Subtree l21 = subtree(p, "limb_21"), l22 = subtree(p, "limb_22");
  EXPECT_TRUE(std::includes(l21.links.begin(), l21.links.end(), l22.links.begin(), l22.links.end()));
  EXPECT_LT(l22.links.size(), l21.links.size());
  EXPECT_EQ(l21.links.size(), 3u);
  EXPECT_EQ(l21.joints.size(), 3u);
  EXPECT_TRUE(subtree(p, "c_1").joints.count(p.labels.distals.at("distal_1")));
  EXPECT_THROW(subtree(p, "limb_99"), Error);
}

TEST(EurdfRoundTrip, SerializeParseIsLossless) {
  for (const char* name : support::all_fixtures) {
    PlatformDescription p = support::load(name);
    std::string text = serialize_eurdf(p);
    PlatformDescription again = parse_eurdf(text);
    EXPECT_EQ(again, p) << name;
    EXPECT_EQ(serialize_eurdf(again), text) << name;
  }
}

TEST(EurdfValidate, FixturesAreClean) {
  for (const char* name : support::all_fixtures)
    EXPECT_TRUE(read_and_validate(support::slurp(support::fixture_path(std::string(name) + ".eurdf"))).empty())
        << name;
}

TEST(EurdfValidate, BrokenNestingIsReported) {
  std::string text = support::slurp(support::fixture_path("split_core.eurdf"));
  text = support::replace_all(text, "limb_21 limb_22 limb_23", "limb_21 limb_23");
  text = support::replace_all(text, "limb_21 limb_22<", "limb_21<");
  text = support::replace_all(text, "<body_part>distal_22</body_part>", "");
  ValidationReport report = read_and_validate(text);
  EXPECT_TRUE(has_issue(report, "NESTING_VIOLATION"));
  try {
    parse_eurdf(text);
    FAIL() << "expected LabelingError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LabelingError);
  }
}

TEST(EurdfValidate, StructuralProblems) {
  std::string base = support::slurp(support::fixture_path("planar1.eurdf"));
  EXPECT_TRUE(has_issue(read_and_validate(support::replace_all(base, "lower=\"-2\"", "lower=\"3\"")),
                        "EMPTY_JOINT_RANGE"));
  EXPECT_TRUE(has_issue(read_and_validate(support::replace_all(base, "<axis xyz=\"0 0 1\"/>", "<axis xyz=\"0 0 2\"/>")),
                        "BAD_AXIS"));
  EXPECT_TRUE(has_issue(read_and_validate(support::replace_all(base, " com=\"true\"", "")), "COM_MISSING"));
  EXPECT_TRUE(has_issue(read_and_validate(support::replace_all(base, "<body_part>distal_11</body_part>", "")),
                        "ORPHAN_LIMB"));
}

TEST(EurdfParse, MalformedAndSchemaErrors) {
  try {
    read_eurdf("<robot name=\"x\"><link name=\"a\">");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedXml);
  }
  try {
    read_eurdf("<robot name=\"x\"><link name=\"a\"/></robot>");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
  }
  EXPECT_THROW(load_eurdf_file("/nonexistent/file.eurdf"), Error);
}

TEST(EurdfParse, LimbTagsMustCoverSubtree) {
  std::string text = support::slurp(support::fixture_path("split_core.eurdf"));
  text = support::replace_all(text, "limb_21 limb_22 limb_23", "limb_22 limb_23");
  EurdfReadResult r = read_eurdf(text);
  EXPECT_TRUE(has_issue(r.issues, "LIMB_TAG_MISMATCH"));
}

TEST(EurdfJointSpace, NeutralWithinLimits) {
  for (const char* name : support::all_fixtures) {
    PlatformDescription p = support::load(name);
    Pose n = p.neutral_pose();
    ASSERT_EQ(n.size(), p.dof());
    for (std::size_t i = 0; i < n.size(); ++i) {
      EXPECT_GE(n.values[i], p.joint_space.dims[i].min);
      EXPECT_LE(n.values[i], p.joint_space.dims[i].max);
    }
  }
}
