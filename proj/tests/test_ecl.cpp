#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "kinesphere/canonical_json.hpp"
#include "kinesphere/ecl.hpp"
#include "kinesphere/error.hpp"
#include "kinesphere/install.hpp"
#include "store_gen.hpp"
#include "test_support.hpp"

using namespace kinesphere;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

struct SplitCoreStore : ::testing::Test {
  PlatformDescription p = support::load("split_core");
  VsamSpec spec = build_vsam(p, {"distal_11", "distal_21", "distal_22"}, laban26(), 3);
  EclStore store = make_store(p, spec);
  DirectionPull lh = parse_direction("left-high");

  PartialPose limb_pose(const std::string& limb, double v) {
    PartialPose out = PartialPose::empty(p.dof());
    for (std::size_t i : support_indices(p, limb)) out.values[i] = v;
    return out;
  }
};

}  // namespace

TEST_F(SplitCoreStore, SequentialPoseIds) {
  int k = store.insert_entry(p, "distal_21", "limb_21", lh);
  EXPECT_EQ(k, 1);
  EXPECT_EQ(store.append_pose(p, k, limb_pose("limb_21", 0.1)), 1);
  EXPECT_EQ(store.append_pose(p, k, limb_pose("limb_21", 0.2)), 2);
  EXPECT_EQ(store.append_pose(p, k, limb_pose("limb_21", 0.3)), 3);
  EXPECT_EQ(store.kmax(k), 3);
  EXPECT_EQ(store.spec().kmax.at(EntryKey{"distal_21", "limb_21", lh}), 3);
  EXPECT_EQ(query(store, "limb_21", "distal_21", lh, 2), limb_pose("limb_21", 0.2));
}

TEST_F(SplitCoreStore, KeyDisciplineErrors) {
  int k = store.insert_entry(p, "distal_21", "limb_21", lh);
  EXPECT_EQ(code_of([&] { store.insert_entry(p, "distal_21", "limb_21", lh); }), ErrorCode::DuplicateEntry);
  EXPECT_EQ(code_of([&] { store.insert_entry(p, "distal_21", "limb_99", lh); }), ErrorCode::UnknownLabel);
  EXPECT_EQ(code_of([&] { store.insert_entry(p, "distal_21", "limb_21", place_middle()); }), ErrorCode::ZeroDirection);
  EXPECT_EQ(code_of([&] { store.append_pose(p, 42, limb_pose("limb_21", 0.0)); }), ErrorCode::UnknownKId);
  EXPECT_EQ(code_of([&] { store.append_pose(p, k, limb_pose("limb_22", 0.0)); }), ErrorCode::SupportMismatch);
  EXPECT_EQ(code_of([&] { store.append_pose(p, k, limb_pose("limb_21", 9.0)); }), ErrorCode::LimitViolation);
  for (int s = 0; s < 3; ++s) store.append_pose(p, k, limb_pose("limb_21", 0.0));
  EXPECT_EQ(code_of([&] { store.append_pose(p, k, limb_pose("limb_21", 0.0)); }), ErrorCode::SizeOverflow);
}

TEST_F(SplitCoreStore, QueryErrors) {
  int k = store.insert_entry(p, "distal_11", "limb_11", lh);
  store.append_pose(p, k, limb_pose("limb_11", 0.5));
  EXPECT_EQ(code_of([&] { query(store, "limb_11", "distal_11", parse_direction("right-high"), 1); }),
            ErrorCode::NoSuchEntry);
  EXPECT_EQ(code_of([&] { query(store, "limb_11", "distal_11", lh, 0); }), ErrorCode::InvalidSizeCount);
  try {
    query(store, "limb_11", "distal_11", lh, 3);
    FAIL();
  } catch (const SizeOverflowError& e) {
    EXPECT_EQ(e.kmax(), 1);
  }
}

TEST_F(SplitCoreStore, RemovedIdsAreNotReused) {
  int a = store.insert_entry(p, "distal_11", "limb_11", lh);
  store.remove_entry(a);
  int b = store.insert_entry(p, "distal_11", "limb_11", lh);
  EXPECT_NE(a, b);
  EXPECT_EQ(store.find(a), nullptr);
}

TEST_F(SplitCoreStore, StoredValuesAreRoundedToFilePrecision) {
  int k = store.insert_entry(p, "distal_11", "limb_11", lh);
  store.append_pose(p, k, limb_pose("limb_11", 0.1234567890123));
  EXPECT_EQ(*store.pose(k, 1)->values[support_indices(p, "limb_11")[0]], 0.123456789);
  EclStore back = import_store(export_store(store));
  EXPECT_EQ(back, store);
}

TEST(EclRecord, QueryReturnsRecordedPoses) {
  PlatformDescription p = support::load("baxter");
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = support::generate_store(p, rng);
    RecordResult r = record_install(p, g.spec, g.recorded);
    EXPECT_TRUE(r.warnings.empty());
    for (const auto& [key, poses] : g.expected)
      for (std::size_t s = 0; s < poses.size(); ++s)
        EXPECT_EQ(query(r.store, key.limb, key.origin, key.direction, static_cast<int>(s) + 1), poses[s]);
  }
}

TEST(EclRecord, ValuesOutsideLimbAreNulled) {
  PlatformDescription p = support::load("nao");
  std::mt19937_64 rng(11);
  auto g = support::generate_store(p, rng, true);
  RecordResult r = record_install(p, g.spec, g.recorded);
  EXPECT_FALSE(r.warnings.empty());
  for (const auto& [key, poses] : g.expected)
    for (std::size_t s = 0; s < poses.size(); ++s)
      EXPECT_EQ(query(r.store, key.limb, key.origin, key.direction, static_cast<int>(s) + 1), poses[s]);
}

TEST(EclRecord, Errors) {
  PlatformDescription p = support::load("planar1");
  VsamSpec spec = build_vsam(p, {"distal_11"}, laban26(), 3);
  EXPECT_EQ(code_of([&] { record_install(p, spec, "not json"); }), ErrorCode::FormatError);
  EXPECT_EQ(code_of([&] { record_install(p, spec, R"([{"origin":"distal_11"}])"); }), ErrorCode::FormatError);
  EXPECT_EQ(code_of([&] {
              record_install(p, spec, R"([{"origin":"distal_11","limb":"limb_11","direction":"left-middle","poses":[[null]]}])");
            }),
            ErrorCode::SupportMismatch);
  EXPECT_EQ(code_of([&] {
              record_install(p, spec, R"([{"origin":"distal_11","limb":"limb_11","direction":"left-middle","poses":[[7.0]]}])");
            }),
            ErrorCode::LimitViolation);
  RecordResult r = record_install(
      p, spec, R"([{"origin":"distal_11","limb":"limb_11","direction":"left-middle","poses":[[0.5],[1.0],[1.5]]}])");
  EXPECT_EQ(r.store.kmax(1), 3);
  EXPECT_EQ(code_of([&] { query(r.store, "limb_11", "distal_11", parse_direction("right-middle"), 1); }),
            ErrorCode::NoSuchEntry);
}

TEST(EclJoin, UnionAndConflicts) {
  PartialPose a{{1.0, std::nullopt, std::nullopt}};
  PartialPose b{{std::nullopt, 2.0, std::nullopt}};
  PartialPose c{{1.0, std::nullopt, 3.0}};
  EXPECT_EQ(join_poses({a, b}), (PartialPose{{1.0, 2.0, std::nullopt}}));
  EXPECT_EQ(join_poses({a, c}), (PartialPose{{1.0, std::nullopt, 3.0}}));
  EXPECT_EQ(join_poses({a}), a);
  PartialPose d{{1.5, std::nullopt, std::nullopt}};
  try {
    join_poses({a, b, d});
    FAIL();
  } catch (const JointConflictError& e) {
    EXPECT_EQ(e.joint_index(), 0u);
    EXPECT_EQ(e.code(), ErrorCode::JointConflict);
  }
}

TEST(EclFormat, ExportImportIsByteStable) {
  std::mt19937_64 rng(3);
  for (const char* name : support::all_fixtures) {
    PlatformDescription p = support::load(name);
    if (p.labels.distals.empty()) continue;
    auto g = support::generate_store(p, rng);
    EclStore store = record_install(p, g.spec, g.recorded).store;
    std::string text = export_store(store);
    EclStore back = import_store(text);
    EXPECT_EQ(back, store) << name;
    EXPECT_EQ(export_store(back), text) << name;
    EXPECT_TRUE(check_store(back, p).empty()) << name;
  }
}

TEST(EclFormat, ImportRejectsBrokenDocuments) {
  PlatformDescription p = support::load("planar1");
  VsamSpec spec = build_vsam(p, {"distal_11"}, laban26(), 3);
  EclStore store = record_install(
      p, spec, R"([{"origin":"distal_11","limb":"limb_11","direction":"left-middle","poses":[[0.5],[1.0]]}])").store;
  nlohmann::json doc = nlohmann::json::parse(export_store(store));

  EXPECT_EQ(code_of([&] { import_store("{"); }), ErrorCode::FormatError);
  auto broken = doc;
  broken["version"] = 99;
  EXPECT_EQ(code_of([&] { import_store(broken.dump()); }), ErrorCode::FormatError);
  broken = doc;
  broken["pose"][0]["k_id"] = 7;
  EXPECT_EQ(code_of([&] { import_store(broken.dump()); }), ErrorCode::IntegrityError);
  broken = doc;
  broken["pose"][1]["p_id"] = 3;
  EXPECT_EQ(code_of([&] { import_store(broken.dump()); }), ErrorCode::IntegrityError);
  broken = doc;
  broken["spec"]["kmax"][0]["kmax"] = 1;
  EXPECT_EQ(code_of([&] { import_store(broken.dump()); }), ErrorCode::IntegrityError);
}

TEST(EclFormat, CheckStoreAgainstOtherPlatform) {
  PlatformDescription p = support::load("planar2");
  VsamSpec spec = build_vsam(p, {"distal_11"}, laban26(), 2);
  EclStore store = record_install(
      p, spec, R"([{"origin":"distal_11","limb":"limb_11","direction":"left-middle","poses":[[0.5, 0.1]]}])").store;
  EXPECT_TRUE(check_store(store, p).empty());
  EXPECT_FALSE(check_store(store, support::load("planar1")).empty());
}

TEST(CanonicalJson, FormatRules) {
  EXPECT_EQ(canonical_dump(nlohmann::json::parse(R"({"b":1,"a":[0.1,-0.0,2.5e-7]})")),
            "{\n  \"a\": [0.1, 0, 2.5e-07],\n  \"b\": 1\n}\n");
  EXPECT_EQ(round_significant9(1.23456789012), 1.23456789);
  EXPECT_EQ(round_significant9(round_significant9(0.3333333333)), round_significant9(0.3333333333));
  EXPECT_FALSE(std::signbit(round_significant9(-0.0)));
}

TEST(SharedStoreTest, ConcurrentReaders) {
  PlatformDescription p = support::load("planar1");
  VsamSpec spec = build_vsam(p, {"distal_11"}, laban26(), 3);
  SharedStore shared(make_store(p, spec));
  int k = shared.write([&](EclStore& s) { return s.insert_entry(p, "distal_11", "limb_11", parse_direction("left-middle")); });
  std::vector<std::thread> threads;
  std::atomic<int> seen{0};
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&] {
      for (int i = 0; i < 100; ++i) seen += shared.read([&](const EclStore& s) { return s.find(k) ? 1 : 0; });
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(seen.load(), 400);
}
