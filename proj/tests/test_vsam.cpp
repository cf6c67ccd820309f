#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "kinesphere/error.hpp"
#include "kinesphere/vsam.hpp"
#include "test_support.hpp"

using namespace kinesphere;

TEST(Directions, Vocabulary) {
  auto all = laban26();
  EXPECT_EQ(all.size(), 26u);
  std::set<DirectionPull> unique(all.begin(), all.end());
  unique.insert(place_middle());
  EXPECT_EQ(unique.size(), 27u);
  auto middle = laban8_middle();
  EXPECT_EQ(middle.size(), 8u);
  for (const auto& d : middle) EXPECT_EQ(d.vertical, 0);
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
}

TEST(Directions, NamesRoundTrip) {
  for (const auto& d : laban26()) EXPECT_EQ(parse_direction(d.name()), d);
  EXPECT_EQ(parse_direction("place-middle"), place_middle());
  EXPECT_EQ((DirectionPull{1, 0, 1}).name(), "left-high");
  EXPECT_EQ((DirectionPull{0, 1, 0}).name(), "forward-middle");
  EXPECT_EQ((DirectionPull{-1, -1, -1}).name(), "right-back-low");
  EXPECT_EQ((DirectionPull{0, 0, 1}).name(), "place-high");
  try {
    parse_direction("up");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownDirectionName);
  }
  EXPECT_FALSE(try_parse_direction("Left-High").has_value());
}

TEST(Directions, UnitVectors) {
  auto v = direction_vector(parse_direction("left-forward-high"));
  double s = 1.0 / std::sqrt(3.0);
  EXPECT_NEAR(v[0], s, 1e-15);
  EXPECT_NEAR(v[1], s, 1e-15);
  EXPECT_NEAR(v[2], s, 1e-15);
  auto left = direction_vector(parse_direction("left-middle"));
  EXPECT_EQ(left, (std::array<double, 3>{1.0, 0.0, 0.0}));
  for (const auto& d : laban26()) {
    auto a = direction_vector(d), b = direction_vector(-d);
    EXPECT_NEAR(std::hypot(a[0], a[1], a[2]), 1.0, 1e-12);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(a[i], -b[i]);
  }
  try {
    direction_vector(place_middle());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroDirection);
  }
}

TEST(Vsam, BuildChecksOriginsAndSizes) {
  PlatformDescription baxter = support::load("baxter");
  VsamSpec spec = build_vsam(baxter, {"distal_13", "distal_11"}, laban26(), 3);
  EXPECT_EQ(spec.origins, (std::vector<std::string>{"distal_11", "distal_13"}));
  EXPECT_EQ(spec.sizes(), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(spec.directions.size(), 26u);
  try {
    build_vsam(baxter, {"distal_99"}, laban26(), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownOrigin);
  }
  try {
    build_vsam(baxter, {"distal_11"}, laban26(), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidSizeCount);
  }
  EXPECT_NO_THROW(build_vsam(support::load("youbot"), {"c_1"}, laban8_middle(), 3));
}
