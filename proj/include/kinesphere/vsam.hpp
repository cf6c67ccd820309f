#pragma once

// Spatial vocabulary: Laban's direction pulls, reach sizes, and the
// virtual space-access model (origins x directions x sizes).

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace kinesphere {

struct PlatformDescription;

/// One of the 27 Laban direction points, as a sign triple.
/// Components are +1 Left / Forward / High, -1 Right / Back / Low.
struct DirectionPull {
  int lateral = 0;
  int sagittal = 0;
  int vertical = 0;

  bool is_place_middle() const { return lateral == 0 && sagittal == 0 && vertical == 0; }
  DirectionPull operator-() const { return {-lateral, -sagittal, -vertical}; }
  auto operator<=>(const DirectionPull&) const = default;

  /// Lowercase hyphenated name, e.g. "left-forward-high" or "place-middle".
  std::string name() const;
};

/// Parses a canonical direction name; throws UnknownDirectionName.
DirectionPull parse_direction(std::string_view name);
std::optional<DirectionPull> try_parse_direction(std::string_view name);

DirectionPull place_middle();

/// All 26 pulls, in canonical order (lateral, then sagittal, then vertical,
/// each from -1 to +1).
std::vector<DirectionPull> laban26();

/// The eight horizontal pulls used for base translation.
std::vector<DirectionPull> laban8_middle();

/// Unit vector in the body frame (x = Left, y = Forward, z = High).
/// Throws ZeroDirection for place-middle.
std::array<double, 3> direction_vector(DirectionPull d);

/// Key of a VSAM entry: which origin, which body part, which direction.
struct EntryKey {
  std::string origin;
  std::string limb;
  DirectionPull direction;
  auto operator<=>(const EntryKey&) const = default;
};

struct VsamSpec {
  std::vector<std::string> origins;       ///< sorted, unique
  std::vector<DirectionPull> directions;  ///< canonical order, no place-middle
  int s_max = 0;
  /// Highest stored size per entry. Keyed by the full entry because nested
  /// limbs sharing an origin can reach different depths.
  std::map<EntryKey, int> kmax;

  std::vector<int> sizes() const;
  bool operator==(const VsamSpec&) const = default;
};

/// Origins must be distal or core labels of the platform; throws
/// UnknownOrigin or InvalidSizeCount.
VsamSpec build_vsam(const PlatformDescription& platform, const std::vector<std::string>& origins,
                    const std::vector<DirectionPull>& directions, int s_max);

}  // namespace kinesphere
