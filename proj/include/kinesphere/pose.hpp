#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace kinesphere {

/// Full joint configuration, one value per actuated joint in JointSpace order.
struct Pose {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const Pose&) const = default;
};

/// Joint configuration with nulls for joints a body part does not drive.
struct PartialPose {
  std::vector<std::optional<double>> values;

  static PartialPose empty(std::size_t m) { return PartialPose{std::vector<std::optional<double>>(m)}; }

  std::size_t size() const { return values.size(); }

  /// Indices of the non-null entries, ascending.
  std::vector<std::size_t> support() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i]) out.push_back(i);
    return out;
  }

  bool operator==(const PartialPose&) const = default;
};

/// Takes the partial pose's value where set, `current`'s elsewhere.
inline Pose overlay(const Pose& current, const PartialPose& partial) {
  if (current.size() != partial.size()) throw std::invalid_argument("overlay: pose lengths differ");
  Pose out = current;
  for (std::size_t i = 0; i < partial.size(); ++i)
    if (partial.values[i]) out.values[i] = *partial.values[i];
  return out;
}

}  // namespace kinesphere
