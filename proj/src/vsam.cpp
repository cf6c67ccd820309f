#include "kinesphere/vsam.hpp"

#include <algorithm>
#include <cmath>

#include "kinesphere/error.hpp"
#include "kinesphere/eurdf.hpp"

namespace kinesphere {

std::string DirectionPull::name() const {
  std::string out;
  if (lateral != 0) out += lateral > 0 ? "left" : "right";
  if (sagittal != 0) {
    if (!out.empty()) out += '-';
    out += sagittal > 0 ? "forward" : "back";
  }
  if (out.empty()) out = "place";
  out += '-';
  out += vertical > 0 ? "high" : vertical < 0 ? "low" : "middle";
  return out;
}

DirectionPull place_middle() { return {}; }

std::optional<DirectionPull> try_parse_direction(std::string_view name) {
  for (int l = -1; l <= 1; ++l)
    for (int s = -1; s <= 1; ++s)
      for (int v = -1; v <= 1; ++v) {
        DirectionPull d{l, s, v};
        if (d.name() == name) return d;
      }
  return std::nullopt;
}

DirectionPull parse_direction(std::string_view name) {
  if (auto d = try_parse_direction(name)) return *d;
  throw Error(ErrorCode::UnknownDirectionName, "unknown direction '" + std::string(name) + "'");
}

std::vector<DirectionPull> laban26() {
  std::vector<DirectionPull> out;
  for (int l = -1; l <= 1; ++l)
    for (int s = -1; s <= 1; ++s)
      for (int v = -1; v <= 1; ++v)
        if (l || s || v) out.push_back({l, s, v});
  return out;
}

std::vector<DirectionPull> laban8_middle() {
  std::vector<DirectionPull> out;
  for (const DirectionPull& d : laban26())
    if (d.vertical == 0) out.push_back(d);
  return out;
}

std::array<double, 3> direction_vector(DirectionPull d) {
  if (d.is_place_middle()) throw Error(ErrorCode::ZeroDirection, "place-middle has no spatial direction");
  double n = std::sqrt(static_cast<double>(d.lateral * d.lateral + d.sagittal * d.sagittal + d.vertical * d.vertical));
  return {d.lateral / n, d.sagittal / n, d.vertical / n};
}

std::vector<int> VsamSpec::sizes() const {
  std::vector<int> out;
  for (int s = 1; s <= s_max; ++s) out.push_back(s);
  return out;
}

VsamSpec build_vsam(const PlatformDescription& platform, const std::vector<std::string>& origins,
                    const std::vector<DirectionPull>& directions, int s_max) {
  if (origins.empty()) throw Error(ErrorCode::UnknownOrigin, "a VSAM needs at least one origin");
  for (const std::string& o : origins)
    if (!platform.labels.is_distal(o) && !platform.labels.is_core(o))
      throw Error(ErrorCode::UnknownOrigin, "origin '" + o + "' is not a joint or core label of " + platform.name);
  if (s_max < 1) throw Error(ErrorCode::InvalidSizeCount, "size count must be at least 1");
  VsamSpec spec;
  spec.origins = origins;
  std::sort(spec.origins.begin(), spec.origins.end());
  spec.origins.erase(std::unique(spec.origins.begin(), spec.origins.end()), spec.origins.end());
  spec.directions = directions;
  std::sort(spec.directions.begin(), spec.directions.end());
  spec.directions.erase(std::unique(spec.directions.begin(), spec.directions.end()), spec.directions.end());
  std::erase_if(spec.directions, [](const DirectionPull& d) { return d.is_place_middle(); });
  spec.s_max = s_max;
  return spec;
}

}  // namespace kinesphere
