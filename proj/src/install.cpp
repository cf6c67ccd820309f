#include "kinesphere/install.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "kinesphere/error.hpp"

namespace kinesphere {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

// ---------------------------------------------------------------------------
// Search problem

PairProblem::PairProblem(const PlatformDescription& platform, const std::string& limb, DirectionPull direction,
                         double penalty)
    : platform_(&platform),
      joints_(support_indices(platform, limb)),
      chain_(platform, distal_most_link(platform, limb)),
      neutral_(platform.neutral_pose().values),
      penalty_(penalty) {
  if (!platform.labels.is_limb(limb)) throw Error(ErrorCode::UnknownLabel, "'" + limb + "' is not a limb label");
  for (std::size_t idx : joints_) {
    const JointDim& dim = platform.joint_space.dims[idx];
    grid_max_.push_back(static_cast<int>(std::floor((dim.max - dim.min) / dim.increment + 1e-9)));
  }
  neutral_endpoint_ = chain_.position(neutral_);
  auto d = direction_vector(direction);
  direction_ = Eigen::Vector3d(d[0], d[1], d[2]);
}

double PairProblem::value(std::size_t k, int coord) const {
  const JointDim& dim = platform_->joint_space.dims[joints_[k]];
  return std::min(dim.min + coord * dim.increment, dim.max);
}

std::vector<int> PairProblem::neutral_coords() const {
  std::vector<int> out;
  for (std::size_t k = 0; k < joints_.size(); ++k) {
    const JointDim& dim = platform_->joint_space.dims[joints_[k]];
    int c = static_cast<int>(std::lround((neutral_[joints_[k]] - dim.min) / dim.increment));
    out.push_back(std::clamp(c, 0, grid_max_[k]));
  }
  return out;
}

PairProblem::Eval PairProblem::evaluate(std::span<const int> coords) const {
  thread_local std::vector<double> scratch;
  scratch = neutral_;
  for (std::size_t k = 0; k < joints_.size(); ++k) scratch[joints_[k]] = value(k, coords[k]);
  Eval e;
  e.displacement = body_from_root(chain_.position(scratch) - neutral_endpoint_);
  e.projection = e.displacement.dot(direction_);
  e.objective = e.projection - penalty_ * (e.displacement - e.projection * direction_).norm();
  return e;
}

PartialPose PairProblem::to_partial(std::span<const int> coords) const {
  PartialPose out = PartialPose::empty(neutral_.size());
  for (std::size_t k = 0; k < joints_.size(); ++k) out.values[joints_[k]] = value(k, coords[k]);
  return out;
}

double PairProblem::distance_from_neutral(std::span<const int> coords) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < joints_.size(); ++k) {
    double diff = value(k, coords[k]) - neutral_[joints_[k]];
    sum += diff * diff;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Coordinate ascent

namespace {

int initial_step_for(const PairProblem& problem) {
  int widest = 0;
  for (std::size_t k = 0; k < problem.dims(); ++k) widest = std::max(widest, problem.grid_max(k));
  int step = 1;
  while (step * 2 <= widest / 4) step *= 2;
  return step;
}

// Pattern search from `cur`: try +-step on each coordinate, take the first
// improvement, halve the step after a sweep without one.
template <class Score>
double pattern_search(const PairProblem& problem, std::vector<int>& cur, PairProblem::Eval& cur_eval, Score score,
                      int step, int iterations) {
  double cur_score = score(cur_eval);
  for (int iter = 0; iter < iterations; ++iter) {
    bool improved = false;
    for (std::size_t k = 0; k < problem.dims(); ++k) {
      for (int sign : {+1, -1}) {
        std::vector<int> cand = cur;
        cand[k] = std::clamp(cur[k] + sign * step, 0, problem.grid_max(k));
        if (cand[k] == cur[k]) continue;
        PairProblem::Eval e = problem.evaluate(cand);
        double sc = score(e);
        if (sc > cur_score + 1e-12) {
          cur = std::move(cand);
          cur_eval = e;
          cur_score = sc;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      if (step == 1) break;
      step /= 2;
    }
  }
  return cur_score;
}

}  // namespace

SearchResult coordinate_ascent(const PairProblem& problem, int restarts, int iterations, std::uint64_t seed) {
  const std::size_t n = problem.dims();
  const int initial_step = initial_step_for(problem);
  std::mt19937_64 rng(seed);
  SearchResult best;
  bool have_best = false;
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    std::vector<int> cur;
    if (r == 0) {
      cur = problem.neutral_coords();
    } else {
      cur.resize(n);
      for (std::size_t k = 0; k < n; ++k)
        cur[k] = static_cast<int>(rng() % static_cast<std::uint64_t>(problem.grid_max(k) + 1));
    }
    PairProblem::Eval cur_eval = problem.evaluate(cur);
    pattern_search(problem, cur, cur_eval, [](const PairProblem::Eval& e) { return e.objective; }, initial_step,
                   iterations);
    if (!have_best || cur_eval.objective > best.eval.objective) {
      best = {cur, cur_eval};
      have_best = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Installation

std::string_view to_string(PairOutcome outcome) {
  switch (outcome) {
    case PairOutcome::stored: return "stored";
    case PairOutcome::translation: return "translation";
    case PairOutcome::below_floor: return "below_floor";
    case PairOutcome::low_fidelity: return "low_fidelity";
    case PairOutcome::non_monotonic: return "non_monotonic";
  }
  return "unknown";
}

std::vector<EntryKey> install_entries(const PlatformDescription& platform, const VsamSpec& spec) {
  std::vector<EntryKey> out;
  const auto& labels = platform.labels;
  for (const std::string& origin : spec.origins) {
    if (labels.is_core(origin)) {
      if (platform.locomotion.mode == LocomotionMode::none) continue;
      for (const DirectionPull& d : spec.directions)
        if (d.vertical == 0) out.push_back({origin, origin, d});
      continue;
    }
    auto idx = label_index(origin);
    if (!idx || idx->chain == 0) continue;
    auto paired = labels.limbs.find(limb_label(idx->chain, idx->depth));
    if (paired == labels.limbs.end()) continue;
    auto inside = platform.tree.descendants(paired->second);
    std::vector<std::pair<LabelIndex, std::string>> limbs;
    for (const auto& [name, root] : labels.limbs)
      if (inside.count(root)) limbs.emplace_back(*label_index(name), name);
    std::sort(limbs.begin(), limbs.end(), [](const auto& a, const auto& b) {
      return std::tie(a.first.chain, a.first.depth) < std::tie(b.first.chain, b.first.depth);
    });
    for (const auto& [_, limb] : limbs)
      for (const DirectionPull& d : spec.directions) out.push_back({origin, limb, d});
  }
  return out;
}

namespace {

struct PairWork {
  PairReport report;
  std::vector<PartialPose> poses;
};

std::vector<double> resolve_fractions(const InstallConfig& config, int s_max) {
  std::vector<double> f = config.size_fractions;
  if (f.empty())
    for (int s = 1; s <= s_max; ++s) f.push_back(static_cast<double>(s) / s_max);
  if (static_cast<int>(f.size()) != s_max)
    throw Error(ErrorCode::InvalidSizeCount, "size_fractions must list one fraction per size");
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!(f[i] > 0.0) || (i && !(f[i] > f[i - 1])))
      throw Error(ErrorCode::InvalidSizeCount, "size_fractions must be positive and strictly increasing");
  if (f.back() != 1.0) throw Error(ErrorCode::InvalidSizeCount, "the last size fraction must be 1");
  return f;
}

PairWork search_entry(const PlatformDescription& platform, const EntryKey& key, const InstallConfig& config,
                      const std::vector<double>& fractions, std::uint64_t seed) {
  PairWork work;
  work.report.key = key;
  if (platform.labels.is_core(key.limb)) {
    work.report.outcome = PairOutcome::translation;
    return work;
  }
  PairProblem problem(platform, key.limb, key.direction, config.orthogonal_penalty);
  SearchResult found = coordinate_ascent(problem, config.restarts, config.iterations, seed);
  work.report.best_objective = found.eval.objective;
  work.report.max_projection = found.eval.projection;

  double floor = config.reach_floor * limb_reach(platform, key.limb);
  if (!(found.eval.projection > 1e-12) || found.eval.projection < floor) {
    work.report.outcome = PairOutcome::below_floor;
    return work;
  }

  // Grid points on the joint-space segment from neutral to the optimum,
  // one grid step apart along the longest coordinate.
  std::vector<int> start = problem.neutral_coords();
  int span = 0;
  for (std::size_t k = 0; k < start.size(); ++k) span = std::max(span, std::abs(found.best[k] - start[k]));
  std::vector<std::vector<int>> samples;
  std::vector<PairProblem::Eval> evals;
  for (int i = 0; i <= span; ++i) {
    std::vector<int> c(start.size());
    for (std::size_t k = 0; k < c.size(); ++k)
      c[k] = span == 0 ? found.best[k]
                       : start[k] + static_cast<int>(std::lround(static_cast<double>(i) * (found.best[k] - start[k]) / span));
    evals.push_back(problem.evaluate(c));
    samples.push_back(std::move(c));
  }

  double previous_magnitude = 0.0;
  bool monotonic = true, faithful = true;
  for (double f : fractions) {
    double target = f * found.eval.projection;
    std::size_t pick = 0;
    double pick_err = 0.0, pick_dist = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double err = std::abs(evals[i].projection - target);
      double dist = problem.distance_from_neutral(samples[i]);
      if (i == 0 || err < pick_err || (err == pick_err && dist < pick_dist)) {
        pick = i;
        pick_err = err;
        pick_dist = dist;
      }
    }
    // Intermediate sizes: hold the projection at its target and pull the
    // pose back onto the direction axis.
    std::vector<int> coords = samples[pick];
    PairProblem::Eval e = evals[pick];
    if (f < 1.0) {
      auto score = [&](const PairProblem::Eval& x) {
        return -2.0 * std::abs(x.projection - target) - (x.displacement - x.projection * problem.direction()).norm();
      };
      pattern_search(problem, coords, e, score, std::max(1, initial_step_for(problem) / 8), config.iterations);
    }
    double magnitude = e.displacement.norm();
    double cosine = magnitude > 0.0 ? e.projection / magnitude : 0.0;
    work.report.size_projections.push_back(e.projection);
    work.report.size_magnitudes.push_back(magnitude);
    work.report.size_cosines.push_back(cosine);
    if (!(magnitude > previous_magnitude)) monotonic = false;
    if (cosine < config.min_cosine) faithful = false;
    previous_magnitude = magnitude;
    work.poses.push_back(problem.to_partial(coords));
  }
  if (!faithful) {
    work.report.outcome = PairOutcome::low_fidelity;
    work.poses.clear();
  } else if (!monotonic) {
    work.report.outcome = PairOutcome::non_monotonic;
    work.poses.clear();
  }
  return work;
}

InstallResult install(const PlatformDescription& platform, const VsamSpec& spec, const InstallConfig& config,
                      bool parallel) {
  for (const std::string& o : spec.origins)
    if (!platform.labels.is_distal(o) && !platform.labels.is_core(o))
      throw Error(ErrorCode::UnknownOrigin, "origin '" + o + "' is not a joint or core label");
  const std::vector<double> fractions = resolve_fractions(config, spec.s_max);
  const std::vector<EntryKey> entries = install_entries(platform, spec);
  std::vector<PairWork> work(entries.size());

  const auto n = static_cast<long>(entries.size());
  auto run = [&](long i) {
    std::uint64_t seed = splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(i)));
    work[i] = search_entry(platform, entries[i], config, fractions, seed);
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) run(i);
  } else {
    for (long i = 0; i < n; ++i) run(i);
  }

  bool any_limb = false, any_reach = false;
  InstallResult result{make_store(platform, spec), {}};
  for (PairWork& w : work) {
    const EntryKey& key = w.report.key;
    if (w.report.outcome != PairOutcome::translation) {
      any_limb = true;
      if (w.report.max_projection > 1e-12) any_reach = true;
    }
    if (w.report.outcome == PairOutcome::stored || w.report.outcome == PairOutcome::translation) {
      int k_id = result.store.insert_entry(platform, key.origin, key.limb, key.direction);
      for (const PartialPose& p : w.poses) result.store.append_pose(platform, k_id, p);
    }
    result.pairs.push_back(std::move(w.report));
  }
  if (any_limb && !any_reach)
    throw Error(ErrorCode::InstallFailure, "no limb of " + platform.name + " reaches along any direction");
  return result;
}

}  // namespace

InstallResult auto_install(const PlatformDescription& platform, const VsamSpec& spec, const InstallConfig& config) {
  return install(platform, spec, config, true);
}

InstallResult auto_install_serial(const PlatformDescription& platform, const VsamSpec& spec,
                                  const InstallConfig& config) {
  return install(platform, spec, config, false);
}

// ---------------------------------------------------------------------------
// Recorded poses

RecordResult record_install(const PlatformDescription& platform, const VsamSpec& spec, std::string_view recorded) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(recorded);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, std::string("recorded poses are not JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::FormatError, "recorded poses must be a JSON array");

  RecordResult result{make_store(platform, spec), {}};
  for (const json& entry : doc) {
    if (!entry.is_object() || !entry.contains("origin") || !entry.contains("limb") || !entry.contains("direction") ||
        !entry.contains("poses") || !entry["origin"].is_string() || !entry["limb"].is_string() ||
        !entry["direction"].is_string() || !entry["poses"].is_array())
      throw Error(ErrorCode::FormatError, "recorded entry needs origin, limb, direction and poses");
    std::string origin = entry["origin"], limb = entry["limb"], dname = entry["direction"];
    auto direction = try_parse_direction(dname);
    if (!direction) throw Error(ErrorCode::FormatError, "unknown direction '" + dname + "'");

    int k_id = result.store.insert_entry(platform, origin, limb, *direction);
    auto support = support_indices(platform, limb);
    std::vector<bool> in_support(platform.dof(), false);
    for (std::size_t i : support) in_support[i] = true;

    for (const json& q : entry["poses"]) {
      if (!q.is_array() || q.size() != platform.dof())
        throw Error(ErrorCode::FormatError, "recorded pose must list " + std::to_string(platform.dof()) + " values");
      PartialPose pose = PartialPose::empty(platform.dof());
      bool masked = false;
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i].is_null()) {
          if (in_support[i])
            throw Error(ErrorCode::SupportMismatch, "null value for joint " +
                                                        platform.tree.joints[platform.joint_space.dims[i].joint].name +
                                                        " inside " + limb);
          continue;
        }
        if (!q[i].is_number()) throw Error(ErrorCode::FormatError, "pose values must be numbers or null");
        if (in_support[i]) {
          pose.values[i] = q[i].get<double>();
        } else {
          masked = true;
        }
      }
      if (masked)
        result.warnings.push_back("(" + origin + ", " + limb + ", " + dname +
                                  "): values outside the body part were set to null");
      result.store.append_pose(platform, k_id, pose);
    }
  }
  return result;
}

}  // namespace kinesphere
