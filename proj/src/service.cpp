#include "kinesphere/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "kinesphere/error.hpp"
#include "kinesphere/kinematics.hpp"

namespace kinesphere {

using nlohmann::json;

double SteadyClock::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

double ManualClock::now() const {
  std::lock_guard lock(mutex_);
  return now_;
}

void ManualClock::advance(double seconds) {
  std::lock_guard lock(mutex_);
  now_ += seconds;
}

void ManualClock::set(double seconds) {
  std::lock_guard lock(mutex_);
  now_ = seconds;
}

namespace {

json partial_json(const PartialPose& p) {
  json out = json::array();
  for (const auto& v : p.values) out.push_back(v ? json(*v) : json(nullptr));
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

json platform_catalog(const std::map<std::string, std::shared_ptr<const LoadedPlatform>>& platforms) {
  json list = json::array();
  for (const auto& [name, loaded] : platforms) {
    const PlatformDescription& p = loaded->platform;
    const EclStore& store = loaded->store;
    json joints = json::array();
    for (const JointDim& dim : p.joint_space.dims)
      joints.push_back({{"name", p.tree.joints[dim.joint].name}, {"min", dim.min}, {"max", dim.max}});
    json core = json::array(), limbs = json::array(), distals = json::array();
    for (const auto& [label, links] : p.labels.core) core.push_back(label);
    for (const auto& [label, root] : p.labels.limbs) limbs.push_back(label);
    for (const auto& [label, joint] : p.labels.distals) distals.push_back(label);

    std::map<std::pair<std::string, std::string>, json> grouped;
    for (const VsamRow& row : store.vsam_rows()) {
      json& entry = grouped[{row.origin, row.limb}];
      if (entry.is_null()) entry = {{"origin", row.origin}, {"limb", row.limb}, {"available", json::array()}};
      entry["available"].push_back({{"direction", row.direction.name()}, {"kmax", store.kmax(row.k_id)}});
    }
    json entries = json::array();
    for (auto& [key, entry] : grouped) entries.push_back(std::move(entry));

    json locomotion = {{"mode", p.locomotion.mode == LocomotionMode::ground ? "ground" : "none"}};
    if (p.locomotion.quantum) locomotion["quantum"] = *p.locomotion.quantum;
    list.push_back({{"name", name},
                    {"dof", p.dof()},
                    {"joints", joints},
                    {"neutral", p.neutral_pose().values},
                    {"core", core},
                    {"limbs", limbs},
                    {"distals", distals},
                    {"origins", store.spec().origins},
                    {"s_max", store.spec().s_max},
                    {"locomotion", locomotion},
                    {"entries", entries}});
  }
  return {{"v", 1}, {"platforms", list}};
}

SessionManager::SessionManager(std::map<std::string, std::shared_ptr<const LoadedPlatform>> platforms,
                               std::shared_ptr<const Clock> clock, SessionOptions options)
    : platforms_(std::move(platforms)), clock_(std::move(clock)), options_(options), salt_(std::random_device{}()) {
  if (!(options_.tick_hz > 0.0)) throw std::invalid_argument("tick rate must be positive");
}

std::string SessionManager::create_session(const std::string& platform) {
  auto it = platforms_.find(platform);
  if (it == platforms_.end()) throw Error(ErrorCode::UnknownPlatform, "no platform named '" + platform + "'");
  auto session = std::make_unique<Session>();
  session->loaded = it->second;
  session->created = clock_->now();
  session->rest_pose = it->second->platform.neutral_pose();

  std::lock_guard lock(sessions_mutex_);
  char id[17];
  std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(splitmix64(salt_ ^ ++counter_)));
  sessions_.emplace(id, std::move(session));
  return id;
}

SessionManager::Session& SessionManager::find(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  return *it->second;
}

SessionState SessionManager::sample(const Session& session, double t) {
  SessionState out;
  out.t = t;
  out.pose = session.rest_pose;
  out.base = session.rest_base;
  for (const Segment& seg : session.segments) {
    const auto& steps = seg.trajectory.steps;
    double local = t - seg.start;
    if (local < 0.0) {
      ++out.queued;
      continue;
    }
    if (local >= seg.trajectory.duration) {
      out.pose = steps.back().pose;
      for (int c = 0; c < 3; ++c) out.base[c] = seg.base_before[c] + steps.back().base_offset[c];
      continue;
    }
    ++out.queued;
    out.moving = true;
    const std::size_t last = steps.size() - 1;
    double x = local / seg.trajectory.duration * static_cast<double>(last);
    std::size_t k = std::min(static_cast<std::size_t>(x), last - 1);
    double frac = x - static_cast<double>(k);
    const Pose& a = steps[k].pose;
    const Pose& b = steps[k + 1].pose;
    out.pose.values.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      double lo = std::min(a.values[i], b.values[i]), hi = std::max(a.values[i], b.values[i]);
      out.pose.values[i] = std::clamp(a.values[i] + frac * (b.values[i] - a.values[i]), lo, hi);
    }
    for (int c = 0; c < 3; ++c) {
      double oa = steps[k].base_offset[c], ob = steps[k + 1].base_offset[c];
      out.base[c] = seg.base_before[c] + oa + frac * (ob - oa);
    }
  }
  return out;
}

void SessionManager::settle(Session& session, double t) const {
  auto& segs = session.segments;
  std::size_t done = 0;
  while (done < segs.size() && t - segs[done].start >= segs[done].trajectory.duration) {
    const TrajectoryStep& end = segs[done].trajectory.steps.back();
    session.rest_pose = end.pose;
    for (int c = 0; c < 3; ++c) session.rest_base[c] = segs[done].base_before[c] + end.base_offset[c];
    ++done;
  }
  segs.erase(segs.begin(), segs.begin() + static_cast<std::ptrdiff_t>(done));
}

SubmitResult SessionManager::submit(const std::string& id, const std::string& text) {
  Session& session = find(id);
  std::vector<CommandQuery> commands;
  try {
    auto lines = parse_commands(text);
    if (lines.size() != 1)
      throw SyntaxError(1, 1, lines.empty() ? "empty command" : "submit one command line at a time");
    commands = lines.front().commands;
  } catch (const Error& e) {
    return {false, e.code(), e.what(), nullptr};
  }
  std::lock_guard lock(session.mutex);
  return submit_parsed(session, commands, text);
}

SubmitResult SessionManager::submit(const std::string& id, const CommandQuery& command) {
  Session& session = find(id);
  std::lock_guard lock(session.mutex);
  return submit_parsed(session, {command}, command.text());
}

SubmitResult SessionManager::submit_parsed(Session& session, const std::vector<CommandQuery>& commands,
                                           const std::string& text) {
  const double now = clock_->now() - session.created;
  settle(session, now);
  const Segment* tail = session.segments.empty() ? nullptr : &session.segments.back();
  const Pose& start_pose = tail ? tail->trajectory.steps.back().pose : session.rest_pose;
  Vec3 base_before = session.rest_base;
  double start = now;
  if (tail) {
    for (int c = 0; c < 3; ++c) base_before[c] = tail->base_before[c] + tail->trajectory.steps.back().base_offset[c];
    start = std::max(now, tail->start + tail->trajectory.duration);
  }

  const LoadedPlatform& loaded = *session.loaded;
  Segment seg;
  ResolvedTarget target;
  try {
    target = compose(loaded.store, loaded.platform, commands, start_pose);
    seg.trajectory = interpolate(loaded.platform, start_pose, target, options_.timing);
  } catch (const Error& e) {
    return {false, e.code(), e.what(), nullptr};
  }
  seg.start = start;
  seg.base_before = base_before;

  json commands_json = json::array();
  for (const CommandQuery& c : commands) commands_json.push_back(c.text());
  json translation = nullptr;
  if (target.translation)
    translation = {{"direction", target.translation->direction.name()},
                   {"x", target.translation->magnitude},
                   {"quantum", target.translation->quantum},
                   {"offset", translation_offset(*target.translation)}};
  json resolution = {{"commands", commands_json},
                     {"articulation", partial_json(target.articulation)},
                     {"translation", translation},
                     {"goal", seg.trajectory.steps.back().pose.values},
                     {"start", seg.start},
                     {"duration", seg.trajectory.duration}};
  session.segments.push_back(std::move(seg));
  session.history.emplace_back(now, text);
  return {true, std::nullopt, "", resolution};
}

std::size_t SessionManager::cancel(const std::string& id) {
  Session& session = find(id);
  std::lock_guard lock(session.mutex);
  const double now = clock_->now() - session.created;
  settle(session, now);
  SessionState frozen = sample(session, now);
  std::size_t dropped = session.segments.size();
  session.segments.clear();
  session.rest_pose = frozen.pose;
  session.rest_base = frozen.base;
  return dropped;
}

SessionState SessionManager::state(const std::string& id) const {
  Session& session = find(id);
  std::lock_guard lock(session.mutex);
  double elapsed = std::max(0.0, clock_->now() - session.created);
  auto seq = static_cast<std::uint64_t>(std::floor(elapsed * options_.tick_hz));
  SessionState out = sample(session, static_cast<double>(seq) / options_.tick_hz);
  out.seq = seq;
  return out;
}

SessionState SessionManager::state_now(const std::string& id) const {
  Session& session = find(id);
  std::lock_guard lock(session.mutex);
  double elapsed = std::max(0.0, clock_->now() - session.created);
  SessionState out = sample(session, elapsed);
  out.seq = static_cast<std::uint64_t>(std::floor(elapsed * options_.tick_hz));
  return out;
}

std::vector<std::pair<double, std::string>> SessionManager::history(const std::string& id) const {
  Session& session = find(id);
  std::lock_guard lock(session.mutex);
  return session.history;
}

json SessionManager::state_message(const std::string& id, const SessionState& state) const {
  const PlatformDescription& platform = find(id).loaded->platform;
  json frames = json::array();
  auto fk = forward_kinematics(platform, state.pose);
  for (std::size_t l = 0; l < fk.size(); ++l) {
    const auto& r = fk[l].rotation;
    const auto& t = fk[l].translation;
    frames.push_back({{"link", platform.tree.links[l].name},
                      {"rotation", {r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2), r(2, 0), r(2, 1), r(2, 2)}},
                      {"translation", {t.x(), t.y(), t.z()}}});
  }
  return {{"v", 1},
          {"session", id},
          {"seq", state.seq},
          {"t", state.t},
          {"pose", state.pose.values},
          {"base", state.base},
          {"moving", state.moving},
          {"queued", state.queued},
          {"frames", frames}};
}

// ---------------------------------------------------------------------------
// HTTP routing

namespace {

HttpReply error_reply(int status, std::string_view code, const std::string& message) {
  return {status, {{"v", 1}, {"error", {{"code", code}, {"message", message}}}}};
}

std::vector<std::string> path_segments(const std::string& target) {
  std::string path = target.substr(0, target.find('?'));
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    std::size_t j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    if (j > i) out.push_back(path.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

json state_json(const SessionState& s) {
  return {{"seq", s.seq}, {"t", s.t}, {"pose", s.pose.values}, {"base", s.base}, {"moving", s.moving},
          {"queued", s.queued}};
}

CommandQuery command_from_json(const json& c) {
  CommandQuery q;
  q.limb = c.at("limb").get<std::string>();
  q.origin = c.at("origin").get<std::string>();
  q.direction = parse_direction(c.at("direction").get<std::string>());
  q.size = c.at("size").get<int>();
  return q;
}

}  // namespace

HttpReply handle_request(SessionManager& sessions, const std::string& method, const std::string& target,
                         const std::string& body) {
  auto seg = path_segments(target);
  json request;
  if (method == "POST" && !body.empty()) {
    request = json::parse(body, nullptr, false);
    if (request.is_discarded() || !request.is_object()) return error_reply(400, "FormatError", "body is not a JSON object");
    if (request.contains("v") && request["v"] != 1) return error_reply(400, "FormatError", "unsupported schema version");
  }
  try {
    if (method == "GET" && seg == std::vector<std::string>{"platforms"}) return {200, platform_catalog(sessions.platforms())};

    if (seg.size() == 1 && seg[0] == "sessions" && method == "POST") {
      if (!request.contains("platform") || !request["platform"].is_string())
        return error_reply(400, "FormatError", "expected {\"platform\": name}");
      std::string id = sessions.create_session(request["platform"]);
      return {201, {{"v", 1}, {"session", id}, {"state", state_json(sessions.state(id))}}};
    }
    if (seg.size() >= 2 && seg[0] == "sessions") {
      const std::string& id = seg[1];
      if (seg.size() == 2 && method == "GET") return {200, {{"v", 1}, {"session", id}, {"state", state_json(sessions.state_now(id))}}};
      if (seg.size() == 3 && seg[2] == "commands" && method == "POST") {
        SubmitResult r;
        if (request.contains("text") && request["text"].is_string()) {
          r = sessions.submit(id, request["text"].get<std::string>());
        } else if (request.contains("command") && request["command"].is_object()) {
          CommandQuery q;
          try {
            q = command_from_json(request["command"]);
          } catch (const json::exception& e) {
            return error_reply(400, "FormatError", e.what());
          }
          r = sessions.submit(id, q);
        } else {
          return error_reply(400, "FormatError", "expected {\"text\": ...} or {\"command\": {...}}");
        }
        json out = {{"v", 1}, {"accepted", r.accepted}};
        if (r.accepted) out["resolution"] = r.resolution;
        else out["error"] = {{"code", to_string(*r.error)}, {"message", r.message}};
        return {r.accepted ? 200 : 422, out};
      }
      if (seg.size() == 3 && seg[2] == "cancel" && method == "POST") {
        std::size_t dropped = sessions.cancel(id);
        return {200, {{"v", 1}, {"cancelled", dropped}, {"state", state_json(sessions.state_now(id))}}};
      }
    }
  } catch (const Error& e) {
    int status = (e.code() == ErrorCode::UnknownSession || e.code() == ErrorCode::UnknownPlatform) ? 404 : 422;
    return error_reply(status, to_string(e.code()), e.what());
  }
  return error_reply(404, "NotFound", method + " " + target);
}

}  // namespace kinesphere
