#pragma once

// Teleoperation sessions over loaded platforms.
//
// A session owns a timeline of trajectory segments. Submitted commands are
// resolved immediately against the goal of the last queued segment and
// appended (FIFO); the state at any instant is read off the timeline, so
// nothing has to run in the background. Time comes from an injectable clock.

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinesphere/ecl.hpp"
#include "kinesphere/error.hpp"
#include "kinesphere/eurdf.hpp"
#include "kinesphere/resolver.hpp"

namespace kinesphere {

class Clock {
 public:
  virtual ~Clock() = default;
  /// Seconds since an arbitrary fixed epoch.
  virtual double now() const = 0;
};

class SteadyClock : public Clock {
 public:
  double now() const override;

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Clock for tests; time moves only when told to.
class ManualClock : public Clock {
 public:
  double now() const override;
  void advance(double seconds);
  void set(double seconds);

 private:
  mutable std::mutex mutex_;
  double now_ = 0.0;
};

/// A platform with its library, shared read-only by every session.
struct LoadedPlatform {
  PlatformDescription platform;
  EclStore store;
};

/// GET /platforms body: labels, origins and available directions per
/// (origin, limb) with their kmax.
nlohmann::json platform_catalog(const std::map<std::string, std::shared_ptr<const LoadedPlatform>>& platforms);

struct SessionState {
  std::uint64_t seq = 0;  ///< tick index since session creation
  double t = 0.0;         ///< seconds since session creation
  Pose pose;
  Vec3 base{0.0, 0.0, 0.0};
  bool moving = false;
  std::size_t queued = 0;  ///< segments not yet finished
};

struct SubmitResult {
  bool accepted = false;
  std::optional<ErrorCode> error;
  std::string message;
  nlohmann::json resolution;  ///< null when rejected
};

struct SessionOptions {
  Timing timing;
  double tick_hz = 20.0;
};

class SessionManager {
 public:
  SessionManager(std::map<std::string, std::shared_ptr<const LoadedPlatform>> platforms,
                 std::shared_ptr<const Clock> clock, SessionOptions options = {});

  const std::map<std::string, std::shared_ptr<const LoadedPlatform>>& platforms() const { return platforms_; }
  const SessionOptions& options() const { return options_; }

  /// Throws UnknownPlatform.
  std::string create_session(const std::string& platform);

  /// Parses and resolves `text` (one line, possibly compound). Resolver
  /// errors come back as a rejection; UnknownSession is thrown.
  SubmitResult submit(const std::string& session, const std::string& text);
  SubmitResult submit(const std::string& session, const CommandQuery& command);

  /// Drops queued segments and freezes at the current interpolated state.
  /// Returns the number of segments that were dropped or cut short.
  std::size_t cancel(const std::string& session);

  /// State sampled at the latest tick boundary. Throws UnknownSession.
  SessionState state(const std::string& session) const;
  /// State at the exact current time.
  SessionState state_now(const std::string& session) const;

  /// Accepted commands with their submission times.
  std::vector<std::pair<double, std::string>> history(const std::string& session) const;

  nlohmann::json state_message(const std::string& session, const SessionState& state) const;

 private:
  struct Segment {
    double start = 0.0;  ///< session time
    Trajectory trajectory;
    Vec3 base_before{0.0, 0.0, 0.0};
  };
  struct Session {
    std::shared_ptr<const LoadedPlatform> loaded;
    double created = 0.0;
    Pose rest_pose;  ///< pose before the first remaining segment
    Vec3 rest_base{0.0, 0.0, 0.0};
    std::vector<Segment> segments;
    std::vector<std::pair<double, std::string>> history;
    mutable std::mutex mutex;
  };

  Session& find(const std::string& id) const;
  SubmitResult submit_parsed(Session& session, const std::vector<CommandQuery>& commands, const std::string& text);
  static SessionState sample(const Session& session, double t);
  void settle(Session& session, double t) const;

  std::map<std::string, std::shared_ptr<const LoadedPlatform>> platforms_;
  std::shared_ptr<const Clock> clock_;
  SessionOptions options_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
  std::uint64_t salt_;
};

/// HTTP + WebSocket front end:
///   POST /sessions                {"v":1,"platform":name}
///   POST /sessions/{id}/commands  {"v":1,"text":...} or {"v":1,"command":{...}}
///   POST /sessions/{id}/cancel
///   GET  /sessions/{id}           current state
///   GET  /platforms
///   WS   /sessions/{id}/stream
class TeleopServer {
 public:
  TeleopServer(SessionManager& sessions, const std::string& address, unsigned short port);
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  /// Bound port (useful when constructed with port 0).
  unsigned short port() const;
  /// Serves in background threads until stop().
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Routes one HTTP request without any networking; the server delegates here.
struct HttpReply {
  int status = 200;
  nlohmann::json body;
};
HttpReply handle_request(SessionManager& sessions, const std::string& method, const std::string& target,
                         const std::string& body);

}  // namespace kinesphere
