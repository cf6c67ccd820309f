#include "kinesphere/cli.hpp"

#include <atomic>
#include <csignal>
#include <map>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "kinesphere/ecl.hpp"
#include "kinesphere/error.hpp"
#include "kinesphere/eurdf.hpp"
#include "kinesphere/install.hpp"
#include "kinesphere/resolver.hpp"
#include "kinesphere/service.hpp"
#include "text_util.hpp"

namespace kinesphere {

using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::MalformedXml:
    case ErrorCode::SchemaViolation:
    case ErrorCode::FormatError:
    case ErrorCode::IntegrityError:
      return exit_io;
    default:
      return exit_failure;
  }
}

struct Output {
  std::ostream& out;
  std::ostream& err;
  bool json_diagnostics = false;
  bool quiet = false;

  void emit(const json& value) const { out << value.dump(2) << '\n'; }

  void error(std::string_view code, const std::string& message) const {
    if (json_diagnostics)
      err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
    else
      err << "error: " << code << ": " << message << '\n';
  }

  void note(const std::string& message) const {
    if (quiet) return;
    if (json_diagnostics)
      err << json{{"note", message}}.dump() << '\n';
    else
      err << message << '\n';
  }
};

json issues_json(const ValidationReport& report) {
  json out = json::array();
  for (const auto& issue : report) out.push_back({{"code", issue.code}, {"message", issue.message}});
  return out;
}

json partial_json(const PartialPose& p) {
  json out = json::array();
  for (const auto& v : p.values) out.push_back(v ? json(*v) : json(nullptr));
  return out;
}

json links_json(const PlatformDescription& p, const std::set<LinkId>& links) {
  json out = json::array();
  for (LinkId l : links) out.push_back(p.tree.links[l].name);
  return out;
}

Pose read_pose_file(const PlatformDescription& platform, const std::string& path) {
  json doc = json::parse(detail::read_file(path), nullptr, false);
  if (doc.is_object() && doc.contains("q")) doc = doc["q"];
  if (!doc.is_array()) throw Error(ErrorCode::FormatError, path + ": expected a JSON array of joint values");
  Pose pose;
  for (const auto& v : doc) {
    if (!v.is_number()) throw Error(ErrorCode::FormatError, path + ": joint values must be numbers");
    pose.values.push_back(v.get<double>());
  }
  check_pose(platform, pose);
  return pose;
}

EclStore load_store_for(const PlatformDescription& platform, const std::string& path) {
  EclStore store = import_store(detail::read_file(path));
  ValidationReport report = check_store(store, platform);
  if (!report.empty())
    throw Error(ErrorCode::IntegrityError,
                path + " does not match platform " + platform.name + ": " + report.front().code + ": " +
                    report.front().message);
  return store;
}

std::vector<DirectionPull> parse_direction_list(const std::string& text) {
  if (text == "laban26") return laban26();
  if (text == "laban8") return laban8_middle();
  std::vector<DirectionPull> out;
  std::size_t i = 0;
  while (i <= text.size()) {
    std::size_t j = text.find(',', i);
    if (j == std::string::npos) j = text.size();
    out.push_back(parse_direction(text.substr(i, j - i)));
    i = j + 1;
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= text.size()) {
    std::size_t j = text.find(',', i);
    if (j == std::string::npos) j = text.size();
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Output& io, const std::string& path) {
  std::string text = detail::read_file(path);
  ValidationReport issues;
  std::string name;
  int code = exit_ok;
  try {
    EurdfReadResult read = read_eurdf(text);
    name = read.platform.name;
    issues = read.issues;
    ValidationReport more = validate(read.platform);
    issues.insert(issues.end(), more.begin(), more.end());
    if (!issues.empty()) code = exit_failure;
  } catch (const Error& e) {
    issues.push_back({std::string(to_string(e.code())), e.what()});
    code = exit_code_for(e.code());
  }
  io.emit({{"platform", name}, {"valid", issues.empty()}, {"issues", issues_json(issues)}});
  return code;
}

int cmd_derive_labels(const Output& io, const std::string& path, const std::string& out_path) {
  EurdfReadResult read = read_eurdf(detail::read_file(path));
  PlatformDescription p = read.platform;
  std::vector<std::set<LinkId>> parts;
  for (const auto& [label, links] : p.labels.core) parts.push_back(links);
  if (parts.empty()) throw Error(ErrorCode::LabelingError, "document tags no core links");
  LabelSets derived = derive_labels(p.tree, parts);
  bool matches = derived == p.labels && read.issues.empty();
  p.labels = derived;

  json core = json::object(), limbs = json::object(), distals = json::object();
  for (const auto& [label, links] : derived.core) core[label] = links_json(p, links);
  for (const auto& [label, root] : derived.limbs) limbs[label] = links_json(p, p.tree.descendants(root));
  for (const auto& [label, joint] : derived.distals) distals[label] = p.tree.joints[joint].name;
  io.emit({{"platform", p.name},
           {"M", p.dof()},
           {"core", core},
           {"distals", distals},
           {"limbs", limbs},
           {"matches_document", matches}});
  if (!out_path.empty()) detail::write_file(out_path, serialize_eurdf(p));
  return exit_ok;
}

struct InstallArgs {
  std::string eurdf, record, out, origins, directions = "laban26";
  bool autom = false;
  int sizes = 3;
  std::uint64_t seed = 0;
  int restarts = 16, iterations = 200;
};

int cmd_install(const Output& io, const InstallArgs& a) {
  PlatformDescription platform = load_eurdf_file(a.eurdf);
  std::vector<std::string> origins = split_commas(a.origins);
  if (origins.empty()) {
    for (const auto& [label, joint] : platform.labels.distals) origins.push_back(label);
    for (const auto& [label, links] : platform.labels.core) origins.push_back(label);
  }
  VsamSpec spec = build_vsam(platform, origins, parse_direction_list(a.directions), a.sizes);

  json summary = {{"platform", platform.name}, {"s_max", a.sizes}};
  EclStore store;
  if (a.autom) {
    InstallConfig config;
    config.seed = a.seed;
    config.restarts = a.restarts;
    config.iterations = a.iterations;
    InstallResult result = auto_install(platform, spec, config);
    std::map<std::string, int> outcomes, per_direction;
    for (const PairReport& r : result.pairs) {
      ++outcomes[std::string(to_string(r.outcome))];
      if (r.outcome == PairOutcome::stored) ++per_direction[r.key.direction.name()];
    }
    auto count = [&](const char* key) { return outcomes.count(key) ? outcomes[key] : 0; };
    int stored = count("stored"), translation = count("translation");
    summary["pairs_stored"] = stored;
    summary["translation_rows"] = translation;
    summary["pairs_skipped"] = static_cast<int>(result.pairs.size()) - stored - translation;
    summary["outcomes"] = outcomes;
    summary["per_direction"] = per_direction;
    store = std::move(result.store);
  } else {
    RecordResult result = record_install(platform, spec, detail::read_file(a.record));
    for (const std::string& w : result.warnings) io.note("warning: " + w);
    summary["warnings"] = result.warnings;
    store = std::move(result.store);
  }
  summary["rows"] = store.vsam_size();
  summary["poses"] = store.pose_size();
  detail::write_file(a.out, export_store(store));
  summary["output"] = a.out;
  io.emit(summary);
  return exit_ok;
}

int cmd_query(const Output& io, const std::string& eurdf, const std::string& ecl, const std::string& text,
              const std::string& pose_path) {
  PlatformDescription platform = load_eurdf_file(eurdf);
  EclStore store = load_store_for(platform, ecl);
  Pose current = pose_path.empty() ? platform.neutral_pose() : read_pose_file(platform, pose_path);
  CommandQuery cmd = parse_command(text);
  ResolvedTarget target = resolve(store, platform, cmd, current);
  json out = {{"command", cmd.text()}, {"pose", partial_json(target.articulation)}};
  if (target.translation)
    out["translate"] = {{"direction", target.translation->direction.name()},
                        {"x", target.translation->magnitude},
                        {"quantum", target.translation->quantum},
                        {"offset", translation_offset(*target.translation)}};
  io.emit(out);
  return exit_ok;
}

struct ExecArgs {
  std::string eurdf, ecl, commands, start = "neutral", out;
  int steps = 50;
  double duration = 2.0;
};

int cmd_exec(const Output& io, const ExecArgs& a) {
  PlatformDescription platform = load_eurdf_file(a.eurdf);
  EclStore store = load_store_for(platform, a.ecl);
  Pose start = a.start == "neutral" ? platform.neutral_pose() : read_pose_file(platform, a.start);
  auto lines = parse_commands(detail::read_file(a.commands));
  auto steps = execute_sequence(store, platform, lines, start, {a.steps, a.duration});
  json doc = {{"v", 1}, {"platform", platform.name}, {"segments", lines.size()}, {"steps", trajectory_json(steps)}};
  if (a.out.empty()) {
    io.out << doc.dump() << '\n';
    return exit_ok;
  }
  detail::write_file(a.out, doc.dump() + "\n");
  io.emit({{"segments", lines.size()},
           {"steps", steps.size()},
           {"duration", steps.back().t},
           {"final_pose", steps.back().pose.values},
           {"final_base", steps.back().base_offset},
           {"output", a.out}});
  return exit_ok;
}

int cmd_export(const Output& io, const std::string& ecl, const std::string& eurdf, const std::string& out_path) {
  EclStore store = import_store(detail::read_file(ecl));
  if (!eurdf.empty()) {
    ValidationReport report = check_store(store, load_eurdf_file(eurdf));
    if (!report.empty()) {
      io.emit({{"valid", false}, {"issues", issues_json(report)}});
      return exit_failure;
    }
  }
  std::string text = export_store(store);
  if (out_path.empty()) {
    io.out << text;
  } else {
    detail::write_file(out_path, text);
    io.emit({{"rows", store.vsam_size()}, {"poses", store.pose_size()}, {"output", out_path}});
  }
  return exit_ok;
}

int cmd_import(const Output& io, const std::string& ecl, const std::string& eurdf, const std::string& out_path) {
  EclStore store = import_store(detail::read_file(ecl));
  ValidationReport report = check_store(store, load_eurdf_file(eurdf));
  io.emit({{"platform", store.platform_name()},
           {"rows", store.vsam_size()},
           {"poses", store.pose_size()},
           {"valid", report.empty()},
           {"issues", issues_json(report)}});
  if (!report.empty()) return exit_failure;
  if (!out_path.empty()) detail::write_file(out_path, export_store(store));
  return exit_ok;
}

struct ServeArgs {
  std::vector<std::string> platforms;
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  double tick_hz = 20.0;
  int steps = 50;
  double duration = 2.0;
};

int cmd_serve(const Output& io, const ServeArgs& a) {
  std::map<std::string, std::shared_ptr<const LoadedPlatform>> loaded;
  for (const std::string& spec : a.platforms) {
    auto colon = spec.rfind(':');
    if (colon == std::string::npos)
      throw Error(ErrorCode::FormatError, "--platform expects EURDF:ECL, got '" + spec + "'");
    auto entry = std::make_shared<LoadedPlatform>();
    entry->platform = load_eurdf_file(spec.substr(0, colon));
    entry->store = load_store_for(entry->platform, spec.substr(colon + 1));
    std::string name = entry->platform.name;
    loaded.emplace(name, std::move(entry));
  }
  SessionManager sessions(std::move(loaded), std::make_shared<SteadyClock>(),
                          {{a.steps, a.duration}, a.tick_hz});
  TeleopServer server(sessions, a.address, a.port);
  server.start();
  io.emit({{"listening", {{"address", a.address}, {"port", server.port()}}}});
  io.out.flush();
  g_interrupted = false;
  auto previous_int = std::signal(SIGINT, on_signal);
  auto previous_term = std::signal(SIGTERM, on_signal);
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);
  server.stop();
  io.note("stopped");
  return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Build and query platform-invariant pose libraries."};
  app.name("kinesphere");
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "text";
  bool quiet = false;
  app.add_option("--format", format, "Diagnostic format on stderr")->check(CLI::IsMember({"text", "json"}));
  app.add_flag("-q,--quiet", quiet, "Suppress notes on stderr");

  std::string path, path2, path3, out_path, pose_path;

  auto* validate_cmd = app.add_subcommand("validate", "Check an eURDF document");
  validate_cmd->add_option("eurdf", path)->required();

  auto* derive_cmd = app.add_subcommand("derive-labels", "Derive limb and joint labels from core tags");
  derive_cmd->add_option("eurdf", path)->required();
  derive_cmd->add_option("-o,--output", out_path, "Write the relabeled document");

  InstallArgs ia;
  auto* install_cmd = app.add_subcommand("install", "Fill a configuration library");
  install_cmd->add_option("eurdf", ia.eurdf)->required();
  auto* auto_flag = install_cmd->add_flag("--auto", ia.autom, "Search the joint grid");
  auto* record_opt = install_cmd->add_option("--record", ia.record, "Recorded poses file");
  auto_flag->excludes(record_opt);
  install_cmd->add_option("--sizes", ia.sizes, "Sizes per entry")->check(CLI::PositiveNumber);
  install_cmd->add_option("--seed", ia.seed);
  install_cmd->add_option("--restarts", ia.restarts)->check(CLI::PositiveNumber);
  install_cmd->add_option("--iterations", ia.iterations)->check(CLI::PositiveNumber);
  install_cmd->add_option("--origins", ia.origins, "Comma-separated origin labels (default: all)");
  install_cmd->add_option("--directions", ia.directions, "laban26, laban8, or comma-separated names");
  install_cmd->add_option("-o,--output", ia.out)->required();

  auto* query_cmd = app.add_subcommand("query", "Resolve one command against a library");
  query_cmd->add_option("eurdf", path)->required();
  query_cmd->add_option("ecl", path2)->required();
  query_cmd->add_option("command", path3)->required();
  query_cmd->add_option("--pose", pose_path, "Current pose file (default: neutral)");

  ExecArgs ea;
  auto* exec_cmd = app.add_subcommand("exec", "Run a command file into a trajectory");
  exec_cmd->add_option("eurdf", ea.eurdf)->required();
  exec_cmd->add_option("ecl", ea.ecl)->required();
  exec_cmd->add_option("commands", ea.commands)->required();
  exec_cmd->add_option("--start", ea.start, "neutral or a pose file");
  exec_cmd->add_option("--steps", ea.steps)->check(CLI::Range(2, 1000000));
  exec_cmd->add_option("--duration", ea.duration)->check(CLI::PositiveNumber);
  exec_cmd->add_option("-o,--output", ea.out);

  auto* export_cmd = app.add_subcommand("export", "Write a library in canonical form");
  export_cmd->add_option("ecl", path)->required();
  export_cmd->add_option("--platform", path2, "Check against this eURDF first");
  export_cmd->add_option("-o,--output", out_path);

  auto* import_cmd = app.add_subcommand("import", "Check a library file against its platform");
  import_cmd->add_option("ecl", path)->required();
  import_cmd->add_option("--platform", path2)->required();
  import_cmd->add_option("-o,--output", out_path);

  ServeArgs sa;
  auto* serve_cmd = app.add_subcommand("serve", "Run the teleoperation service");
  serve_cmd->add_option("--platform", sa.platforms, "EURDF:ECL, repeatable")->required();
  serve_cmd->add_option("--address", sa.address);
  serve_cmd->add_option("--port", sa.port);
  serve_cmd->add_option("--tick-hz", sa.tick_hz)->check(CLI::PositiveNumber);
  serve_cmd->add_option("--steps", sa.steps)->check(CLI::Range(2, 1000000));
  serve_cmd->add_option("--duration", sa.duration)->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (install_cmd->parsed() && !ia.autom && ia.record.empty())
      throw CLI::ValidationError("install", "one of --auto or --record is required");
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  Output io{out, err, format == "json", quiet};
  try {
    if (validate_cmd->parsed()) return cmd_validate(io, path);
    if (derive_cmd->parsed()) return cmd_derive_labels(io, path, out_path);
    if (install_cmd->parsed()) return cmd_install(io, ia);
    if (query_cmd->parsed()) return cmd_query(io, path, path2, path3, pose_path);
    if (exec_cmd->parsed()) return cmd_exec(io, ea);
    if (export_cmd->parsed()) return cmd_export(io, path, path2, out_path);
    if (import_cmd->parsed()) return cmd_import(io, path, path2, out_path);
    if (serve_cmd->parsed()) return cmd_serve(io, sa);
  } catch (const Error& e) {
    io.error(to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    io.error("FormatError", e.what());
    return exit_io;
  } catch (const std::exception& e) {
    io.error("InternalError", e.what());
    return exit_failure;
  }
  return exit_usage;
}

}  // namespace kinesphere
