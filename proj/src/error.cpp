#include "kinesphere/error.hpp"

#include <fstream>
#include <sstream>

#include "text_util.hpp"

namespace kinesphere {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::LabelingError: return "LabelingError";
    case ErrorCode::DisconnectedCore: return "DisconnectedCore";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::UnknownOrigin: return "UnknownOrigin";
    case ErrorCode::InvalidSizeCount: return "InvalidSizeCount";
    case ErrorCode::DuplicateEntry: return "DuplicateEntry";
    case ErrorCode::UnknownKId: return "UnknownKId";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::LimitViolation: return "LimitViolation";
    case ErrorCode::SizeOverflow: return "SizeOverflow";
    case ErrorCode::NoSuchEntry: return "NoSuchEntry";
    case ErrorCode::JointConflict: return "JointConflict";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IntegrityError: return "IntegrityError";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownDirectionName: return "UnknownDirectionName";
    case ErrorCode::NoLocomotion: return "NoLocomotion";
    case ErrorCode::GroundProjectionDegenerate: return "GroundProjectionDegenerate";
    case ErrorCode::MultipleTranslations: return "MultipleTranslations";
    case ErrorCode::InstallFailure: return "InstallFailure";
    case ErrorCode::UnknownPlatform: return "UnknownPlatform";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path);
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
}

}  // namespace detail
}  // namespace kinesphere
