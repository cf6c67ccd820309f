#include "kinesphere/canonical_json.hpp"

#include <cstdio>
#include <cstdlib>

namespace kinesphere {

namespace {

std::string format9(double value) {
  if (value == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

bool is_scalar_array(const nlohmann::json& value) {
  for (const auto& item : value)
    if (item.is_structured()) return false;
  return true;
}

void write(const nlohmann::json& value, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (value.type()) {
    case nlohmann::json::value_t::object: {
      if (value.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = value.begin(); it != value.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        write(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (value.empty()) {
        out += "[]";
        return;
      }
      if (is_scalar_array(value)) {
        out += "[";
        for (std::size_t i = 0; i < value.size(); ++i) {
          if (i) out += ", ";
          write(value[i], out, indent + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write(value[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += format9(value.get<double>());
      return;
    default:
      out += value.dump();
      return;
  }
}

}  // namespace

double round_significant9(double value) {
  if (value == 0.0) return 0.0;
  double r = std::strtod(format9(value).c_str(), nullptr);
  return r == 0.0 ? 0.0 : r;
}

std::string canonical_dump(const nlohmann::json& value) {
  std::string out;
  write(value, out, 0);
  out += '\n';
  return out;
}

}  // namespace kinesphere
