#include "hopflax/json_format.hpp"

#include <cmath>
#include <cstdio>

namespace hopflax {

namespace {

void write(const nlohmann::json& node, int indent, int depth, std::string& out) {
  const bool pretty = indent >= 0;
  auto newline = [&](int level) {
    if (!pretty) return;
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent * level), ' ');
  };

  switch (node.type()) {
    case nlohmann::json::value_t::object: {
      if (node.empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (auto it = node.begin(); it != node.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += pretty ? ": " : ":";
        write(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out.push_back('}');
      return;
    }
    case nlohmann::json::value_t::array: {
      if (node.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line; nested structures get one item per line.
      bool flat = true;
      for (const auto& item : node) flat = flat && !item.is_structured();
      out.push_back('[');
      bool first = true;
      for (const auto& item : node) {
        if (!first) out += (flat && pretty) ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        write(item, indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      out.push_back(']');
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += format_number(node.get<double>());
      return;
    default:
      out += node.dump();
      return;
  }
}

}  // namespace

std::string format_number(double value) {
  if (!std::isfinite(value)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string dump_json(const nlohmann::json& doc, int indent) {
  std::string out;
  write(doc, indent, 0, out);
  out.push_back('\n');
  return out;
}

}  // namespace hopflax
