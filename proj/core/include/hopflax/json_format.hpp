#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace hopflax {

/// Serializes with every floating-point number printed at 17 significant
/// digits ("%.17g") so artifacts are byte-stable for identical inputs.
/// Non-finite numbers become null. Object keys keep nlohmann's sorted order.
std::string dump_json(const nlohmann::json& doc, int indent = 2);

/// One number at 17 significant digits, as used in CSV artifacts.
std::string format_number(double value);

}  // namespace hopflax
