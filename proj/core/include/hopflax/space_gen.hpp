#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hopflax/space.hpp"

namespace hopflax {

enum class SpaceKind { circle, gaussian_interval, torus2d, path, complete, custom_file };

std::string_view to_string(SpaceKind kind);

/// Parameters of a canonical space. Only the fields relevant to `kind` are
/// read; the rest keep their defaults.
struct SpaceSpec {
  SpaceKind kind = SpaceKind::circle;
  std::size_t n = 2;
  std::size_t m = 2;             // torus2d second resolution
  double length = 1.0;           // circle circumference; path total length (<= 0: n - 1)
  double sigma = 1.0;            // gaussian_interval
  double half_width = 3.0;       // gaussian_interval truncation W
  double side_x = 1.0;           // torus2d
  double side_y = 1.0;           // torus2d
  std::filesystem::path file;    // custom_file

  static SpaceSpec circle(std::size_t n, double circumference);
  static SpaceSpec gaussian_interval(std::size_t n, double sigma, double half_width);
  static SpaceSpec torus2d(std::size_t n, std::size_t m, double side_x, double side_y);
  static SpaceSpec path(std::size_t n, double length = 0.0);
  static SpaceSpec complete(std::size_t n);
  static SpaceSpec custom_file(std::filesystem::path file);

  /// Parses "circle:N:L", "gauss:N:SIGMA:W", "torus:N:M:LX:LY", "path:N[:L]",
  /// "complete:N"; anything else is taken as a space file path.
  static SpaceSpec parse(std::string_view text);

  /// Throws naming the violated bound.
  void validate() const;
  std::string describe() const;
};

MeasuredSpace generate(const SpaceSpec& spec);

/// Doubles the resolution: circle/torus n -> 2n, gaussian_interval and path
/// n -> 2n - 1 (keeps the old grid points), complete n -> 2n.
SpaceSpec refine(const SpaceSpec& spec);

nlohmann::json space_to_json(const MeasuredSpace& space);
MeasuredSpace space_from_json(const nlohmann::json& doc);

void save(const MeasuredSpace& space, const std::filesystem::path& path);
MeasuredSpace load(const std::filesystem::path& path);

}  // namespace hopflax
