#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hopflax/space.hpp"

namespace hopflax {

/// Resolves a named field against the generator metadata of `space`:
///   cos, sin        cos(2 pi x / P), sin(2 pi x / P) on a periodic first axis
///   coordinate      the first coordinate
///   tilt:A          e^{A x / 2} along a non-periodic first coordinate
///   const:C         the constant C
///   random:SEED     uniform [-1, 1] noise smoothed by Q_{10 h^2}
/// Any other text is read as a field CSV file.
ScalarField resolve_field(const MeasuredSpace& space, std::string_view spec);

/// "index,value" with a header row and 17 significant digits.
std::string field_to_csv(const ScalarField& field);
void write_field_csv(const ScalarField& field, const std::filesystem::path& path);

/// Accepts the format written above, or one value per line without a header.
ScalarField read_field_csv(const MeasuredSpace& space, const std::filesystem::path& path);

}  // namespace hopflax
