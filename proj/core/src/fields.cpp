#include "hopflax/fields.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hopflax/error.hpp"
#include "hopflax/inequalities.hpp"
#include "hopflax/json_format.hpp"

namespace hopflax {

namespace {

double parse_real(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty())
    throw Error("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  return v;
}

std::vector<double> first_axis(const MeasuredSpace& space, std::string_view name) {
  const auto& coords = space.meta().coords;
  if (coords.size() != space.size())
    throw Error("field '" + std::string(name) + "' needs coordinates, which this space does not carry");
  std::vector<double> x(space.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (coords[i].empty()) throw Error("point " + std::to_string(i) + " has no coordinate");
    x[i] = coords[i][0];
  }
  return x;
}

double first_period(const MeasuredSpace& space) {
  const auto& p = space.meta().periods;
  return p.empty() ? 0.0 : p[0];
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

ScalarField resolve_field(const MeasuredSpace& space, std::string_view spec) {
  const std::size_t n = space.size();
  std::vector<double> v(n);

  if (spec == "cos" || spec == "sin") {
    const double period = first_period(space);
    if (!(period > 0.0))
      throw Error("field '" + std::string(spec) + "' needs a periodic first coordinate");
    const auto x = first_axis(space, spec);
    const double k = 2.0 * std::numbers::pi / period;
    for (std::size_t i = 0; i < n; ++i) v[i] = spec == "cos" ? std::cos(k * x[i]) : std::sin(k * x[i]);
    return make_field(space, std::move(v));
  }
  if (spec == "coordinate") return make_field(space, first_axis(space, spec));
  if (spec.starts_with("tilt:")) {
    if (first_period(space) != 0.0) throw Error("tilt fields need a non-periodic first coordinate");
    const double a = parse_real(spec.substr(5), "tilt exponent");
    const auto x = first_axis(space, spec);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(0.5 * a * x[i]);
    return make_field(space, std::move(v));
  }
  if (spec.starts_with("const:")) return constant_field(space, parse_real(spec.substr(6), "constant"));
  if (spec.starts_with("random:")) {
    const auto text = spec.substr(7);
    std::uint64_t seed = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty())
      throw Error("cannot parse random seed from '" + std::string(text) + "'");
    const double h = space.mesh_h();
    return random_smoothed_field(space, seed, 10.0 * h * h);
  }
  return read_field_csv(space, std::filesystem::path(std::string(spec)));
}

std::string field_to_csv(const ScalarField& field) {
  std::string out = "index,value\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    out += std::to_string(i);
    out.push_back(',');
    out += format_number(field[i]);
    out.push_back('\n');
  }
  return out;
}

void write_field_csv(const ScalarField& field, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write field file " + path.string());
  os << field_to_csv(field);
  if (!os) throw Error("failed writing field file " + path.string());
}

ScalarField read_field_csv(const MeasuredSpace& space, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open field file " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  bool indexed = false;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    if (lineno == 1 && s == "index,value") {
      indexed = true;
      continue;
    }
    const auto comma = s.find(',');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (indexed) {
      if (comma == std::string_view::npos) throw Error(where + ": expected 'index,value'");
      const double idx = parse_real(trim(s.substr(0, comma)), "index at " + where);
      if (idx != static_cast<double>(values.size()))
        throw Error(where + ": indices must be 0, 1, 2, ... in order");
      values.push_back(parse_real(trim(s.substr(comma + 1)), "value at " + where));
    } else {
      values.push_back(parse_real(s, "value at " + where));
    }
  }
  if (values.size() != space.size())
    throw Error("field file " + path.string() + " has " + std::to_string(values.size()) +
                " values but the space has " + std::to_string(space.size()) + " points");
  return make_field(space, std::move(values));
}

}  // namespace hopflax
