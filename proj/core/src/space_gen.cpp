#include "hopflax/space_gen.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "hopflax/error.hpp"
#include "hopflax/json_format.hpp"

namespace hopflax {

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("cannot parse " + std::string(what) + " from '" + s + "'");
  }
}

std::size_t parse_count(const std::string& s, std::string_view what) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error("cannot parse " + std::string(what) + " from '" + s + "'");
  }
  return v;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

std::string num(double v) { return format_number(v); }

}  // namespace

std::string_view to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::circle: return "circle";
    case SpaceKind::gaussian_interval: return "gaussian_interval";
    case SpaceKind::torus2d: return "torus2d";
    case SpaceKind::path: return "path";
    case SpaceKind::complete: return "complete";
    case SpaceKind::custom_file: return "custom_file";
  }
  return "unknown";
}

SpaceSpec SpaceSpec::circle(std::size_t n, double circumference) {
  SpaceSpec s;
  s.kind = SpaceKind::circle;
  s.n = n;
  s.length = circumference;
  return s;
}

SpaceSpec SpaceSpec::gaussian_interval(std::size_t n, double sigma, double half_width) {
  SpaceSpec s;
  s.kind = SpaceKind::gaussian_interval;
  s.n = n;
  s.sigma = sigma;
  s.half_width = half_width;
  return s;
}

SpaceSpec SpaceSpec::torus2d(std::size_t n, std::size_t m, double side_x, double side_y) {
  SpaceSpec s;
  s.kind = SpaceKind::torus2d;
  s.n = n;
  s.m = m;
  s.side_x = side_x;
  s.side_y = side_y;
  return s;
}

SpaceSpec SpaceSpec::path(std::size_t n, double length) {
  SpaceSpec s;
  s.kind = SpaceKind::path;
  s.n = n;
  s.length = length;
  return s;
}

SpaceSpec SpaceSpec::complete(std::size_t n) {
  SpaceSpec s;
  s.kind = SpaceKind::complete;
  s.n = n;
  return s;
}

SpaceSpec SpaceSpec::custom_file(std::filesystem::path file) {
  SpaceSpec s;
  s.kind = SpaceKind::custom_file;
  s.file = std::move(file);
  return s;
}

SpaceSpec SpaceSpec::parse(std::string_view text) {
  const auto parts = split(text, ':');
  const auto& head = parts[0];
  auto arity = [&](std::size_t lo, std::size_t hi) {
    require(parts.size() - 1 >= lo && parts.size() - 1 <= hi,
            "space spec '" + std::string(text) + "' has the wrong number of parameters");
  };
  SpaceSpec s;
  if (head == "circle") {
    arity(2, 2);
    s = circle(parse_count(parts[1], "circle n"), parse_double(parts[2], "circumference"));
  } else if (head == "gauss" || head == "gaussian") {
    arity(3, 3);
    s = gaussian_interval(parse_count(parts[1], "gaussian n"), parse_double(parts[2], "sigma"),
                          parse_double(parts[3], "half width"));
  } else if (head == "torus") {
    arity(4, 4);
    s = torus2d(parse_count(parts[1], "torus n"), parse_count(parts[2], "torus m"),
                parse_double(parts[3], "torus side x"), parse_double(parts[4], "torus side y"));
  } else if (head == "path") {
    arity(1, 2);
    s = path(parse_count(parts[1], "path n"),
             parts.size() == 3 ? parse_double(parts[2], "path length") : 0.0);
  } else if (head == "complete") {
    arity(1, 1);
    s = complete(parse_count(parts[1], "complete n"));
  } else {
    s = custom_file(std::filesystem::path(std::string(text)));
  }
  s.validate();
  return s;
}

void SpaceSpec::validate() const {
  auto positive = [](double v, const char* what) {
    require(std::isfinite(v) && v > 0.0, std::string(what) + " must be > 0, got " + num(v));
  };
  switch (kind) {
    case SpaceKind::circle:
      require(n >= 2, "circle resolution must be >= 2, got " + std::to_string(n));
      positive(length, "circle circumference");
      break;
    case SpaceKind::gaussian_interval:
      require(n >= 2, "gaussian_interval resolution must be >= 2, got " + std::to_string(n));
      positive(sigma, "gaussian_interval sigma");
      positive(half_width, "gaussian_interval half width");
      require(half_width >= 3.0 * sigma, "gaussian_interval needs W >= 3 sigma, got W = " +
                                             num(half_width) + ", 3 sigma = " + num(3.0 * sigma));
      break;
    case SpaceKind::torus2d:
      require(n >= 2 && m >= 2, "torus2d resolution must be >= 2 in both directions");
      positive(side_x, "torus2d side x");
      positive(side_y, "torus2d side y");
      break;
    case SpaceKind::path:
      require(n >= 2, "path resolution must be >= 2, got " + std::to_string(n));
      require(std::isfinite(length) && length >= 0.0, "path length must be >= 0");
      break;
    case SpaceKind::complete:
      require(n >= 2, "complete graph resolution must be >= 2, got " + std::to_string(n));
      break;
    case SpaceKind::custom_file:
      require(!file.empty(), "custom_file spec needs a path");
      break;
  }
}

std::string SpaceSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case SpaceKind::circle: os << "circle:" << n << ':' << num(length); break;
    case SpaceKind::gaussian_interval:
      os << "gauss:" << n << ':' << num(sigma) << ':' << num(half_width);
      break;
    case SpaceKind::torus2d:
      os << "torus:" << n << ':' << m << ':' << num(side_x) << ':' << num(side_y);
      break;
    case SpaceKind::path: os << "path:" << n << ':' << num(length); break;
    case SpaceKind::complete: os << "complete:" << n; break;
    case SpaceKind::custom_file: os << file.string(); break;
  }
  return os.str();
}

MeasuredSpace generate(const SpaceSpec& spec) {
  spec.validate();
  std::vector<Edge> edges;
  std::vector<double> weights;
  SpaceMeta meta;
  meta.kind = std::string(to_string(spec.kind));
  const std::size_t n = spec.n;

  switch (spec.kind) {
    case SpaceKind::circle: {
      const double step = spec.length / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        edges.push_back({i, (i + 1) % n, step});
        meta.coords.push_back({static_cast<double>(i) * step});
      }
      weights.assign(n, 1.0);
      meta.periods = {spec.length};
      break;
    }
    case SpaceKind::gaussian_interval: {
      const double w = spec.half_width;
      const double step = 2.0 * w / static_cast<double>(n - 1);
      for (std::size_t i = 0; i < n; ++i) {
        // Symmetric placement: x_i = -x_{n-1-i} exactly.
        const double x = (static_cast<double>(2 * i) - static_cast<double>(n - 1)) /
                         static_cast<double>(n - 1) * w;
        meta.coords.push_back({x});
        weights.push_back(std::exp(-x * x / (2.0 * spec.sigma * spec.sigma)));
        if (i + 1 < n) edges.push_back({i, i + 1, step});
      }
      meta.periods = {0.0};
      break;
    }
    case SpaceKind::torus2d: {
      const std::size_t m = spec.m;
      const double hx = spec.side_x / static_cast<double>(n);
      const double hy = spec.side_y / static_cast<double>(m);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
          const std::size_t id = r * m + c;
          edges.push_back({id, ((r + 1) % n) * m + c, hx});
          edges.push_back({id, r * m + (c + 1) % m, hy});
          meta.coords.push_back({static_cast<double>(r) * hx, static_cast<double>(c) * hy});
        }
      }
      weights.assign(n * m, 1.0);
      meta.periods = {spec.side_x, spec.side_y};
      break;
    }
    case SpaceKind::path: {
      const double total = spec.length > 0.0 ? spec.length : static_cast<double>(n - 1);
      const double step = total / static_cast<double>(n - 1);
      for (std::size_t i = 0; i < n; ++i) {
        meta.coords.push_back({static_cast<double>(i) * step});
        if (i + 1 < n) edges.push_back({i, i + 1, step});
      }
      weights.assign(n, 1.0);
      meta.periods = {0.0};
      break;
    }
    case SpaceKind::complete: {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
      }
      weights.assign(n, 1.0);
      break;
    }
    case SpaceKind::custom_file:
      return load(spec.file);
  }
  const std::size_t count = spec.kind == SpaceKind::torus2d ? n * spec.m : n;
  return build_from_graph(count, edges, weights, std::move(meta));
}

SpaceSpec refine(const SpaceSpec& spec) {
  spec.validate();
  SpaceSpec out = spec;
  switch (spec.kind) {
    case SpaceKind::circle:
    case SpaceKind::complete: out.n = 2 * spec.n; break;
    case SpaceKind::torus2d:
      out.n = 2 * spec.n;
      out.m = 2 * spec.m;
      break;
    case SpaceKind::gaussian_interval: out.n = 2 * spec.n - 1; break;
    case SpaceKind::path:
      // Pin the total length so the step halves.
      out.length = spec.length > 0.0 ? spec.length : static_cast<double>(spec.n - 1);
      out.n = 2 * spec.n - 1;
      break;
    case SpaceKind::custom_file:
      throw Unsupported("custom_file spaces cannot be refined");
  }
  return out;
}

nlohmann::json space_to_json(const MeasuredSpace& space) {
  nlohmann::json doc;
  doc["n"] = space.size();
  auto edges = nlohmann::json::array();
  for (const auto& e : space.edges()) edges.push_back({e.i, e.j, e.length});
  doc["edges"] = std::move(edges);
  doc["measure"] = std::vector<double>(space.measure().begin(), space.measure().end());
  const auto& meta = space.meta();
  if (!meta.labels.empty()) doc["labels"] = meta.labels;
  if (!meta.coords.empty()) doc["coords"] = meta.coords;
  if (!meta.periods.empty()) doc["periods"] = meta.periods;
  doc["kind"] = meta.kind;
  return doc;
}

MeasuredSpace space_from_json(const nlohmann::json& doc) {
  require(doc.is_object(), "space file must be a JSON object");
  require(doc.contains("n") && doc["n"].is_number_integer() && doc["n"].get<long long>() > 0,
          "space file needs a positive integer 'n'");
  const auto n = doc["n"].get<std::size_t>();
  require(doc.contains("edges") && doc["edges"].is_array(), "space file needs an 'edges' array");
  require(doc.contains("measure") && doc["measure"].is_array(),
          "space file needs a 'measure' array");

  std::vector<Edge> edges;
  for (const auto& item : doc["edges"]) {
    require(item.is_array() && item.size() == 3 && item[0].is_number_integer() &&
                item[1].is_number_integer() && item[2].is_number(),
            "each edge must be [i, j, length]: " + item.dump());
    require(item[0].get<long long>() >= 0 && item[1].get<long long>() >= 0,
            "edge endpoints must be nonnegative: " + item.dump());
    edges.push_back({item[0].get<std::size_t>(), item[1].get<std::size_t>(),
                     item[2].get<double>()});
  }
  const auto& measure = doc["measure"];
  require(measure.size() == n, "measure has " + std::to_string(measure.size()) +
                                   " entries, expected n = " + std::to_string(n));
  std::vector<double> weights;
  for (const auto& w : measure) {
    require(w.is_number(), "measure entries must be numbers");
    weights.push_back(w.get<double>());
  }

  SpaceMeta meta;
  if (doc.contains("kind") && doc["kind"].is_string()) meta.kind = doc["kind"];
  if (doc.contains("labels")) {
    meta.labels = doc["labels"].get<std::vector<std::string>>();
    require(meta.labels.size() == n, "labels must have n entries");
  }
  if (doc.contains("coords")) {
    meta.coords = doc["coords"].get<std::vector<std::vector<double>>>();
    require(meta.coords.size() == n, "coords must have n entries");
  }
  if (doc.contains("periods")) meta.periods = doc["periods"].get<std::vector<double>>();
  return build_from_graph(n, edges, weights, std::move(meta));
}

void save(const MeasuredSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << dump_json(space_to_json(space));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

MeasuredSpace load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open space file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed JSON in '" + path.string() + "': " + e.what());
  }
  try {
    return space_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid space file '" + path.string() + "': " + e.what());
  }
}

}  // namespace hopflax
