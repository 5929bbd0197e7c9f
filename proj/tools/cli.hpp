#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hopflax::cli {

enum class Command { gen, semigroup, constants, chain, transport, doubling, plot };

std::string_view to_string(Command command);

/// "geo:MIN:MAX:COUNT", "lin:MIN:MAX:COUNT" or a comma list of times.
struct TimeGrid {
  std::vector<double> values;
  std::string text;
  static TimeGrid parse(std::string_view text);
};

inline constexpr std::uint64_t kDefaultSeed = 7;

struct RunConfig {
  Command command = Command::gen;

  // Space source: a generator spec or space file (--space), or for gen the
  // explicit generator flags. Exactly one.
  std::string space;
  std::string kind;
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<double> length;
  double sigma = 1.0;
  double width = 4.0;
  double side_x = 1.0;
  double side_y = 1.0;

  std::string field;         // semigroup, doubling source; transport source density
  std::string target = "const:1";  // transport target density
  std::optional<double> K;
  TimeGrid times;
  double step = 1e-2;                  // residual forward step
  std::vector<double> steps;           // residual_vs_s sweep
  std::size_t mesh_levels = 0;         // defect_vs_mesh sweep
  double defect_t = 0.5;
  double defect_s = 0.5;

  std::string which = "all";
  std::optional<std::size_t> budget;
  std::uint64_t seed = kDefaultSeed;
  double tau = 0.05;
  std::size_t traces = 4;
  std::optional<double> smoothing;     // default 10 mesh_h^2

  double r_min = 0.0;
  double r_max = 0.0;
  std::size_t r_steps = 16;
  double dilation = 2.0;

  std::string report;        // plot input
  std::string plot_kind;

  std::filesystem::path out;       // gen output file
  std::filesystem::path out_dir;   // artifacts and run.json
  int indent = 2;
};

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

/// Executes one command, writing artifacts and the run.json manifest under
/// config.out_dir. Returns an ExitCode.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (including the program name) and runs it.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hopflax::cli
