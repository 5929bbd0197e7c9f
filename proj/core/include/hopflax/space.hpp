#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hopflax {

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double length = 0.0;
};

struct Neighbor {
  std::size_t index = 0;
  double length = 0.0;  // generating edge length, >= dist(x, index)
};

/// Descriptive metadata carried alongside a space. Never used for distances.
struct SpaceMeta {
  std::string kind = "custom";
  std::vector<std::string> labels;
  std::vector<std::vector<double>> coords;  // per point
  std::vector<double> periods;              // per coordinate axis, 0 = not periodic
};

/// Finite measured length space: a connected weighted graph with its
/// all-pairs shortest-path metric and a probability measure.
///
/// Immutable after construction; safe to share between threads.
class MeasuredSpace {
 public:
  std::size_t size() const { return n_; }
  double dist(std::size_t x, std::size_t y) const { return dist_[x * n_ + y]; }
  std::span<const double> dist_row(std::size_t x) const {
    return {dist_.data() + x * n_, n_};
  }
  std::span<const double> dist_matrix() const { return dist_; }
  std::span<const double> measure() const { return measure_; }
  double measure(std::size_t x) const { return measure_[x]; }
  std::span<const Neighbor> neighbors(std::size_t x) const { return adjacency_[x]; }

  /// Points ordered by increasing distance from x (x first, ties by index).
  std::span<const std::uint32_t> by_distance(std::size_t x) const {
    return {order_.data() + x * n_, n_};
  }

  double mesh_h() const { return mesh_h_; }
  double midpoint_defect() const { return midpoint_defect_; }
  double diameter() const { return diameter_; }
  std::uint64_t id() const { return id_; }
  const SpaceMeta& meta() const { return meta_; }

  /// Undirected generating edges (i < j), sorted.
  std::vector<Edge> edges() const;

  void check_index(std::size_t x) const;

 private:
  friend MeasuredSpace build_from_graph(std::size_t, std::span<const Edge>,
                                        std::span<const double>, SpaceMeta);

  std::size_t n_ = 0;
  std::vector<double> dist_;
  std::vector<double> measure_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<std::uint32_t> order_;
  double mesh_h_ = 0.0;
  double midpoint_defect_ = 0.0;
  double diameter_ = 0.0;
  std::uint64_t id_ = 0;
  SpaceMeta meta_;
};

/// A real value per point, bound to the space it was built for.
struct ScalarField {
  std::vector<double> values;
  std::uint64_t space_id = 0;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

/// Binds raw values to `space`. Throws if the length is wrong or any value
/// is not finite.
ScalarField make_field(const MeasuredSpace& space, std::vector<double> values);
ScalarField constant_field(const MeasuredSpace& space, double c);
void check_binding(const MeasuredSpace& space, const ScalarField& f);

/// Builds the shortest-path metric of a connected graph with positive edge
/// lengths. Weights are normalized to a probability measure. Mesh radius and
/// midpoint defect are computed exhaustively.
MeasuredSpace build_from_graph(std::size_t n, std::span<const Edge> edges,
                               std::span<const double> weights, SpaceMeta meta = {});

struct MetricReport {
  double triangle_violation = 0.0;  // max d(x,z) - d(x,y) - d(y,z), clamped at 0
  double symmetry_defect = 0.0;     // max |d(x,y) - d(y,x)|
  double diagonal_defect = 0.0;     // max |d(x,x)|, or 1 if some d(x,y) = 0 with x != y
  double negativity = 0.0;          // max of -d(x,y) and -nu(x), clamped at 0
  double measure_sum_defect = 0.0;  // |sum nu - 1|
  double tolerance = 1e-9;
  bool pass = true;
};

MetricReport validate_metric(const MeasuredSpace& space);
MetricReport validate_metric(std::size_t n, std::span<const double> dist,
                             std::span<const double> measure);

/// Closed ball { y : d(center, y) <= radius }, ascending indices.
std::vector<std::size_t> ball(const MeasuredSpace& space, std::size_t center,
                              double radius);
double ball_measure(const MeasuredSpace& space, std::size_t center, double radius);

/// sup over centers x and radii r on a linear grid of r_steps points in
/// [r_min, r_max] of nu(B_2r(x)) / nu(B_r(x)).
double doubling_constant(const MeasuredSpace& space, double r_min, double r_max,
                         std::size_t r_steps);

/// Per-field (1,1) Poincare certificate: max over centers x of
///   avg_{B_r(x)} |h - h_B|  /  (r * avg_{B_{lambda r}(x)} |grad h|),
/// with 0/0 taken as 0 and c/0 (c > 0) as +infinity.
double local_poincare_constant(const MeasuredSpace& space, const ScalarField& field,
                               double radius, double dilation);

}  // namespace hopflax
