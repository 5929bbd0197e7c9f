#include "hopflax/transport.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

#include "hopflax/error.hpp"

namespace hopflax {

namespace {

constexpr double kMassTolerance = 1e-9;

void check_marginal(const MeasuredSpace& space, std::span<const double> mu, const char* name) {
  if (mu.size() != space.size()) {
    throw Error(std::string(name) + " has " + std::to_string(mu.size()) +
                " entries, expected " + std::to_string(space.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!std::isfinite(mu[i]) || mu[i] < 0.0) {
      throw Error(std::string(name) + " has a negative or non-finite entry at point " +
                  std::to_string(i));
    }
    sum += mu[i];
  }
  if (std::abs(sum - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg << name << " sums to " << sum << " (defect " << std::abs(sum - 1.0)
        << " exceeds " << kMassTolerance << ")";
    throw Error(msg.str());
  }
}

struct Support {
  std::vector<std::size_t> index;  // original point per support slot
  std::vector<double> mass;
};

Support support_of(std::span<const double> mu) {
  Support s;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] > 0.0) {
      s.index.push_back(i);
      s.mass.push_back(mu[i]);
    }
  }
  return s;
}

// Scales `target` so both supports carry the same total.
void balance(const Support& source, Support& target) {
  const double a = std::accumulate(source.mass.begin(), source.mass.end(), 0.0);
  const double b = std::accumulate(target.mass.begin(), target.mass.end(), 0.0);
  if (a != b) {
    for (auto& m : target.mass) m *= a / b;
  }
}

// Primal transportation simplex on an m x k dense cost matrix. The basis is
// a spanning tree on m row nodes and k column nodes.
class TransportationSimplex {
 public:
  TransportationSimplex(std::vector<double> supply, std::vector<double> demand,
                        std::vector<double> cost)
      : m_(supply.size()),
        k_(demand.size()),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        cost_(std::move(cost)),
        u_(m_),
        v_(k_),
        parent_(m_ + k_),
        parent_cell_(m_ + k_),
        depth_(m_ + k_),
        incident_(m_ + k_) {
    double max_cost = 0.0;
    for (double c : cost_) max_cost = std::max(max_cost, std::abs(c));
    eps_ = 1e-13 * std::max(max_cost, 1.0);
    block_ = std::max<std::size_t>(64, static_cast<std::size_t>(std::sqrt(double(m_ * k_))));
  }

  void solve() {
    northwest_corner();
    compute_potentials();
    std::size_t degenerate_run = 0;
    const std::size_t max_pivots = 50 * (m_ + k_) * (m_ + k_) + 1000;
    while (true) {
      const bool bland = degenerate_run > 2 * (m_ + k_);
      std::size_t entering = 0;
      if (!(bland ? price_bland(entering) : price_block(entering))) break;
      const double theta = pivot(entering, bland);
      degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
      compute_potentials();
      if (++pivots_ > max_pivots) throw Error("transport simplex exceeded its pivot budget");
    }
  }

  struct Cell {
    std::size_t row;
    std::size_t col;
    double flow;
  };

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<double>& row_potentials() const { return u_; }
  const std::vector<double>& col_potentials() const { return v_; }
  std::size_t pivots() const { return pivots_; }
  double cost(std::size_t r, std::size_t c) const { return cost_[r * k_ + c]; }

 private:
  std::size_t col_node(std::size_t c) const { return m_ + c; }
  std::size_t arc_of(std::size_t cell) const { return cells_[cell].row * k_ + cells_[cell].col; }

  void add_cell(std::size_t r, std::size_t c, double flow) {
    const std::size_t id = cells_.size();
    cells_.push_back({r, c, flow});
    incident_[r].push_back(id);
    incident_[col_node(c)].push_back(id);
  }

  void northwest_corner() {
    std::vector<double> ra = supply_;
    std::vector<double> rb = demand_;
    std::size_t i = 0;
    std::size_t j = 0;
    while (true) {
      const double x = std::min(ra[i], rb[j]);
      add_cell(i, j, x);
      ra[i] -= x;
      rb[j] -= x;
      if (i == m_ - 1 && j == k_ - 1) break;
      if (i == m_ - 1) {
        ++j;
      } else if (j == k_ - 1) {
        ++i;
      } else if (ra[i] <= rb[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void compute_potentials() {
    std::fill(depth_.begin(), depth_.end(), std::numeric_limits<std::size_t>::max());
    std::vector<std::size_t> stack{0};
    depth_[0] = 0;
    parent_[0] = 0;
    u_[0] = 0.0;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (auto id : incident_[node]) {
        const auto& cell = cells_[id];
        const std::size_t other = node < m_ ? col_node(cell.col) : cell.row;
        if (depth_[other] != std::numeric_limits<std::size_t>::max()) continue;
        depth_[other] = depth_[node] + 1;
        parent_[other] = node;
        parent_cell_[other] = id;
        if (other < m_) {
          u_[cell.row] = cost(cell.row, cell.col) - v_[cell.col];
        } else {
          v_[cell.col] = cost(cell.row, cell.col) - u_[cell.row];
        }
        stack.push_back(other);
      }
    }
  }

  double reduced(std::size_t arc) const {
    const std::size_t r = arc / k_;
    const std::size_t c = arc % k_;
    return cost_[arc] - u_[r] - v_[c];
  }

  bool price_block(std::size_t& entering) {
    const std::size_t arcs = m_ * k_;
    double best = -eps_;
    bool found = false;
    std::size_t scanned = 0;
    std::size_t a = next_arc_;
    for (std::size_t count = 0; count < arcs; ++count) {
      const double rc = reduced(a);
      if (rc < best) {
        best = rc;
        entering = a;
        found = true;
      }
      a = a + 1 == arcs ? 0 : a + 1;
      if (++scanned == block_) {
        if (found) break;
        scanned = 0;
      }
    }
    next_arc_ = a;
    return found;
  }

  bool price_bland(std::size_t& entering) {
    for (std::size_t a = 0; a < m_ * k_; ++a) {
      if (reduced(a) < -eps_) {
        entering = a;
        return true;
      }
    }
    return false;
  }

  // Returns the step length theta.
  double pivot(std::size_t arc, bool bland) {
    const std::size_t r = arc / k_;
    const std::size_t c = arc % k_;

    // Tree path col_node(c) -> ... -> r, cells in order.
    std::vector<std::size_t> from_col;
    std::vector<std::size_t> from_row;
    std::size_t a = col_node(c);
    std::size_t b = r;
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        from_col.push_back(parent_cell_[a]);
        a = parent_[a];
      } else {
        from_row.push_back(parent_cell_[b]);
        b = parent_[b];
      }
    }
    std::vector<std::size_t> path = std::move(from_col);
    path.insert(path.end(), from_row.rbegin(), from_row.rend());

    // Signs alternate -, +, -, ... starting at the cell touching column c.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving_pos = 0;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      const double f = cells_[path[p]].flow;
      // Bland's rule breaks ties by the arc index of the cell.
      const bool better =
          f < theta || (bland && f == theta && arc_of(path[p]) < arc_of(path[leaving_pos]));
      if (better) {
        theta = f;
        leaving_pos = p;
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t p = 0; p < path.size(); ++p) {
      cells_[path[p]].flow += (p % 2 == 0) ? -theta : theta;
    }
    const std::size_t leaving = path[leaving_pos];

    // Replace the leaving cell in place by the entering one.
    auto detach = [&](std::size_t node, std::size_t id) {
      auto& list = incident_[node];
      list.erase(std::find(list.begin(), list.end(), id));
    };
    detach(cells_[leaving].row, leaving);
    detach(col_node(cells_[leaving].col), leaving);
    cells_[leaving] = {r, c, theta};
    incident_[r].push_back(leaving);
    incident_[col_node(c)].push_back(leaving);
    return theta;
  }

  std::size_t m_;
  std::size_t k_;
  std::vector<double> supply_;
  std::vector<double> demand_;
  std::vector<double> cost_;
  std::vector<Cell> cells_;
  std::vector<double> u_;
  std::vector<double> v_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> parent_cell_;
  std::vector<std::size_t> depth_;
  std::vector<std::vector<std::size_t>> incident_;
  double eps_ = 0.0;
  std::size_t block_ = 64;
  std::size_t next_arc_ = 0;
  std::size_t pivots_ = 0;
};

std::vector<double> squared_costs(const MeasuredSpace& space, const Support& rows,
                                  const Support& cols) {
  std::vector<double> c(rows.index.size() * cols.index.size());
  for (std::size_t r = 0; r < rows.index.size(); ++r) {
    for (std::size_t k = 0; k < cols.index.size(); ++k) {
      const double d = space.dist(rows.index[r], cols.index[k]);
      c[r * cols.index.size() + k] = d * d;
    }
  }
  return c;
}

}  // namespace

std::vector<double> TransportPlan::dense() const {
  std::vector<double> out(n * n, 0.0);
  for (const auto& e : coupling) out[e.from * n + e.to] += e.mass;
  return out;
}

W2Result w2(const MeasuredSpace& space, std::span<const double> mu0,
            std::span<const double> mu1) {
  check_marginal(space, mu0, "mu0");
  check_marginal(space, mu1, "mu1");
  const Support rows = support_of(mu0);
  Support cols = support_of(mu1);
  balance(rows, cols);

  TransportationSimplex simplex(rows.mass, cols.mass, squared_costs(space, rows, cols));
  simplex.solve();

  W2Result result;
  auto& plan = result.plan;
  plan.n = space.size();
  plan.source_marginal.assign(mu0.begin(), mu0.end());
  plan.target_marginal.assign(mu1.begin(), mu1.end());
  plan.pivots = simplex.pivots();
  double primal = 0.0;
  for (const auto& cell : simplex.cells()) {
    const double mass = std::max(cell.flow, 0.0);
    if (mass == 0.0) continue;
    plan.coupling.push_back({rows.index[cell.row], cols.index[cell.col], mass});
    primal += mass * simplex.cost(cell.row, cell.col);
  }
  std::sort(plan.coupling.begin(), plan.coupling.end(), [](const auto& a, const auto& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });

  const auto& u = simplex.row_potentials();
  const auto& v = simplex.col_potentials();
  double dual = 0.0;
  for (std::size_t r = 0; r < rows.mass.size(); ++r) dual += rows.mass[r] * u[r];
  for (std::size_t c = 0; c < cols.mass.size(); ++c) dual += cols.mass[c] * v[c];
  double infeasibility = 0.0;
  for (std::size_t r = 0; r < rows.mass.size(); ++r) {
    for (std::size_t c = 0; c < cols.mass.size(); ++c) {
      infeasibility = std::max(infeasibility, u[r] + v[c] - simplex.cost(r, c));
    }
  }
  const double total = std::accumulate(rows.mass.begin(), rows.mass.end(), 0.0);
  plan.cost = std::max(primal, 0.0);
  plan.duality_gap = std::abs(primal - dual) + infeasibility * total;
  result.distance = std::sqrt(plan.cost);
  return result;
}

double w2_oracle_1d(const MeasuredSpace& space, std::span<const double> mu0,
                    std::span<const double> mu1) {
  check_marginal(space, mu0, "mu0");
  check_marginal(space, mu1, "mu1");
  const std::size_t n = space.size();
  if (n == 1) return 0.0;
  std::size_t edge_count = 0;
  std::size_t endpoint = n;
  for (std::size_t x = 0; x < n; ++x) {
    const auto deg = space.neighbors(x).size();
    if (deg > 2) throw Unsupported("1-D transport oracle needs a path graph");
    if (deg == 1 && endpoint == n) endpoint = x;
    edge_count += deg;
  }
  if (edge_count != 2 * (n - 1) || endpoint == n) {
    throw Unsupported("1-D transport oracle needs a path graph");
  }

  // Along a path, the distance from one end is a monotone coordinate.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return space.dist(endpoint, a) < space.dist(endpoint, b);
  });

  Support a;
  Support b;
  for (auto x : order) {
    if (mu0[x] > 0.0) {
      a.index.push_back(x);
      a.mass.push_back(mu0[x]);
    }
    if (mu1[x] > 0.0) {
      b.index.push_back(x);
      b.mass.push_back(mu1[x]);
    }
  }
  balance(a, b);

  // Merge the two cumulative distributions; between consecutive breakpoints
  // both quantile functions are constant.
  double cost = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  double cum_a = a.mass[0];
  double cum_b = b.mass[0];
  double level = 0.0;
  while (i < a.mass.size() && j < b.mass.size()) {
    const double next = std::min(cum_a, cum_b);
    const double d = space.dist(a.index[i], b.index[j]);
    cost += std::max(next - level, 0.0) * d * d;
    level = next;
    const bool advance_a = cum_a <= cum_b;
    const bool advance_b = cum_b <= cum_a;
    if (advance_a && ++i < a.mass.size()) cum_a += a.mass[i];
    if (advance_b && ++j < b.mass.size()) cum_b += b.mass[j];
  }
  return std::sqrt(cost);
}

double brute_force_w2(const MeasuredSpace& space, std::span<const double> mu0,
                      std::span<const double> mu1) {
  if (space.size() > 4) throw Unsupported("brute-force transport is limited to n <= 4");
  check_marginal(space, mu0, "mu0");
  check_marginal(space, mu1, "mu1");
  const Support rows = support_of(mu0);
  Support cols = support_of(mu1);
  balance(rows, cols);
  const std::size_t m = rows.mass.size();
  const std::size_t k = cols.mass.size();
  const std::size_t cells = m * k;
  const std::size_t basis_size = m + k - 1;
  const auto cost = squared_costs(space, rows, cols);

  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << cells); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != basis_size) continue;
    // A basis is a spanning tree; solve it by peeling leaves.
    std::vector<double> residual(m + k);
    for (std::size_t r = 0; r < m; ++r) residual[r] = rows.mass[r];
    for (std::size_t c = 0; c < k; ++c) residual[m + c] = cols.mass[c];
    std::vector<bool> open(cells, false);
    for (std::size_t e = 0; e < cells; ++e) open[e] = (mask >> e) & 1u;
    std::vector<double> flow(cells, 0.0);
    std::size_t remaining = basis_size;
    bool progress = true;
    while (remaining > 0 && progress) {
      progress = false;
      for (std::size_t node = 0; node < m + k && remaining > 0; ++node) {
        std::size_t degree = 0;
        std::size_t last = 0;
        for (std::size_t e = 0; e < cells; ++e) {
          if (!open[e]) continue;
          const bool touches = node < m ? e / k == node : e % k == node - m;
          if (touches) {
            ++degree;
            last = e;
          }
        }
        if (degree != 1) continue;
        flow[last] = residual[node];
        residual[last / k] -= flow[last];
        residual[m + last % k] -= flow[last];
        open[last] = false;
        --remaining;
        progress = true;
      }
    }
    if (remaining > 0) continue;  // cells contain a cycle
    bool feasible = true;
    double total = 0.0;
    for (std::size_t e = 0; e < cells; ++e) {
      if (flow[e] < -1e-12) feasible = false;
      total += std::max(flow[e], 0.0) * cost[e];
    }
    for (double r : residual) feasible = feasible && std::abs(r) <= 1e-12;
    if (feasible) best = std::min(best, total);
  }
  return std::sqrt(std::max(best, 0.0));
}

PlanCheck check_plan(const MeasuredSpace& space, const TransportPlan& plan) {
  PlanCheck check;
  const std::size_t n = plan.n;
  std::vector<double> rows(n, 0.0);
  std::vector<double> cols(n, 0.0);
  double cost = 0.0;
  for (const auto& e : plan.coupling) {
    rows[e.from] += e.mass;
    cols[e.to] += e.mass;
    check.min_entry = std::min(check.min_entry, e.mass);
    const double d = space.dist(e.from, e.to);
    cost += e.mass * d * d;
  }
  for (std::size_t i = 0; i < n; ++i) {
    check.marginal_defect = std::max({check.marginal_defect,
                                      std::abs(rows[i] - plan.source_marginal[i]),
                                      std::abs(cols[i] - plan.target_marginal[i])});
  }
  check.cost_defect = std::abs(cost - plan.cost) / std::max(plan.cost, 1e-300);
  if (plan.cost == 0.0) check.cost_defect = cost;
  return check;
}

}  // namespace hopflax
