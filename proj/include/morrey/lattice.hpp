#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace morrey {

inline constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;
using Index = std::array<int, kMaxDim>;

double squared_distance(const Point& a, const Point& b, int dim);

// Uniform sampling of the cube [-L, L]^n with N points per axis. N is odd so
// the origin is a node.
class Lattice {
 public:
  Lattice(int dim, double half_width, int points_per_axis);

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int points_per_axis() const { return points_; }
  double spacing() const { return spacing_; }
  double cell_volume() const { return cell_volume_; }
  std::size_t size() const { return size_; }
  int origin_axis_index() const { return (points_ - 1) / 2; }
  std::size_t origin_index() const;

  // Measured from the origin node so that the origin and mirrored nodes are exact.
  double coordinate(int axis_index) const { return (axis_index - origin_axis_index()) * spacing_; }
  Point point(std::size_t flat) const;
  Index unflatten(std::size_t flat) const;
  std::size_t flatten(const Index& idx) const;

  // Inclusive axis-index range covering every node with coordinate in
  // (lo, hi), clamped to the lattice; may include the endpoints themselves.
  // Empty when first > second.
  std::pair<int, int> axis_range(double lo, double hi) const;

  bool operator==(const Lattice& other) const;

 private:
  int dim_;
  double half_width_;
  int points_;
  double spacing_;
  double cell_volume_;
  std::size_t size_;
};

Lattice make_lattice(int dim, double half_width, int points_per_axis);

// Same domain, N -> 2N - 1: every old node survives and h halves.
Lattice refine(const Lattice& lattice);

struct Ball {
  Point center{};
  double radius = 1.0;

  Ball scaled(double factor) const { return Ball{center, radius * factor}; }
  bool contains(const Point& x, int dim) const;
};

// Exact Lebesgue measure of a ball in R^n.
double ball_volume(double radius, int dim);

// Calls fn(flat_index) for every node strictly inside the ball, in
// increasing flat order.
template <class Fn>
void for_each_node_in(const Lattice& lattice, const Ball& ball, Fn&& fn) {
  const int dim = lattice.dim();
  Index lo{}, hi{};
  for (int k = 0; k < dim; ++k) {
    auto [a, b] = lattice.axis_range(ball.center[k] - ball.radius, ball.center[k] + ball.radius);
    if (a > b) return;
    lo[k] = a;
    hi[k] = b;
  }
  const double r2 = ball.radius * ball.radius;
  // Nodes within rounding distance of the sphere count as on it (excluded).
  const double tol = 1e-9 * lattice.spacing() * lattice.spacing();
  Index idx = lo;
  while (true) {
    double d2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double d = lattice.coordinate(idx[k]) - ball.center[k];
      d2 += d * d;
    }
    if (d2 < r2 - tol) fn(lattice.flatten(idx));
    int k = dim - 1;
    while (k >= 0 && idx[k] == hi[k]) {
      idx[k] = lo[k];
      --k;
    }
    if (k < 0) break;
    ++idx[k];
  }
}

std::vector<std::size_t> nodes_in(const Lattice& lattice, const Ball& ball);

class GridFunction {
 public:
  GridFunction(Lattice lattice, std::vector<double> values);

  static GridFunction zeros(const Lattice& lattice);
  static GridFunction constant(const Lattice& lattice, double value);
  static GridFunction sample(const Lattice& lattice, const std::function<double(const Point&)>& fn);
  // Indicator of the box prod [lo_k, hi_k], each node weighted by the fraction
  // of its cell inside the box (endpoint nodes of an interval carry 1/2).
  static GridFunction box_indicator(const Lattice& lattice, std::span<const double> lo,
                                    std::span<const double> hi);

  const Lattice& lattice() const { return lattice_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  GridFunction abs() const;
  GridFunction pow(double exponent) const;
  GridFunction scaled(double factor) const;
  GridFunction map(const std::function<double(double)>& fn) const;
  GridFunction times(const GridFunction& other) const;
  GridFunction plus(const GridFunction& other) const;
  GridFunction minus(const GridFunction& other) const;

  bool is_zero() const;
  double max_abs() const;

 private:
  Lattice lattice_;
  std::vector<double> values_;
};

struct BallSum {
  double value = 0.0;
  std::size_t nodes = 0;
  bool empty() const { return nodes == 0; }
};

// Midpoint rule: h^n times the sum over nodes with |x - c| < r.
BallSum integrate_ball(const GridFunction& f, const Ball& ball);
double integrate(const GridFunction& f, const Ball& ball);
double integrate(const GridFunction& f);

struct Split {
  GridFunction near;  // f restricted to 2B
  GridFunction far;   // f - near
};

Split split_at_ball(const GridFunction& f, const Ball& ball);

struct BallFamilySpec {
  int center_stride = 1;                // centers on nodes whose offset from the origin is a multiple
  double r0 = 1.0;                      // smallest radius
  int count = 1;                        // radii r0 * 2^j, 0 <= j < count
  std::optional<double> center_extent;  // keep centers with max_k |c_k| <= extent
};

struct BallFamily {
  Lattice lattice;
  BallFamilySpec provenance;
  std::vector<Ball> balls;
};

BallFamily make_ball_family(const Lattice& lattice, const BallFamilySpec& spec);

// Finer family matching refine(lattice): half the smallest radius, one more
// radius level, same physical centers.
BallFamilySpec refine(const BallFamilySpec& spec);

}  // namespace morrey
