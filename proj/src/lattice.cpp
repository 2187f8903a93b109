#include "morrey/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace morrey {

double squared_distance(const Point& a, const Point& b, int dim) {
  double d2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return d2;
}

Lattice::Lattice(int dim, double half_width, int points_per_axis)
    : dim_(dim), half_width_(half_width), points_(points_per_axis) {
  if (dim < 1 || dim > kMaxDim)
    throw std::invalid_argument("lattice dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("lattice half-width must be positive");
  if (points_per_axis < 3 || points_per_axis % 2 == 0)
    throw std::invalid_argument("points per axis must be odd and >= 3, got " +
                                std::to_string(points_per_axis));
  spacing_ = 2.0 * half_width / (points_per_axis - 1);
  cell_volume_ = std::pow(spacing_, dim);
  size_ = 1;
  for (int k = 0; k < dim; ++k) size_ *= static_cast<std::size_t>(points_);
}

std::size_t Lattice::origin_index() const {
  Index idx{};
  idx.fill(origin_axis_index());
  return flatten(idx);
}

Point Lattice::point(std::size_t flat) const {
  const Index idx = unflatten(flat);
  Point p{};
  for (int k = 0; k < dim_; ++k) p[k] = coordinate(idx[k]);
  return p;
}

Index Lattice::unflatten(std::size_t flat) const {
  Index idx{};
  for (int k = dim_ - 1; k >= 0; --k) {
    idx[k] = static_cast<int>(flat % points_);
    flat /= points_;
  }
  return idx;
}

std::size_t Lattice::flatten(const Index& idx) const {
  std::size_t flat = 0;
  for (int k = 0; k < dim_; ++k) flat = flat * points_ + static_cast<std::size_t>(idx[k]);
  return flat;
}

std::pair<int, int> Lattice::axis_range(double lo, double hi) const {
  const double c = origin_axis_index();
  const double a = std::floor(lo / spacing_ + c);
  const double b = std::ceil(hi / spacing_ + c);
  const int first = static_cast<int>(std::max(a, 0.0));
  const int last = static_cast<int>(std::min(b, static_cast<double>(points_ - 1)));
  return {first, last};
}

bool Lattice::operator==(const Lattice& other) const {
  return dim_ == other.dim_ && half_width_ == other.half_width_ && points_ == other.points_;
}

Lattice make_lattice(int dim, double half_width, int points_per_axis) {
  return Lattice(dim, half_width, points_per_axis);
}

Lattice refine(const Lattice& lattice) {
  return Lattice(lattice.dim(), lattice.half_width(), 2 * lattice.points_per_axis() - 1);
}

bool Ball::contains(const Point& x, int dim) const {
  return squared_distance(x, center, dim) < radius * radius;
}

double ball_volume(double radius, int dim) {
  const double unit = std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0 + 1.0);
  return unit * std::pow(radius, dim);
}

std::vector<std::size_t> nodes_in(const Lattice& lattice, const Ball& ball) {
  std::vector<std::size_t> out;
  for_each_node_in(lattice, ball, [&](std::size_t i) { out.push_back(i); });
  return out;
}

GridFunction::GridFunction(Lattice lattice, std::vector<double> values)
    : lattice_(std::move(lattice)), values_(std::move(values)) {
  if (values_.size() != lattice_.size())
    throw std::invalid_argument("grid function needs one value per lattice point");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("grid function values must be finite");
}

GridFunction GridFunction::zeros(const Lattice& lattice) { return constant(lattice, 0.0); }

GridFunction GridFunction::constant(const Lattice& lattice, double value) {
  return GridFunction(lattice, std::vector<double>(lattice.size(), value));
}

GridFunction GridFunction::sample(const Lattice& lattice,
                                  const std::function<double(const Point&)>& fn) {
  std::vector<double> v(lattice.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(lattice.point(i));
  return GridFunction(lattice, std::move(v));
}

GridFunction GridFunction::box_indicator(const Lattice& lattice, std::span<const double> lo,
                                         std::span<const double> hi) {
  const int dim = lattice.dim();
  if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
    throw std::invalid_argument("box corners must have one coordinate per axis");
  const double h = lattice.spacing();
  auto overlap = [&](double x, int k) {
    const double a = std::max(x - h / 2, lo[k]);
    const double b = std::min(x + h / 2, hi[k]);
    return std::max(0.0, b - a) / h;
  };
  return sample(lattice, [&](const Point& x) {
    double frac = 1.0;
    for (int k = 0; k < dim; ++k) frac *= overlap(x[k], k);
    return frac;
  });
}

GridFunction GridFunction::map(const std::function<double(double)>& fn) const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), fn);
  return GridFunction(lattice_, std::move(v));
}

GridFunction GridFunction::abs() const {
  return map([](double v) { return std::abs(v); });
}

GridFunction GridFunction::pow(double exponent) const {
  return map([exponent](double v) { return std::pow(v, exponent); });
}

GridFunction GridFunction::scaled(double factor) const {
  return map([factor](double v) { return factor * v; });
}

namespace {

GridFunction combine(const GridFunction& a, const GridFunction& b, double (*op)(double, double)) {
  if (!(a.lattice() == b.lattice()))
    throw std::invalid_argument("grid functions live on different lattices");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i], b[i]);
  return GridFunction(a.lattice(), std::move(v));
}

}  // namespace

GridFunction GridFunction::times(const GridFunction& other) const {
  return combine(*this, other, [](double x, double y) { return x * y; });
}

GridFunction GridFunction::plus(const GridFunction& other) const {
  return combine(*this, other, [](double x, double y) { return x + y; });
}

GridFunction GridFunction::minus(const GridFunction& other) const {
  return combine(*this, other, [](double x, double y) { return x - y; });
}

bool GridFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

BallSum integrate_ball(const GridFunction& f, const Ball& ball) {
  BallSum sum;
  const auto vals = f.values();
  for_each_node_in(f.lattice(), ball, [&](std::size_t i) {
    sum.value += vals[i];
    ++sum.nodes;
  });
  sum.value *= f.lattice().cell_volume();
  return sum;
}

double integrate(const GridFunction& f, const Ball& ball) { return integrate_ball(f, ball).value; }

double integrate(const GridFunction& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.lattice().cell_volume();
}

Split split_at_ball(const GridFunction& f, const Ball& ball) {
  std::vector<double> near(f.size(), 0.0);
  const auto vals = f.values();
  for_each_node_in(f.lattice(), ball.scaled(2.0), [&](std::size_t i) { near[i] = vals[i]; });
  std::vector<double> far(f.size());
  for (std::size_t i = 0; i < far.size(); ++i) far[i] = vals[i] - near[i];
  return {GridFunction(f.lattice(), std::move(near)), GridFunction(f.lattice(), std::move(far))};
}

BallFamily make_ball_family(const Lattice& lattice, const BallFamilySpec& spec) {
  if (spec.count < 1) throw std::invalid_argument("ball family needs at least one radius");
  if (spec.center_stride < 1) throw std::invalid_argument("center stride must be positive");
  if (!(spec.r0 >= lattice.spacing() * (1.0 - 1e-12)))
    throw std::invalid_argument("smallest radius must be at least one lattice spacing");

  const int dim = lattice.dim();
  const int origin = lattice.origin_axis_index();
  std::vector<int> axis;
  for (int i = 0; i < lattice.points_per_axis(); ++i)
    if ((i - origin) % spec.center_stride == 0) axis.push_back(i);

  BallFamily family{lattice, spec, {}};
  Index slot{};
  while (true) {
    Index idx{};
    Point c{};
    bool keep = true;
    for (int k = 0; k < dim; ++k) {
      idx[k] = axis[slot[k]];
      c[k] = lattice.coordinate(idx[k]);
      if (spec.center_extent && std::abs(c[k]) > *spec.center_extent * (1 + 1e-12)) keep = false;
    }
    if (keep) {
      for (int j = 0; j < spec.count; ++j) {
        Ball b{c, spec.r0 * std::ldexp(1.0, j)};
        // The center is a node, so every ball meets the lattice.
        family.balls.push_back(b);
      }
    }
    int k = dim - 1;
    while (k >= 0 && slot[k] + 1 == static_cast<int>(axis.size())) {
      slot[k] = 0;
      --k;
    }
    if (k < 0) break;
    ++slot[k];
  }
  if (family.balls.empty()) throw std::invalid_argument("ball family is empty");
  return family;
}

BallFamilySpec refine(const BallFamilySpec& spec) {
  BallFamilySpec fine = spec;
  fine.center_stride = spec.center_stride * 2;
  fine.r0 = spec.r0 / 2;
  fine.count = spec.count + 1;
  return fine;
}

}  // namespace morrey
