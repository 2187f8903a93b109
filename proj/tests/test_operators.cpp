#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "morrey/operators.hpp"

using namespace morrey;

namespace {

GridFunction bump(const Lattice& lat, double c, double s) {
  return GridFunction::sample(lat, [&](const Point& x) {
    const double t = (x[0] - c) / s;
    return std::abs(t) < 1.0 ? std::pow(1.0 - t * t, 3) : 0.0;
  });
}

GridFunction random_function(const Lattice& lat, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return GridFunction::sample(lat, [&](const Point&) { return u(rng); });
}

// Straight double loop over node pairs, written without the library's sums.
std::vector<double> dense_oracle(const std::function<double(double, double)>& k, const GridFunction& f1,
                                 const GridFunction& f2, double cutoff, double singular) {
  const Lattice& lat = f1.lattice();
  const double h = lat.spacing();
  const int N = lat.points_per_axis();
  std::vector<double> out(N, 0.0);
  for (int i = 0; i < N; ++i) {
    const double x = lat.coordinate(i);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        const double u = x - lat.coordinate(a), v = x - lat.coordinate(b);
        if (std::hypot(u, v) <= cutoff) continue;
        out[i] += k(u, v) * f1[a] * f2[b] * h * h;
      }
    out[i] += singular * f1[i] * f2[i];
  }
  return out;
}

double rel_err(std::span<const double> a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

// 8/a * int_0^{pi/4} (2 cos t)^{-a} dt: the unit-square integral of |z|^{a-2}
double square_singular_constant(double alpha) {
  const int n = 20000;
  const double top = std::numbers::pi / 4;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::pow(2 * std::cos(top * i / n), -alpha);
  }
  return 8.0 / alpha * s * top / (3.0 * n);
}

}  // namespace

TEST_CASE("czo agrees with the dense oracle") {
  auto lat = make_lattice(1, 2.0, 33);
  std::mt19937_64 rng(5);
  const std::vector<GridFunction> fs{random_function(lat, rng), random_function(lat, rng)};
  for (double dmul : {1.0, 2.0, 4.0}) {
    const TruncationPolicy tr{dmul * lat.spacing()};
    for (auto k : {KernelSpec::homogeneous_odd(), KernelSpec::fractional_size(2, 1), KernelSpec::jump_angular()}) {
      auto fast = apply_czo(k, fs, tr);
      auto oracle = dense_oracle(k.difference, fs[0], fs[1], tr.delta * (1 + 1e-9), 0.0);
      CHECK(rel_err(fast.values(), oracle) <= 1e-10);
      // the generic odometer path gives the same sums
      auto generic = k;
      generic.difference = nullptr;
      CHECK(rel_err(apply_czo(generic, fs, tr).values(), oracle) <= 1e-10);
    }
  }
}

TEST_CASE("fractional agrees with the dense oracle") {
  auto lat = make_lattice(1, 2.0, 33);
  std::mt19937_64 rng(9);
  const std::vector<GridFunction> fs{random_function(lat, rng), random_function(lat, rng)};
  const double h = lat.spacing();
  for (double alpha : {0.5, 1.0, 1.5}) {
    FractionalParams fp(alpha, ExponentVector({1.2, 1.2}), 1);
    auto k = [alpha](double u, double v) { return std::pow(u * u + v * v, (alpha - 2) / 2); };
    auto skip = apply_fractional(fp, fs, SingularCell::Skip);
    CHECK(rel_err(skip.values(), dense_oracle(k, fs[0], fs[1], h / 2, 0.0)) <= 1e-10);
    auto cell = apply_fractional(fp, fs, SingularCell::Integrate);
    const double c = std::pow(h, alpha) * square_singular_constant(alpha);
    CHECK(rel_err(cell.values(), dense_oracle(k, fs[0], fs[1], h / 2, c)) <= 1e-10);
  }
}

TEST_CASE("generic path in two dimensions") {
  auto lat = make_lattice(2, 1.0, 7);
  std::mt19937_64 rng(2);
  const std::vector<GridFunction> fs{random_function(lat, rng), random_function(lat, rng)};
  auto k = KernelSpec::fractional_size(2, 2);
  const TruncationPolicy tr{lat.spacing()};
  auto out = apply_czo(k, fs, tr);
  const double h2 = lat.cell_volume();
  for (std::size_t xi = 0; xi < lat.size(); xi += 5) {
    const Point x = lat.point(xi);
    double s = 0.0;
    for (std::size_t a = 0; a < lat.size(); ++a)
      for (std::size_t b = 0; b < lat.size(); ++b) {
        const Point ya = lat.point(a), yb = lat.point(b);
        const double da = std::hypot(x[0] - ya[0], x[1] - ya[1]);
        const double db = std::hypot(x[0] - yb[0], x[1] - yb[1]);
        if (std::sqrt(da * da + db * db) <= tr.delta * (1 + 1e-9)) continue;
        s += std::pow(da + db, -4.0) * fs[0][a] * fs[1][b] * h2 * h2;
      }
    CHECK(out[xi] == doctest::Approx(s).epsilon(1e-10));
  }
}

TEST_CASE("odd kernel cancels at the origin for even inputs") {
  auto lat = make_lattice(1, 2.0, 65);
  const std::vector<GridFunction> fs{bump(lat, 0.0, 0.8), bump(lat, 0.0, 0.5)};
  auto out = apply_czo(KernelSpec::homogeneous_odd(), fs, TruncationPolicy::grid_default(lat));
  CHECK(std::abs(out[lat.origin_index()]) <= 1e-12 * out.max_abs());
}

TEST_CASE("multilinearity and vanishing inputs") {
  auto lat = make_lattice(1, 2.0, 65);
  std::mt19937_64 rng(4);
  auto f1 = random_function(lat, rng), f2 = random_function(lat, rng);
  const auto k = KernelSpec::homogeneous_odd();
  const auto tr = TruncationPolicy::grid_default(lat);
  const std::vector<GridFunction> base{f1, f2}, scaled{f1.scaled(2.5), f2};
  auto a = apply_czo(k, base, tr), b = apply_czo(k, scaled, tr);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(2.5 * a[i]).epsilon(1e-14));

  FractionalParams fp(0.5, ExponentVector({2.0, 2.0}), 1);
  const std::vector<GridFunction> zero{f1, GridFunction::zeros(lat)};
  CHECK(apply_fractional(fp, zero).is_zero());
  CHECK(apply_czo(k, zero, tr).is_zero());
  CHECK_THROWS(apply_czo(k, std::vector<GridFunction>{f1, GridFunction::zeros(make_lattice(1, 1.0, 65))}, tr));
  CHECK_THROWS(apply_czo(k, base, TruncationPolicy{lat.spacing() / 2}));
}

TEST_CASE("fractional closed form at the origin") {
  auto lat = make_lattice(1, 2.0, 129);
  const double lo[] = {0.0}, hi[] = {1.0};
  auto chi = GridFunction::box_indicator(lat, lo, hi);
  FractionalParams fp(1.0, ExponentVector({1.5, 1.5}), 1);
  const std::vector<GridFunction> fs{chi, chi};
  const double exact = 2 * std::log(1 + std::sqrt(2.0));
  auto out = apply_fractional(fp, fs);
  CHECK(out[lat.origin_index()] == doctest::Approx(exact).epsilon(0.02));
  for (double v : out.values()) CHECK(v >= 0.0);
  auto skip = apply_fractional(fp, fs, SingularCell::Skip);
  CHECK(skip[lat.origin_index()] == doctest::Approx(exact).epsilon(0.02));
}

TEST_CASE("truncation convergence on smooth bumps") {
  auto lat = make_lattice(1, 4.0, 257);
  const double h = lat.spacing();
  for (double s : {0.5, 1.0, 1.5}) {
    const std::vector<GridFunction> fs{bump(lat, -0.3, s), bump(lat, 0.4, s)};
    auto a = apply_czo(KernelSpec::homogeneous_odd(), fs, TruncationPolicy{4 * h});
    auto b = apply_czo(KernelSpec::homogeneous_odd(), fs, TruncationPolicy{2 * h});
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      num += (a[i] - b[i]) * (a[i] - b[i]);
      den += b[i] * b[i];
    }
    CHECK(std::sqrt(num / den) <= 0.2);
  }
}

TEST_CASE("tail majorant") {
  auto lat = make_lattice(1, 8.0, 257);
  const Ball b{{0, 0, 0}, 1.0};
  const std::vector<GridFunction> zero{GridFunction::zeros(lat), GridFunction::zeros(lat)};
  CHECK(tail_majorant(zero, b, 3, TailMode::czo()) == 0.0);

  const std::vector<GridFunction> ones{GridFunction::constant(lat, 1.0), GridFunction::constant(lat, 1.0)};
  // average of 1 over 4B is 1 up to the boundary cell
  CHECK(tail_majorant(ones, b, 1, TailMode::czo()) == doctest::Approx(1.0).epsilon(2 * lat.spacing() / 4));

  auto f = bump(lat, 0.5, 2.0);
  const std::vector<GridFunction> fs{f, f.scaled(-1.0)};
  double prev = 0.0;
  for (int J = 1; J <= 4; ++J) {
    const double v = tail_majorant(fs, Ball{{0.25, 0, 0}, 0.25}, J, TailMode::fractional_order(0.5));
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("kernel class verification") {
  SamplingPlan plan;
  auto z = verify_kernel_class(KernelSpec::zero(2, 1), plan);
  CHECK(z.size == 0.0);
  CHECK(z.regularity_x == 0.0);
  CHECK(z.pass());

  auto fs = verify_kernel_class(KernelSpec::fractional_size(2, 1), plan);
  CHECK(fs.size == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fs.pass());

  auto odd = verify_kernel_class(KernelSpec::homogeneous_odd(), plan);
  CHECK(odd.pass());
  CHECK(odd.size <= 2 * std::sqrt(2.0) * (1 + 1e-12));
  CHECK(odd.size >= 2.7);

  auto jump = verify_kernel_class(KernelSpec::jump_angular(), plan);
  CHECK(jump.size_ok);
  CHECK_FALSE(jump.regularity_ok);
}

TEST_CASE("odd kernel size constant by angle sweep") {
  // |u+v| (|u|+|v|)^2 / (u^2+v^2)^{3/2} on the unit circle
  const auto k = KernelSpec::homogeneous_odd();
  double best = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double t = 2 * std::numbers::pi * i / 100000;
    const double u = std::cos(t), v = std::sin(t);
    const double s = std::abs(u) + std::abs(v);
    best = std::max(best, std::abs(k.difference(u, v)) * s * s);
  }
  CHECK(best == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-8));
}
