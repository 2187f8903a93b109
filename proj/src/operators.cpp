#include "morrey/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace morrey {

namespace {

double norm_sum(const Point& x, std::span<const Point> ys, int n) {
  double s = 0.0;
  for (const auto& y : ys) s += std::sqrt(squared_distance(x, y, n));
  return s;
}

void check_inputs(int m, int n, std::span<const GridFunction> fs) {
  if (static_cast<int>(fs.size()) != m)
    throw std::invalid_argument(fmt::format("operator takes {} functions, got {}", m, fs.size()));
  for (const auto& f : fs)
    if (!(f.lattice() == fs[0].lattice()))
      throw std::invalid_argument("operator inputs live on different lattices");
  if (fs[0].lattice().dim() != n)
    throw std::invalid_argument("kernel and lattice dimensions differ");
}

// Inclusive index span of the nonzero values, or {1, 0} when f vanishes.
std::pair<int, int> support_1d(const GridFunction& f) {
  int lo = 0, hi = static_cast<int>(f.size()) - 1;
  while (lo <= hi && f[lo] == 0.0) ++lo;
  while (hi >= lo && f[hi] == 0.0) --hi;
  return {lo, hi};
}

// Translation-invariant bilinear sum in n = 1. For each offset e1 = i - j1 the
// kernel row over e2 is built once and reused for every output node.
std::vector<double> bilinear_rows(const std::function<double(double, double)>& k,
                                  const GridFunction& f1, const GridFunction& f2, double cutoff2) {
  const Lattice& lat = f1.lattice();
  const int N = lat.points_per_axis();
  const double h = lat.spacing();
  std::vector<double> out(N, 0.0);
  auto [lo1, hi1] = support_1d(f1);
  auto [lo2, hi2] = support_1d(f2);
  if (lo1 > hi1 || lo2 > hi2) return out;

  const auto a = f1.values();
  const auto b = f2.values();
  const int len = hi2 - lo2 + 1;
  // rrow[k - kmin] = K(e1 h, -k h), k = j2 - i
  const int kmin = lo2 - (N - 1);
  const int kmax = hi2;
  std::vector<double> rrow(kmax - kmin + 1);
  for (int e1 = -hi1; e1 <= N - 1 - lo1; ++e1) {
    const double u = e1 * h;
    for (int kk = kmin; kk <= kmax; ++kk) {
      const double v = -kk * h;
      rrow[kk - kmin] = (u * u + v * v <= cutoff2) ? 0.0 : k(u, v);
    }
    const int ilo = std::max(0, lo1 + e1);
    const int ihi = std::min(N - 1, hi1 + e1);
    for (int i = ilo; i <= ihi; ++i) {
      const double c = a[i - e1];
      if (c == 0.0) continue;
      const double* r = rrow.data() + (lo2 - i - kmin);
      const double* g = b.data() + lo2;
      double s = 0.0;
#pragma omp simd reduction(+ : s)
      for (int t = 0; t < len; ++t) s += r[t] * g[t];
      out[i] += c * s;
    }
  }
  const double cell2 = h * h;
  for (auto& v : out) v *= cell2;
  return out;
}

// Any m, n: for every output node, an odometer over the supports of the f_i.
std::vector<double> generic_sum(const std::function<double(const Point&, std::span<const Point>)>& k,
                                std::span<const GridFunction> fs, double cutoff2) {
  const Lattice& lat = fs[0].lattice();
  const int n = lat.dim();
  const std::size_t m = fs.size();
  std::vector<std::vector<std::size_t>> supp(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < fs[i].size(); ++j)
      if (fs[i][j] != 0.0) supp[i].push_back(j);
  std::vector<double> out(lat.size(), 0.0);
  for (const auto& s : supp)
    if (s.empty()) return out;

  std::vector<std::vector<Point>> pts(m);
  for (std::size_t i = 0; i < m; ++i)
    for (auto j : supp[i]) pts[i].push_back(lat.point(j));

  std::vector<Point> ys(m);
  std::vector<std::size_t> slot(m);
  for (std::size_t xi = 0; xi < lat.size(); ++xi) {
    const Point x = lat.point(xi);
    std::fill(slot.begin(), slot.end(), 0);
    double acc = 0.0;
    while (true) {
      double d2 = 0.0, prod = 1.0;
      for (std::size_t i = 0; i < m; ++i) {
        ys[i] = pts[i][slot[i]];
        d2 += squared_distance(x, ys[i], n);
        prod *= fs[i][supp[i][slot[i]]];
      }
      if (d2 > cutoff2) acc += k(x, ys) * prod;
      std::size_t i = m;
      while (i > 0 && slot[i - 1] + 1 == supp[i - 1].size()) slot[--i] = 0;
      if (i == 0) break;
      ++slot[i - 1];
    }
    out[xi] = acc;
  }
  const double w = std::pow(lat.cell_volume(), static_cast<double>(m));
  for (auto& v : out) v *= w;
  return out;
}

std::vector<double> kernel_sum(const KernelSpec& k, std::span<const GridFunction> fs, double cutoff2) {
  if (k.difference && k.m == 2 && k.n == 1) return bilinear_rows(k.difference, fs[0], fs[1], cutoff2);
  return generic_sum(k.evaluate, fs, cutoff2);
}

}  // namespace

KernelSpec KernelSpec::homogeneous_odd() {
  KernelSpec k;
  k.tag = KernelTag::HomogeneousOdd;
  k.name = "homogeneous-odd";
  k.m = 2;
  k.n = 1;
  k.size_constant = 38.0;  // regularity sup ~37.1 exceeds the size sup 2 sqrt 2
  k.epsilon = 1.0;
  k.difference = [](double u, double v) {
    const double r2 = u * u + v * v;
    return (u + v) / (r2 * std::sqrt(r2));
  };
  k.evaluate = [d = k.difference](const Point& x, std::span<const Point> ys) {
    return d(x[0] - ys[0][0], x[0] - ys[1][0]);
  };
  return k;
}

KernelSpec KernelSpec::fractional_size(int m, int n) {
  KernelSpec k;
  k.tag = KernelTag::FractionalSize;
  k.name = "fractional-size";
  k.m = m;
  k.n = n;
  k.size_constant = 25.0;  // regularity sup ~23.9 in n = 1, m = 2
  k.epsilon = 1.0;
  const double e = -static_cast<double>(m * n);
  k.evaluate = [n, e](const Point& x, std::span<const Point> ys) { return std::pow(norm_sum(x, ys, n), e); };
  if (m == 2 && n == 1)
    k.difference = [](double u, double v) {
      const double s = std::abs(u) + std::abs(v);
      return 1.0 / (s * s);
    };
  return k;
}

KernelSpec KernelSpec::jump_angular() {
  KernelSpec k;
  k.tag = KernelTag::JumpAngular;
  k.name = "jump-angular";
  k.m = 2;
  k.n = 1;
  k.size_constant = 38.0;
  k.epsilon = 1.0;
  k.difference = [](double u, double v) {
    const double s = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    return s / (u * u + v * v);
  };
  k.evaluate = [d = k.difference](const Point& x, std::span<const Point> ys) {
    return d(x[0] - ys[0][0], x[0] - ys[1][0]);
  };
  return k;
}

KernelSpec KernelSpec::zero(int m, int n) {
  KernelSpec k;
  k.tag = KernelTag::Zero;
  k.name = "zero";
  k.m = m;
  k.n = n;
  k.size_constant = 1.0;
  k.evaluate = [](const Point&, std::span<const Point>) { return 0.0; };
  return k;
}

KernelSpec fractional_kernel(const FractionalParams& fp) {
  KernelSpec k;
  k.tag = KernelTag::Custom;
  k.name = fmt::format("riesz-{}", fp.alpha());
  k.m = fp.degree();
  k.n = fp.dim();
  k.size_constant = std::numeric_limits<double>::infinity();
  k.epsilon = 1.0;
  const double half = (fp.alpha() - k.m * k.n) / 2.0;
  const int n = k.n;
  k.evaluate = [half, n](const Point& x, std::span<const Point> ys) {
    double d2 = 0.0;
    for (const auto& y : ys) d2 += squared_distance(x, y, n);
    return std::pow(d2, half);
  };
  if (k.m == 2 && k.n == 1) k.difference = [half](double u, double v) { return std::pow(u * u + v * v, half); };
  return k;
}

GridFunction apply_czo(const KernelSpec& kernel, std::span<const GridFunction> fs,
                       const TruncationPolicy& trunc) {
  check_inputs(kernel.m, kernel.n, fs);
  const Lattice& lat = fs[0].lattice();
  const double h = lat.spacing();
  if (!(trunc.delta >= h * (1 - 1e-12)))
    throw std::invalid_argument(fmt::format("truncation radius {} is below the spacing {}", trunc.delta, h));
  const double cutoff2 = trunc.delta * trunc.delta + 1e-9 * h * h;
  return GridFunction(lat, kernel_sum(kernel, fs, cutoff2));
}

GridFunction apply_fractional(const FractionalParams& fp, std::span<const GridFunction> fs, SingularCell rule) {
  const KernelSpec k = fractional_kernel(fp);
  check_inputs(k.m, k.n, fs);
  const Lattice& lat = fs[0].lattice();
  const double h = lat.spacing();
  auto out = kernel_sum(k, fs, 0.25 * h * h);
  if (rule == SingularCell::Integrate) {
    const int mn = k.m * k.n;
    const double cell = std::pow(h, fp.alpha()) * cube_power_integral(mn, fp.alpha() - mn);
    for (std::size_t i = 0; i < out.size(); ++i) {
      double prod = 1.0;
      for (const auto& f : fs) prod *= f[i];
      out[i] += prod * cell;
    }
  }
  return GridFunction(lat, std::move(out));
}

double tail_majorant(std::span<const GridFunction> fs, const Ball& ball, int annuli, const TailMode& mode) {
  if (annuli < 1) throw std::invalid_argument("tail majorant needs at least one annulus");
  if (fs.empty()) throw std::invalid_argument("tail majorant needs input functions");
  const int n = fs[0].lattice().dim();
  const double m = static_cast<double>(fs.size());
  const double theta = mode.fractional ? 1.0 - mode.alpha / (m * n) : 1.0;
  std::vector<GridFunction> absf;
  for (const auto& f : fs) absf.push_back(f.abs());
  double total = 0.0;
  for (int j = 1; j <= annuli; ++j) {
    const Ball big = ball.scaled(std::ldexp(1.0, j + 1));
    const double vol = std::pow(ball_volume(big.radius, n), theta);
    double term = 1.0;
    for (const auto& f : absf) term *= integrate(f, big) / vol;
    total += term;
  }
  return total;
}

KernelClassReport verify_kernel_class(const KernelSpec& kernel, const SamplingPlan& plan) {
  const int m = kernel.m, n = kernel.n;
  const double mn = m * n;
  const double eps = kernel.epsilon;
  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto random_point = [&] {
    Point p{};
    for (int k = 0; k < n; ++k) p[k] = box(rng);
    return p;
  };
  // length at most `bound`: uniform half the time, log-uniform over six decades otherwise
  auto random_shift = [&](double bound) {
    Point d{};
    double norm = 0.0;
    while (norm == 0.0) {
      norm = 0.0;
      for (int k = 0; k < n; ++k) {
        d[k] = gauss(rng);
        norm += d[k] * d[k];
      }
      norm = std::sqrt(norm);
    }
    const double frac = unit(rng) < 0.5 ? 1.0 - unit(rng) : std::pow(10.0, -6.0 * unit(rng));
    const double t = bound * frac;
    for (int k = 0; k < n; ++k) d[k] *= t / norm;
    return std::pair{d, t};
  };
  auto shifted = [n](const Point& p, const Point& d) {
    Point q = p;
    for (int k = 0; k < n; ++k) q[k] += d[k];
    return q;
  };

  KernelClassReport r;
  r.regularity_y.assign(m, 0.0);
  std::vector<Point> ys(m), ys2(m);
  for (int s = 0; s < plan.samples; ++s) {
    const Point x = random_point();
    for (auto& y : ys) y = random_point();
    const double S = norm_sum(x, ys, n);
    double M = 0.0;
    for (const auto& y : ys) M = std::max(M, std::sqrt(squared_distance(x, y, n)));
    if (!(S > 1e-12)) {
      ++r.skipped;
      continue;
    }
    ++r.tuples;
    const double k0 = kernel.evaluate(x, ys);
    r.size = std::max(r.size, std::abs(k0) * std::pow(S, mn));

    auto [dx, tx] = random_shift(0.5 * M);
    const double kx = kernel.evaluate(shifted(x, dx), ys);
    r.regularity_x = std::max(r.regularity_x, std::abs(k0 - kx) * std::pow(S, mn + eps) / std::pow(tx, eps));

    for (int i = 0; i < m; ++i) {
      auto [dy, ty] = random_shift(0.5 * M);
      ys2 = ys;
      ys2[i] = shifted(ys[i], dy);
      const double ky = kernel.evaluate(x, ys2);
      r.regularity_y[i] =
          std::max(r.regularity_y[i], std::abs(k0 - ky) * std::pow(S, mn + eps) / std::pow(ty, eps));
    }
  }
  const double bound = kernel.size_constant * (1.0 + plan.slack);
  r.size_ok = r.size <= bound;
  r.regularity_ok = r.regularity_x <= bound &&
                    std::all_of(r.regularity_y.begin(), r.regularity_y.end(), [&](double v) { return v <= bound; });
  return r;
}

}  // namespace morrey
