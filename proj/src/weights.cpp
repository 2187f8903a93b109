#include "morrey/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

namespace morrey {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double gauss_cube(int dims, const std::function<double(double)>& radial_sq) {
  // Tensor Gauss-Legendre over [-1/2, 1/2]^dims of g(|z|^2).
  using Rule = boost::math::quadrature::gauss<double, 20>;
  std::function<double(int, double)> nest = [&](int left, double acc) -> double {
    if (left == 0) return radial_sq(acc);
    return Rule::integrate([&](double t) { return nest(left - 1, acc + t * t); }, -0.5, 0.5);
  };
  return nest(dims, 0.0);
}

// Node values of w^t; the origin node of a power weight carries the cell
// average (possibly +inf).
std::vector<double> node_powers(const Weight& w, double t, const Lattice& lattice) {
  std::vector<double> out(lattice.size());
  if (w.is_power()) {
    if (w.dim() != lattice.dim()) throw std::invalid_argument("weight and lattice dimensions differ");
    const double b = w.exponent() * t;
    const int n = lattice.dim();
    const std::size_t origin = lattice.origin_index();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (i == origin) {
        out[i] = std::pow(lattice.spacing(), b) * cube_power_integral(n, b);
        continue;
      }
      const Point x = lattice.point(i);
      out[i] = std::pow(std::sqrt(squared_distance(x, Point{}, n)), b);
    }
    return out;
  }
  const GridFunction& g = w.grid();
  if (!(g.lattice() == lattice)) throw std::invalid_argument("sampled weight lives on another lattice");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = t == 1.0 ? g[i] : std::pow(g[i], t);
  return out;
}

// Averages, measures and extremes of w^t over balls. Power weights in n = 1
// use closed forms for averages and measures; extremes always come from the
// node samples.
class Averager {
 public:
  Averager(const Weight& w, double t, const Lattice& lattice)
      : lattice_(lattice),
        closed_(w.is_power() && w.dim() == 1),
        exponent_(w.is_power() ? w.exponent() * t : 0.0),
        nodes_(node_powers(w, t, lattice)) {}

  // avg_B w^t, nullopt when the ball holds no node and no closed form exists.
  std::optional<double> average(const Ball& b) const {
    if (closed_) {
      return power_integral_1d(exponent_, b.center[0] - b.radius, b.center[0] + b.radius) /
             (2.0 * b.radius);
    }
    double s = 0.0;
    std::size_t k = 0;
    for_each_node_in(lattice_, b, [&](std::size_t i) {
      s += nodes_[i];
      ++k;
    });
    if (k == 0) return std::nullopt;
    return s / static_cast<double>(k);
  }

  std::optional<double> measure(const Ball& b) const {
    if (closed_) return power_integral_1d(exponent_, b.center[0] - b.radius, b.center[0] + b.radius);
    double s = 0.0;
    std::size_t k = 0;
    for_each_node_in(lattice_, b, [&](std::size_t i) {
      s += nodes_[i];
      ++k;
    });
    if (k == 0) return std::nullopt;
    return s * lattice_.cell_volume();
  }

  // |B| consistent with measure(): exact in closed form, node count otherwise.
  std::optional<double> volume(const Ball& b) const {
    if (closed_) return 2.0 * b.radius;
    std::size_t k = 0;
    for_each_node_in(lattice_, b, [&](std::size_t) { ++k; });
    if (k == 0) return std::nullopt;
    return static_cast<double>(k) * lattice_.cell_volume();
  }

  std::optional<double> node_min(const Ball& b) const { return extreme(b, false); }
  std::optional<double> node_max(const Ball& b) const { return extreme(b, true); }

  // avg_B log(w^t)
  std::optional<double> log_average(const Ball& b) const {
    if (closed_) {
      auto F = [](double x) { return x == 0.0 ? 0.0 : x * std::log(std::abs(x)) - x; };
      const double lo = b.center[0] - b.radius, hi = b.center[0] + b.radius;
      return exponent_ * (F(hi) - F(lo)) / (hi - lo);
    }
    double s = 0.0;
    std::size_t k = 0;
    for_each_node_in(lattice_, b, [&](std::size_t i) {
      s += std::log(nodes_[i]);
      ++k;
    });
    if (k == 0) return std::nullopt;
    return s / static_cast<double>(k);
  }

 private:
  std::optional<double> extreme(const Ball& b, bool want_max) const {
    std::optional<double> best;
    for_each_node_in(lattice_, b, [&](std::size_t i) {
      const double v = nodes_[i];
      if (!best || (want_max ? v > *best : v < *best)) best = v;
    });
    return best;
  }

  Lattice lattice_;
  bool closed_;
  double exponent_;
  std::vector<double> nodes_;
};

void warn_empty(EstimateReport& r, std::size_t skipped) {
  if (skipped > 0)
    r.warnings.push_back(fmt::format("{} ball(s) contain no lattice point and were skipped", skipped));
}

// (avg w^{-1/(p-1)})^{p-1}, or 1/min w when p = 1: the dual factor shared by
// the A_p style constants. `inner` is the exponent applied to w and `outer`
// the power applied to the average.
struct DualFactor {
  bool at_one;  // use node extreme of 1/w
  double outer;
  std::optional<Averager> avg;
  std::optional<Averager> raw;

  DualFactor(const Weight& w, bool use_min, double inner, double outer_power, const Lattice& lat)
      : at_one(use_min), outer(outer_power) {
    if (use_min)
      raw.emplace(w, 1.0, lat);
    else
      avg.emplace(w, inner, lat);
  }

  std::optional<double> operator()(const Ball& b) const {
    if (at_one) {
      auto m = raw->node_min(b);
      if (!m) return std::nullopt;
      return 1.0 / *m;
    }
    auto a = avg->average(b);
    if (!a) return std::nullopt;
    return std::pow(*a, outer);
  }
};

}  // namespace

Weight Weight::power(double exponent, int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("weight dimension out of range");
  if (!std::isfinite(exponent) || !(exponent > -dim))
    throw std::invalid_argument(
        fmt::format("power weight |x|^{} is not locally integrable in dimension {}", exponent, dim));
  return Weight(Power{exponent, dim});
}

Weight Weight::sampled(GridFunction values) {
  for (double v : values.values())
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("sampled weight values must be positive and finite");
  return Weight(std::move(values));
}

double Weight::exponent() const {
  if (!is_power()) throw std::logic_error("sampled weight has no exponent");
  return std::get<Power>(form_).exponent;
}

const GridFunction& Weight::grid() const {
  if (is_power()) throw std::logic_error("power weight has no sample grid");
  return std::get<GridFunction>(form_);
}

int Weight::dim() const {
  if (is_power()) return std::get<Power>(form_).dim;
  return std::get<GridFunction>(form_).lattice().dim();
}

std::string Weight::describe() const {
  if (is_power()) return fmt::format("|x|^{}", exponent());
  return fmt::format("sampled[{} nodes]", grid().size());
}

GridFunction sample(const Weight& w, const Lattice& lattice) {
  return GridFunction(lattice, node_powers(w, 1.0, lattice));
}

Weight weight_power(const Weight& w, double t) {
  if (w.is_power()) return Weight::power(w.exponent() * t, w.dim());
  return Weight::sampled(w.grid().pow(t));
}

double weight_measure(const Weight& w, const Ball& ball, const Lattice& lattice) {
  auto m = Averager(w, 1.0, lattice).measure(ball);
  return m.value_or(0.0);
}

std::vector<double> weight_measures(const Weight& w, const BallFamily& family) {
  const Averager avg(w, 1.0, family.lattice);
  std::vector<double> out;
  out.reserve(family.balls.size());
  for (const Ball& b : family.balls) out.push_back(avg.measure(b).value_or(0.0));
  return out;
}

double cube_power_integral(int d, double e) {
  if (d < 1) throw std::invalid_argument("cube dimension must be positive");
  if (!(e > -d)) return kInf;
  if (d == 1) return std::pow(0.5, e) / (e + 1.0);
  // Divergence theorem with the radial field z: the integral equals
  // (1/(e+d)) * sum over the 2d faces of (1/2) * int_face |z|^e.
  const double face = gauss_cube(d - 1, [e](double s) { return std::pow(0.25 + s, e / 2.0); });
  return d / (e + d) * face;
}

double power_integral_1d(double e, double lo, double hi) {
  if (hi < lo) std::swap(lo, hi);
  if (lo == hi) return 0.0;
  const bool touches_origin = lo <= 0.0 && hi >= 0.0;
  if (touches_origin && e <= -1.0) return kInf;
  if (e == -1.0) {
    return lo > 0.0 ? std::log(hi / lo) : std::log(lo / hi);
  }
  auto G = [e](double x) {
    const double v = std::pow(std::abs(x), e + 1.0) / (e + 1.0);
    return x < 0.0 ? -v : v;
  };
  return G(hi) - G(lo);
}

ExponentVector::ExponentVector(std::vector<double> exponents) : p_(std::move(exponents)) {
  if (p_.size() < 2) throw std::invalid_argument("multilinear exponents need m >= 2");
  double inv = 0.0;
  for (double pi : p_) {
    if (!(pi >= 1.0) || !std::isfinite(pi))
      throw std::invalid_argument(fmt::format("exponent p_i = {} must lie in [1, inf)", pi));
    inv += 1.0 / pi;
  }
  p_total_ = 1.0 / inv;
}

double ExponentVector::conjugate(int i) const {
  const double pi = p_[i];
  return pi == 1.0 ? kInf : pi / (pi - 1.0);
}

FractionalParams::FractionalParams(double alpha, ExponentVector exponents, int dim)
    : alpha_(alpha), exps_(std::move(exponents)), dim_(dim) {
  const int m = exps_.degree();
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  if (!(alpha > 0.0) || !(alpha < m * dim))
    throw std::invalid_argument(fmt::format("alpha = {} must lie in (0, mn) = (0, {})", alpha, m * dim));
  double inv_q = 0.0;
  for (int k = 0; k < m; ++k) {
    const double inv = 1.0 / exps_[k] - alpha / (m * dim);
    if (!(inv > 0.0))
      throw std::invalid_argument(
          fmt::format("q_{} is not positive: need p_{} < mn/alpha = {}", k + 1, k + 1, m * dim / alpha));
    q_k_.push_back(1.0 / inv);
    inv_q += inv;
  }
  q_ = 1.0 / inv_q;
}

Weight nu_weight(std::span<const Weight> ws, const ExponentVector& exps, NuMode mode) {
  const int m = exps.degree();
  if (static_cast<int>(ws.size()) != m) throw std::invalid_argument("need one weight per exponent");
  auto theta = [&](int i) { return mode == NuMode::Czo ? exps.p() / exps[i] : 1.0; };
  const bool all_power = std::all_of(ws.begin(), ws.end(), [](const Weight& w) { return w.is_power(); });
  if (all_power) {
    double a = 0.0;
    for (int i = 0; i < m; ++i) a += theta(i) * ws[i].exponent();
    return Weight::power(a, ws[0].dim());
  }
  const Lattice* lattice = nullptr;
  for (const auto& w : ws)
    if (!w.is_power()) lattice = &w.grid().lattice();
  std::vector<double> v(lattice->size(), 1.0);
  for (int i = 0; i < m; ++i) {
    const auto nodes = node_powers(ws[i], theta(i), *lattice);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] *= nodes[k];
  }
  return Weight::sampled(GridFunction(*lattice, std::move(v)));
}

EstimateReport muckenhoupt_constant(const Weight& w, double p, const BallFamily& family) {
  if (!(p >= 1.0)) throw std::invalid_argument("A_p needs p >= 1");
  EstimateReport r;
  r.quantity = p == 1.0 ? "A_1" : fmt::format("A_{}", p);
  r.config = {{"weight", w.describe()}, {"p", p}, {"family", family_echo(family)}};
  const Averager plain(w, 1.0, family.lattice);
  const DualFactor dual(w, p == 1.0, p == 1.0 ? 0.0 : -1.0 / (p - 1.0), p - 1.0, family.lattice);
  ExtremumTracker best;
  std::size_t skipped = 0;
  for (const Ball& b : family.balls) {
    auto a = plain.average(b);
    auto d = dual(b);
    if (!a || !d) {
      ++skipped;
      continue;
    }
    best.offer(*a * *d, b);
  }
  best.fill(r);
  warn_empty(r, skipped);
  return r;
}

EstimateReport apq_constant(const Weight& w, double p, double q, const BallFamily& family) {
  if (!(p >= 1.0) || !(q > p) || !std::isfinite(q))
    throw std::invalid_argument("A_{p,q} needs 1 <= p < q < inf");
  EstimateReport r;
  r.quantity = fmt::format("A_({},{})", p, q);
  r.config = {{"weight", w.describe()}, {"p", p}, {"q", q}, {"family", family_echo(family)}};
  const Averager wq(w, q, family.lattice);
  const double pc = p == 1.0 ? kInf : p / (p - 1.0);
  std::optional<Averager> dual_avg;
  std::optional<Averager> raw;
  if (p == 1.0)
    raw.emplace(w, 1.0, family.lattice);
  else
    dual_avg.emplace(w, -pc, family.lattice);
  ExtremumTracker best;
  std::size_t skipped = 0;
  for (const Ball& b : family.balls) {
    auto a = wq.average(b);
    std::optional<double> d;
    if (p == 1.0) {
      auto mn = raw->node_min(b);
      if (mn) d = 1.0 / *mn;
    } else if (auto da = dual_avg->average(b)) {
      d = std::pow(*da, 1.0 / pc);
    }
    if (!a || !d) {
      ++skipped;
      continue;
    }
    best.offer(std::pow(*a, 1.0 / q) * *d, b);
  }
  best.fill(r);
  warn_empty(r, skipped);
  return r;
}

namespace {

EstimateReport multi_constant(std::span<const Weight> ws, const ExponentVector& exps,
                              const BallFamily& family, std::optional<double> q) {
  const int m = exps.degree();
  if (static_cast<int>(ws.size()) != m) throw std::invalid_argument("need one weight per exponent");
  EstimateReport r;
  nlohmann::json wdesc = nlohmann::json::array();
  for (const auto& w : ws) wdesc.push_back(w.describe());
  r.config = {{"weights", wdesc},
              {"P", std::vector<double>(exps.values().begin(), exps.values().end())},
              {"family", family_echo(family)}};
  const Weight nu = nu_weight(ws, exps, q ? NuMode::Fractional : NuMode::Czo);
  // Czo: (avg nu)^{1/p}. Fractional: (avg nu^q)^{1/q}.
  const double outer_exp = q ? *q : exps.p();
  const Averager left(nu, q ? *q : 1.0, family.lattice);
  if (q) {
    r.quantity = fmt::format("A_(P,{})", *q);
    r.config["q"] = *q;
  } else {
    r.quantity = "A_P";
  }
  std::vector<DualFactor> duals;
  for (int i = 0; i < m; ++i) {
    const double pc = exps.conjugate(i);
    const bool at_one = exps[i] == 1.0;
    // Czo: (avg w_i^{1-p_i'})^{1/p_i'}. Fractional: (avg w_i^{-p_i'})^{1/p_i'}.
    const double inner = at_one ? 0.0 : (q ? -pc : 1.0 - pc);
    duals.emplace_back(ws[i], at_one, inner, at_one ? 1.0 : 1.0 / pc, family.lattice);
  }
  ExtremumTracker best;
  std::size_t skipped = 0;
  for (const Ball& b : family.balls) {
    auto a = left.average(b);
    if (!a) {
      ++skipped;
      continue;
    }
    double v = std::pow(*a, 1.0 / outer_exp);
    bool ok = true;
    for (const auto& d : duals) {
      auto f = d(b);
      if (!f) {
        ok = false;
        break;
      }
      v *= *f;
    }
    if (!ok) {
      ++skipped;
      continue;
    }
    best.offer(v, b);
  }
  best.fill(r);
  warn_empty(r, skipped);
  return r;
}

}  // namespace

EstimateReport multi_ap_constant(std::span<const Weight> ws, const ExponentVector& exps,
                                 const BallFamily& family) {
  return multi_constant(ws, exps, family, std::nullopt);
}

EstimateReport multi_apq_constant(std::span<const Weight> ws, const ExponentVector& exps, double q,
                                  const BallFamily& family) {
  if (!(q > 0.0)) throw std::invalid_argument("A_{P,q} needs q > 0");
  return multi_constant(ws, exps, family, q);
}

EstimateReport doubling_constant(const Weight& w, const BallFamily& family) {
  EstimateReport r;
  r.quantity = "doubling";
  r.config = {{"weight", w.describe()}, {"family", family_echo(family)}};
  const Averager plain(w, 1.0, family.lattice);
  ExtremumTracker best;
  std::size_t skipped = 0;
  for (const Ball& b : family.balls) {
    auto small = plain.measure(b);
    auto big = plain.measure(b.scaled(2.0));
    if (!small || !big || !(*small > 0.0)) {
      ++skipped;
      continue;
    }
    best.offer(*big / *small, b);
  }
  best.fill(r);
  warn_empty(r, skipped);
  return r;
}

namespace {

// Least-squares slope; nullopt when fewer than two distinct abscissae.
std::optional<double> ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-300)) return std::nullopt;
  return sxy / sxx;
}

std::optional<EstimateReport> fit_delta(const Weight& w, const BallFamily& family,
                                        const std::string& name, std::vector<std::string>& warnings) {
  constexpr int kLevels = 4;
  const Averager plain(w, 1.0, family.lattice);
  ExtremumTracker least;  // track the minimum through negated values
  std::size_t degenerate = 0;
  for (const Ball& b : family.balls) {
    auto wb = plain.measure(b);
    auto vb = plain.volume(b);
    if (!wb || !vb || !(*wb > 0.0) || !std::isfinite(*wb)) {
      ++degenerate;
      continue;
    }
    std::vector<double> xs, ys;
    for (int k = 1; k <= kLevels; ++k) {
      const Ball e{b.center, std::ldexp(b.radius, -k)};
      auto we = plain.measure(e);
      auto ve = plain.volume(e);
      if (!we || !ve || !(*we > 0.0)) continue;
      xs.push_back(std::log(*ve / *vb));
      ys.push_back(std::log(*we / *wb));
    }
    auto slope = ls_slope(xs, ys);
    if (!slope) {
      ++degenerate;
      continue;
    }
    least.offer(-*slope, b);
  }
  if (degenerate > 0)
    warnings.push_back(fmt::format("{}: {} ball(s) had too few sub-balls for a slope", name, degenerate));
  if (!least.has_value()) {
    warnings.push_back(name + " omitted: regression degenerate on every ball");
    return std::nullopt;
  }
  EstimateReport r;
  r.quantity = name;
  least.fill(r);
  r.value = -r.value;
  r.config = {{"weight", w.describe()}, {"family", family_echo(family)}, {"levels", kLevels}};
  return r;
}

}  // namespace

WeightDiagnostics ainfty_diagnostics(const Weight& w, const BallFamily& family, std::optional<double> q) {
  WeightDiagnostics d;
  d.doubling = doubling_constant(w, family);

  EstimateReport rj;
  rj.quantity = "reverse_jensen";
  rj.config = {{"weight", w.describe()}, {"family", family_echo(family)}};
  const Averager plain(w, 1.0, family.lattice);
  ExtremumTracker best;
  std::size_t skipped = 0;
  for (const Ball& b : family.balls) {
    auto a = plain.average(b);
    auto la = plain.log_average(b);
    if (!a || !la) {
      ++skipped;
      continue;
    }
    best.offer(*a / std::exp(*la), b);
  }
  best.fill(rj);
  warn_empty(rj, skipped);
  d.reverse_jensen = std::move(rj);

  d.delta = fit_delta(w, family, "delta", d.warnings);
  if (q) d.delta_prime = fit_delta(weight_power(w, *q), family, "delta_prime", d.warnings);
  return d;
}

bool stable_under_refinement(double coarse, double fine, double tolerance) {
  if (!std::isfinite(coarse) || !std::isfinite(fine)) return false;
  if (coarse == 0.0) return fine == 0.0;
  return std::abs(fine / coarse - 1.0) <= tolerance;
}

}  // namespace morrey
