#include "morrey/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace morrey {

namespace {

// Sums of a node table over balls. In n = 1 a ball is a contiguous index run,
// so prefix sums make each query O(1).
class BallSummer {
 public:
  BallSummer(const Lattice& lattice, std::vector<double> values)
      : lattice_(lattice), values_(std::move(values)) {
    if (lattice_.dim() == 1) {
      prefix_.assign(values_.size() + 1, 0.0L);
      for (std::size_t i = 0; i < values_.size(); ++i) prefix_[i + 1] = prefix_[i] + values_[i];
    }
  }

  // h^n * sum over nodes in B; the node count goes to `nodes`.
  double integral(const Ball& b, std::size_t* nodes = nullptr) const {
    if (lattice_.dim() == 1) {
      auto [lo, hi] = run(b);
      if (nodes) *nodes = lo <= hi ? static_cast<std::size_t>(hi - lo + 1) : 0;
      if (lo > hi) return 0.0;
      return static_cast<double>(prefix_[hi + 1] - prefix_[lo]) * lattice_.cell_volume();
    }
    double s = 0.0;
    std::size_t k = 0;
    for_each_node_in(lattice_, b, [&](std::size_t i) {
      s += values_[i];
      ++k;
    });
    if (nodes) *nodes = k;
    return s * lattice_.cell_volume();
  }

 private:
  std::pair<int, int> run(const Ball& b) const {
    auto [lo, hi] = lattice_.axis_range(b.center[0] - b.radius, b.center[0] + b.radius);
    const double r2 = b.radius * b.radius;
    const double tol = 1e-9 * lattice_.spacing() * lattice_.spacing();
    auto inside = [&](int i) {
      const double d = lattice_.coordinate(i) - b.center[0];
      return d * d < r2 - tol;
    };
    while (lo <= hi && !inside(lo)) ++lo;
    while (hi >= lo && !inside(hi)) --hi;
    return {lo, hi};
  }

  const Lattice& lattice_;
  std::vector<double> values_;
  std::vector<long double> prefix_;
};

std::vector<double> weight_nodes(const Weight& w, const Lattice& lattice) {
  auto g = sample(w, lattice);
  return {g.values().begin(), g.values().end()};
}

std::vector<double> abs_pow_times(const GridFunction& f, double p, const std::vector<double>& w) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = std::abs(f[i]);
    out[i] = a == 0.0 ? 0.0 : (p == 1.0 ? a : std::pow(a, p)) * w[i];
  }
  return out;
}

void require_same(const GridFunction& f, const BallFamily& family) {
  if (!(f.lattice() == family.lattice))
    throw std::invalid_argument("function and ball family live on different lattices");
}

// Largest lambda * m(lambda)^{1/p} over the distinct positive values of |f| at
// `nodes`, with m(lambda) the w-mass of {|f| >= lambda}.
std::pair<double, double> best_level(const GridFunction& f, const std::vector<double>& w,
                                     std::vector<std::size_t>& nodes, double p, double cell) {
  std::sort(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t b) {
    const double fa = std::abs(f[a]), fb = std::abs(f[b]);
    return fa != fb ? fa > fb : a < b;
  });
  double best = 0.0, level = 0.0;
  double mass = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double lam = std::abs(f[nodes[k]]);
    if (lam == 0.0) break;
    mass += w[nodes[k]];
    const bool last_of_level = k + 1 == nodes.size() || std::abs(f[nodes[k + 1]]) != lam;
    if (!last_of_level) continue;
    const double v = lam * std::pow(mass * cell, 1.0 / p);
    if (v > best) {
      best = v;
      level = lam;
    }
  }
  return {best, level};
}

nlohmann::json params_echo(const MorreyParams& mp) { return {{"p", mp.p}, {"kappa", mp.kappa}}; }

NormReport morrey_impl(const GridFunction& f, const Weight& u, const Weight& v, const MorreyParams& mp,
                       const BallFamily& family, std::string quantity) {
  require_same(f, family);
  const Lattice& lat = family.lattice;
  const auto un = weight_nodes(u, lat);
  const BallSummer top(lat, abs_pow_times(f, mp.p, un));
  const BallSummer bottom(lat, weight_nodes(v, lat));
  NormReport r;
  r.quantity = std::move(quantity);
  r.config = params_echo(mp);
  r.config["family"] = family_echo(family);
  ExtremumTracker best;
  std::size_t skipped = 0;
  for (const Ball& b : family.balls) {
    std::size_t k = 0;
    const double vb = bottom.integral(b, &k);
    if (k == 0) {
      ++skipped;
      continue;
    }
    const double num = top.integral(b);
    best.offer(std::pow(std::pow(vb, -mp.kappa) * num, 1.0 / mp.p), b);
  }
  best.fill(r);
  if (skipped > 0)
    r.warnings.push_back(fmt::format("{} ball(s) contain no lattice point and were skipped", skipped));
  return r;
}

}  // namespace

MorreyParams::MorreyParams(double p_, double kappa_) : p(p_), kappa(kappa_) {
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("Morrey exponent p must be positive");
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("Morrey parameter kappa must be positive");
}

double lebesgue_norm(const GridFunction& f, const Weight& w, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("p must be positive");
  const auto wn = weight_nodes(w, f.lattice());
  const auto v = abs_pow_times(f, p, wn);
  const double s = std::accumulate(v.begin(), v.end(), 0.0) * f.lattice().cell_volume();
  return std::pow(s, 1.0 / p);
}

NormReport weak_lebesgue_norm(const GridFunction& f, const Weight& w, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("p must be positive");
  const auto wn = weight_nodes(w, f.lattice());
  std::vector<std::size_t> nodes(f.size());
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  auto [value, level] = best_level(f, wn, nodes, p, f.lattice().cell_volume());
  NormReport r;
  r.quantity = "weak_lebesgue";
  r.value = value;
  r.balls_used = 0;
  r.config = {{"p", p}, {"weight", w.describe()}};
  if (value > 0.0)
    r.extremal_level = level;
  else
    r.warnings.push_back("f vanishes identically; no attained level");
  return r;
}

NormReport morrey_norm(const GridFunction& f, const Weight& w, const MorreyParams& mp,
                       const BallFamily& family) {
  auto r = morrey_impl(f, w, w, mp, family, "morrey");
  r.config["weight"] = w.describe();
  return r;
}

NormReport two_weight_morrey_norm(const GridFunction& f, const Weight& u, const Weight& v,
                                  const MorreyParams& mp, const BallFamily& family) {
  auto r = morrey_impl(f, u, v, mp, family, "two_weight_morrey");
  r.config["u"] = u.describe();
  r.config["v"] = v.describe();
  return r;
}

NormReport weak_morrey_norm(const GridFunction& f, const Weight& w, const MorreyParams& mp,
                            const BallFamily& family) {
  require_same(f, family);
  const Lattice& lat = family.lattice;
  const auto wn = weight_nodes(w, lat);
  const BallSummer measure(lat, wn);
  NormReport r;
  r.quantity = "weak_morrey";
  r.config = params_echo(mp);
  r.config["weight"] = w.describe();
  r.config["family"] = family_echo(family);
  ExtremumTracker best;
  std::vector<std::size_t> nodes;
  std::size_t skipped = 0;
  for (const Ball& b : family.balls) {
    nodes.clear();
    for_each_node_in(lat, b, [&](std::size_t i) {
      if (f[i] != 0.0) nodes.push_back(i);
    });
    std::size_t k = 0;
    const double wb = measure.integral(b, &k);
    if (k == 0) {
      ++skipped;
      continue;
    }
    auto [value, level] = best_level(f, wn, nodes, mp.p, lat.cell_volume());
    best.offer(std::pow(wb, -mp.kappa / mp.p) * value, b, value > 0.0 ? std::optional(level) : std::nullopt);
  }
  best.fill(r);
  if (skipped > 0)
    r.warnings.push_back(fmt::format("{} ball(s) contain no lattice point and were skipped", skipped));
  if (r.value == 0.0) r.warnings.push_back("f vanishes on every ball; no attained level");
  return r;
}

}  // namespace morrey
