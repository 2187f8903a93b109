#include "morrey/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <fmt/format.h>

namespace morrey {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MorreyParams left_params_of(const ExperimentConfig& c) {
  const auto P = c.exponents();
  if (!c.fractional()) return MorreyParams(P.p(), c.kappa);
  const double q = c.fractional_params().q();
  return MorreyParams(q, c.kappa * q / P.p());
}

std::vector<MorreyParams> right_params_of(const ExperimentConfig& c) {
  const auto P = c.exponents();
  std::vector<MorreyParams> out;
  if (!c.fractional()) {
    for (int i = 0; i < c.degree(); ++i) out.emplace_back(P[i], c.kappa);
    return out;
  }
  const auto fp = c.fractional_params();
  for (int i = 0; i < c.degree(); ++i) out.emplace_back(P[i], c.kappa * P[i] * fp.q() / (P.p() * fp.q(i)));
  return out;
}

Weight left_weight_of(const ExperimentConfig& c, const std::vector<Weight>& ws) {
  const auto P = c.exponents();
  if (!c.fractional()) return nu_weight(ws, P, NuMode::Czo);
  return weight_power(nu_weight(ws, P, NuMode::Fractional), c.fractional_params().q());
}

}  // namespace

std::vector<Instance> corpus(const ExperimentConfig& cfg) {
  std::vector<Instance> out;
  for (double t : cfg.functions.translations)
    for (double s : cfg.functions.dilations)
      for (double a : cfg.functions.amplitudes) out.push_back(Instance{out.size(), t, s, a});
  return out;
}

GridFunction bump(const Lattice& lattice, const Point& center, double s, double amplitude) {
  const int n = lattice.dim();
  return GridFunction::sample(lattice, [&](const Point& x) {
    const double t2 = squared_distance(x, center, n) / (s * s);
    if (t2 >= 1.0) return 0.0;
    const double u = 1.0 - t2;
    return amplitude * u * u * u;
  });
}

TheoremRunner::TheoremRunner(ExperimentConfig cfg)
    : cfg_(std::move(cfg)),
      lattice_(cfg_.lattice()),
      family_(cfg_.family()),
      ws_(cfg_.weight_list()),
      left_weight_(left_weight_of(cfg_, ws_)),
      left_params_(left_params_of(cfg_)),
      right_params_(right_params_of(cfg_)) {
  for (int i = 0; i < cfg_.degree(); ++i) {
    if (cfg_.fractional()) {
      right_u_.push_back(weight_power(ws_[i], cfg_.p[i]));
      right_v_.push_back(weight_power(ws_[i], cfg_.fractional_params().q(i)));
    } else {
      right_u_.push_back(ws_[i]);
      right_v_.push_back(ws_[i]);
    }
  }
}

std::vector<GridFunction> TheoremRunner::inputs(const Instance& inst) const {
  std::vector<GridFunction> fs;
  for (int k = 0; k < cfg_.degree(); ++k) {
    Point c{};
    c[0] = inst.translation + k * cfg_.functions.pair_offset * inst.dilation;
    fs.push_back(bump(lattice_, c, inst.dilation, k == 0 ? inst.amplitude : 1.0));
  }
  return fs;
}

GridFunction TheoremRunner::apply(std::span<const GridFunction> fs) const {
  if (cfg_.fractional()) return apply_fractional(cfg_.fractional_params(), fs, cfg_.op.singular);
  return apply_czo(cfg_.kernel(), fs, cfg_.truncation());
}

InstanceResult TheoremRunner::evaluate(const Instance& inst) const {
  InstanceResult r;
  r.instance = inst;
  const double half = cfg_.half_width / 2.0;
  for (int k = 0; k < cfg_.degree(); ++k) {
    const double c = inst.translation + k * cfg_.functions.pair_offset * inst.dilation;
    if (std::abs(c) + inst.dilation > half * (1 + 1e-12)) {
      r.rejected = true;
      r.reason = fmt::format("support of f_{} leaves [-L/2, L/2]", k + 1);
      return r;
    }
  }
  return evaluate(inst, inputs(inst));
}

InstanceResult TheoremRunner::evaluate(const Instance& inst, std::span<const GridFunction> fs) const {
  InstanceResult r;
  r.instance = inst;
  double denom = 1.0;
  for (int i = 0; i < cfg_.degree(); ++i) {
    const double v = two_weight_morrey_norm(fs[i], right_u_[i], right_v_[i], right_params_[i], family_).value;
    r.right.push_back(v);
    denom *= v;
  }
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    r.rejected = true;
    r.reason = "zero or non-finite input norm";
    return r;
  }
  const auto out = apply(fs);
  r.left_strong = morrey_norm(out, left_weight_, left_params_, family_).value;
  r.left_weak = weak_morrey_norm(out, left_weight_, left_params_, family_).value;
  r.strong_ratio = r.left_strong / denom;
  r.weak_ratio = r.left_weak / denom;
  r.ratio = cfg_.weak() ? r.weak_ratio : r.strong_ratio;
  return r;
}

RatioReport sweep(const ExperimentConfig& cfg, int jobs) {
  const auto instances = corpus(cfg);
  if (instances.size() < 10)
    throw ConfigError(fmt::format("a sweep needs at least 10 instances, the corpus has {}", instances.size()));
  const TheoremRunner runner(cfg);
  std::vector<InstanceResult> results(instances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) results[i] = runner.evaluate(instances[i]);
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(instances.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  RatioReport rep;
  rep.theorem = cfg.theorem;
  rep.config = cfg.to_json();
  rep.results = std::move(results);
  bool any = false;
  for (std::size_t i = 0; i < rep.results.size(); ++i) {
    const auto& r = rep.results[i];
    if (r.rejected) {
      ++rep.rejected;
      rep.warnings.push_back(fmt::format("instance {} rejected: {}", i, r.reason));
      continue;
    }
    if (!any || r.ratio > rep.max) {
      rep.max = r.ratio;
      rep.argmax = i;
    }
    if (!any || r.ratio < rep.min) {
      rep.min = r.ratio;
      rep.argmin = i;
    }
    any = true;
  }
  rep.spread = any && rep.min > 0.0 ? rep.max / rep.min : kInf;
  const auto hyp = validate_hypotheses(cfg);
  rep.hypotheses_ok = hyp.ok();
  for (const auto& v : hyp.violations) rep.warnings.push_back("hypothesis not met: " + v);
  for (const auto& v : hyp.notes) rep.warnings.push_back(v);
  if (rep.hypotheses_ok) rep.pass = any && rep.spread <= cfg.tol.spread;
  return rep;
}

TruncationReport truncation_sensitivity(const ExperimentConfig& cfg, int jobs) {
  if (cfg.fractional()) throw ConfigError("truncation sensitivity applies to the czo operator only");
  ExperimentConfig fine = cfg;
  fine.op.delta_cells = cfg.op.delta_cells / 2.0;
  if (!(fine.op.delta_cells >= 1.0)) throw ConfigError("halving delta would drop it below one spacing");
  TruncationReport t;
  t.coarse = sweep(cfg, jobs);
  t.fine = sweep(fine, jobs);
  const double h = cfg.lattice().spacing();
  t.delta_coarse = cfg.op.delta_cells * h;
  t.delta_fine = fine.op.delta_cells * h;
  bool any = false;
  for (std::size_t i = 0; i < t.coarse.results.size(); ++i) {
    const auto& a = t.coarse.results[i];
    const auto& b = t.fine.results[i];
    if (a.rejected || b.rejected) continue;
    const double c = std::abs(b.ratio / a.ratio - 1.0);
    t.change.push_back(c);
    t.max_change = std::max(t.max_change, c);
    any = true;
  }
  t.pass = any && t.max_change <= cfg.tol.truncation;
  return t;
}

LemmaReport check_product_lemma(std::span<const Weight> ws, const ExponentVector& exps, const BallFamily& family,
                                const std::optional<FractionalParams>& fractional) {
  const int m = exps.degree();
  if (static_cast<int>(ws.size()) != m) throw std::invalid_argument("need one weight per exponent");
  std::vector<std::vector<double>> parts;
  std::vector<double> powers;
  std::vector<double> rhs;
  if (!fractional) {
    for (int i = 0; i < m; ++i) {
      parts.push_back(weight_measures(ws[i], family));
      powers.push_back(exps.p() / exps[i]);
    }
    rhs = weight_measures(nu_weight(ws, exps, NuMode::Czo), family);
  } else {
    const double q = fractional->q();
    for (int i = 0; i < m; ++i) {
      parts.push_back(weight_measures(weight_power(ws[i], fractional->q(i)), family));
      powers.push_back(q / fractional->q(i));
    }
    rhs = weight_measures(weight_power(nu_weight(ws, exps, NuMode::Fractional), q), family);
  }
  LemmaReport r;
  r.constant.quantity = fractional ? "C_lemma_fractional" : "C_lemma";
  r.constant.config = {{"family", family_echo(family)}};
  ExtremumTracker best;
  for (std::size_t b = 0; b < family.balls.size(); ++b) {
    double lhs = 1.0;
    for (int i = 0; i < m; ++i) lhs *= std::pow(parts[i][b], powers[i]);
    if (!(rhs[b] > 0.0) || !(lhs > 0.0)) continue;
    best.offer(lhs / rhs[b], family.balls[b]);
    r.worst_holder = std::max(r.worst_holder, rhs[b] / lhs);
    ++r.balls;
  }
  best.fill(r.constant);
  r.holder_ok = r.balls > 0 && r.worst_holder <= 1.0 + 1e-8;
  return r;
}

const char* to_string(Finiteness f) {
  switch (f) {
    case Finiteness::Finite: return "finite";
    case Finiteness::Divergent: return "divergent";
    default: return "indeterminate";
  }
}

Finiteness classify(double coarse, double fine, double tolerance) {
  if (!std::isfinite(coarse) || !std::isfinite(fine)) return Finiteness::Divergent;
  if (fine >= 2.0 * coarse) return Finiteness::Divergent;
  if (stable_under_refinement(coarse, fine, tolerance)) return Finiteness::Finite;
  return Finiteness::Indeterminate;
}

namespace {

template <class Fn>
CorollaryStage stage(std::string name, const BallFamily& coarse, const BallFamily& fine, double tol, Fn&& fn) {
  CorollaryStage s;
  s.name = std::move(name);
  try {
    s.coarse = fn(coarse);
    s.fine = fn(fine);
  } catch (const std::invalid_argument&) {
    // the weight power is not locally integrable
    s.coarse = s.fine = kInf;
  }
  s.status = classify(s.coarse, s.fine, tol);
  return s;
}

}  // namespace

CorollaryReport check_corollaries(const ExperimentConfig& cfg, bool run_sweep, int jobs) {
  const BallFamily coarse = cfg.family();
  const BallFamily fine = make_ball_family(refine(cfg.lattice()), refine(cfg.family_spec()));
  const auto ws = cfg.weight_list();
  const auto P = cfg.exponents();
  const double tol = cfg.tol.refinement;
  const int m = cfg.degree();
  CorollaryReport rep;

  if (!cfg.fractional()) {
    for (int i = 0; i < m; ++i)
      rep.singles.push_back(stage(fmt::format("A_{}(w_{})", P[i], i + 1), coarse, fine, tol,
                                  [&](const BallFamily& f) { return muckenhoupt_constant(ws[i], P[i], f).value; }));
    rep.multi = stage("A_P", coarse, fine, tol,
                      [&](const BallFamily& f) { return multi_ap_constant(ws, P, f).value; });
  } else {
    const auto fp = cfg.fractional_params();
    for (int i = 0; i < m; ++i) {
      rep.singles.push_back(stage(fmt::format("A_({},{})(w_{})", P[i], fp.q(i), i + 1), coarse, fine, tol,
                                  [&](const BallFamily& f) { return apq_constant(ws[i], P[i], fp.q(i), f).value; }));
      const double pc = P.conjugate(i);
      const double r = std::isinf(pc) ? 1.0 : 1.0 + fp.q(i) / pc;
      auto eq = stage(fmt::format("A_{}(w_{}^{})", r, i + 1, fp.q(i)), coarse, fine, tol, [&](const BallFamily& f) {
        return muckenhoupt_constant(weight_power(ws[i], fp.q(i)), r, f).value;
      });
      rep.equivalence.push_back(eq);
      const bool agree = eq.status == rep.singles.back().status && eq.status != Finiteness::Indeterminate;
      rep.equivalence_ok = rep.equivalence_ok && agree;
    }
    rep.multi = stage(fmt::format("A_(P,{})", fp.q()), coarse, fine, tol,
                      [&](const BallFamily& f) { return multi_apq_constant(ws, P, fp.q(), f).value; });
  }

  const bool singles_finite = std::all_of(rep.singles.begin(), rep.singles.end(),
                                          [](const CorollaryStage& s) { return s.status == Finiteness::Finite; });
  const bool multi_finite = rep.multi.status == Finiteness::Finite;
  rep.chain_ok = !singles_finite || multi_finite;
  if (run_sweep && multi_finite) {
    rep.sweep = sweep(cfg, jobs);
    rep.chain_ok = rep.chain_ok && rep.sweep->pass.value_or(false);
  }
  return rep;
}

const char* to_string(SplitPattern p) {
  switch (p) {
    case SplitPattern::FarFar: return "far-far";
    case SplitPattern::FarNear: return "far-near";
    default: return "near-far";
  }
}

TailCorpusResult tail_corpus(const ExperimentConfig& cfg, std::uint64_t seed, const std::vector<double>* c_tail,
                             std::vector<std::size_t>* violations, std::size_t* checks) {
  if (cfg.degree() != 2) throw ConfigError("tail corpora are built for m = 2");
  const Lattice lat = cfg.lattice();
  const double h = lat.spacing(), L = cfg.half_width;
  const int n = lat.dim();
  const std::vector<SplitPattern> patterns{SplitPattern::FarFar, SplitPattern::FarNear, SplitPattern::NearFar};
  const TailMode mode = cfg.fractional() ? TailMode::fractional_order(cfg.op.alpha) : TailMode::czo();
  const std::optional<KernelSpec> kernel = cfg.fractional() ? std::nullopt : std::optional(cfg.kernel());
  auto apply = [&](std::span<const GridFunction> fs) {
    if (cfg.fractional()) return apply_fractional(cfg.fractional_params(), fs, cfg.op.singular);
    return apply_czo(*kernel, fs, cfg.truncation());
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, unit(rng)); };

  TailCorpusResult res;
  res.ratio_max.assign(patterns.size(), 0.0);
  res.samples.assign(patterns.size(), 0);
  if (violations) violations->assign(patterns.size(), 0);
  if (checks) *checks = 0;

  for (int k = 0; k < cfg.tail.instances; ++k) {
    std::vector<GridFunction> fs;
    std::vector<std::pair<Point, double>> supports;
    for (int i = 0; i < 2; ++i) {
      const double s = log_uniform(4 * h, L / 8);
      Point c{};
      for (int d = 0; d < n; ++d) c[d] = (L / 2 - s) * (2 * unit(rng) - 1);
      const double amp = (unit(rng) < 0.5 ? -1.0 : 1.0) * log_uniform(0.5, 2.0);
      fs.push_back(bump(lat, c, s, amp));
      supports.emplace_back(c, s);
    }
    std::vector<Ball> balls;
    for (int b = 0; b < cfg.tail.balls_per_instance; ++b) {
      Point c{};
      for (int d = 0; d < n; ++d) c[d] = std::round((L / 2) * (2 * unit(rng) - 1) / h) * h;
      balls.push_back({c, log_uniform(h, L / 4)});
    }
    // balls whose double ends at a support edge, so that the far part of
    // that input starts right at the boundary of 2B
    for (const auto& [sc, s] : supports)
      for (double r = 2 * h; r <= L / 4; r *= std::sqrt(2.0)) {
        Point u{};
        double norm = 0.0;
        for (int d = 0; d < n; ++d) {
          u[d] = d == 0 ? 1.0 : 0.0;
          if (n > 1) u[d] = 2 * unit(rng) - 1;
          norm += u[d] * u[d];
        }
        for (double side : {-1.0, 1.0}) {
          Point c{};
          bool inside = true;
          for (int d = 0; d < n; ++d) {
            c[d] = std::round((sc[d] + side * (s + 2 * r) * u[d] / std::sqrt(norm)) / h) * h;
            inside = inside && std::abs(c[d]) <= L;
          }
          if (inside) balls.push_back({c, r});
        }
      }
    // f_i at the edge of B and the support of f_j just outside 2B on the same side
    for (int i = 0; i < 2; ++i) {
      const auto& [ci, si] = supports[i];
      const auto& [cj, sj] = supports[1 - i];
      double dist = 0.0;
      for (int d = 0; d < n; ++d) dist += (cj[d] - ci[d]) * (cj[d] - ci[d]);
      dist = std::sqrt(dist);
      const double reach = dist - sj;
      if (reach < 2 * h) continue;
      for (double t : {0.85, 0.9, 0.95, 1.0}) {
        const double r = t * reach;
        Point c{};
        for (int d = 0; d < n; ++d) c[d] = std::round((ci[d] - r * (cj[d] - ci[d]) / dist) / h) * h;
        balls.push_back({c, r});
      }
    }
    for (const auto& ball : balls) {
      const Point& c = ball.center;
      double reach = 0.0;
      for (int d = 0; d < n; ++d) reach = std::max(reach, std::abs(c[d]));
      reach += L / 2 * std::sqrt(static_cast<double>(n));
      // annuli past the support only add a geometric remainder below 2^-20
      const int annuli = std::max(1, static_cast<int>(std::ceil(std::log2(reach / ball.radius)))) + 20;
      const double rhs = tail_majorant(fs, ball, annuli, mode);
      const auto s0 = split_at_ball(fs[0], ball);
      const auto s1 = split_at_ball(fs[1], ball);
      for (std::size_t pi = 0; pi < patterns.size(); ++pi) {
        std::vector<GridFunction> parts;
        switch (patterns[pi]) {
          case SplitPattern::FarFar: parts = {s0.far, s1.far}; break;
          case SplitPattern::FarNear: parts = {s0.far, s1.near}; break;
          case SplitPattern::NearFar: parts = {s0.near, s1.far}; break;
        }
        const auto out = apply(parts);
        for_each_node_in(lat, ball, [&](std::size_t x) {
          const double lhs = std::abs(out[x]);
          const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? kInf : 0.0);
          res.ratio_max[pi] = std::max(res.ratio_max[pi], ratio);
          ++res.samples[pi];
          if (c_tail) {
            ++*checks;
            if (lhs > cfg.tail.slack * (*c_tail)[pi] * rhs) ++(*violations)[pi];
          }
        });
      }
    }
  }
  return res;
}

TailReport calibrate_tail(const ExperimentConfig& cfg) {
  TailReport rep;
  rep.patterns = {SplitPattern::FarFar, SplitPattern::FarNear, SplitPattern::NearFar};
  rep.slack = cfg.tail.slack;
  rep.c_tail = tail_corpus(cfg, cfg.tail.calibration_seed).ratio_max;
  auto held = tail_corpus(cfg, cfg.tail.heldout_seed, &rep.c_tail, &rep.heldout_violations, &rep.heldout_checks);
  rep.heldout_max = held.ratio_max;
  rep.pass = rep.heldout_checks > 0;
  for (auto v : rep.heldout_violations) rep.pass = rep.pass && v == 0;
  return rep;
}

}  // namespace morrey
