#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "morrey/harness.hpp"

namespace morrey {

namespace {

namespace fs = std::filesystem;

struct GridFlags {
  int n = 1;
  double half_width = 4.0;
  int points = 129;
  int stride = 2;
  double r0_cells = 1.0;
  int count = 7;
  bool centered = false;

  void add(CLI::App* app) {
    app->add_option("--n", n, "dimension")->check(CLI::Range(1, 3));
    app->add_option("--half-width", half_width, "domain is [-L, L]^n");
    app->add_option("--points", points, "points per axis (odd)");
    app->add_option("--stride", stride, "center stride in nodes");
    app->add_option("--r0-cells", r0_cells, "smallest radius in spacings");
    app->add_option("--count", count, "number of dyadic radii");
    app->add_flag("--centered", centered, "use balls centered at the origin only");
  }
  Lattice lattice() const { return make_lattice(n, half_width, points); }
  BallFamily family() const {
    const Lattice lat = lattice();
    BallFamilySpec s;
    s.center_stride = stride;
    s.r0 = r0_cells * lat.spacing();
    s.count = count;
    s.center_extent = centered ? 0.0 : half_width / 2;
    return make_ball_family(lat, s);
  }
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

std::string fmt_value(double v) { return std::isfinite(v) ? fmt::format("{:.6g}", v) : std::string("inf"); }

std::string describe_ball(const std::optional<Ball>& b, int n) {
  if (!b) return "-";
  std::string c;
  for (int k = 0; k < n; ++k) c += (k ? "," : "") + fmt::format("{:.4g}", b->center[k]);
  return fmt::format("B(({}), {:.4g})", c, b->radius);
}

int cmd_weights(double power, std::optional<double> p, std::optional<double> q, const GridFlags& g,
                const std::string& format) {
  const auto w = Weight::power(power, g.n);
  const auto fam = g.family();
  nlohmann::json j{{"weight", w.describe()}};
  std::vector<std::pair<std::string, EstimateReport>> rows;
  if (p) rows.emplace_back("A_p", muckenhoupt_constant(w, *p, fam));
  if (p && q) rows.emplace_back("A_pq", apq_constant(w, *p, *q, fam));
  auto d = ainfty_diagnostics(w, fam, q);
  rows.emplace_back("doubling", d.doubling);
  rows.emplace_back("reverse_jensen", d.reverse_jensen);
  if (d.delta) rows.emplace_back("delta", *d.delta);
  if (d.delta_prime) rows.emplace_back("delta_prime", *d.delta_prime);
  if (format == "json") {
    for (auto& [k, r] : rows) j[k] = to_json(r);
    j["warnings"] = d.warnings;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << fmt::format("weight {}  family: {} balls\n", w.describe(), fam.balls.size());
    for (auto& [k, r] : rows)
      std::cout << fmt::format("{:<16} {:>12}  at {}\n", r.quantity, fmt_value(r.value), describe_ball(r.extremal_ball, g.n));
    for (auto& s : d.warnings) std::cerr << "warning: " << s << '\n';
  }
  return 0;
}

GridFunction described_function(const Lattice& lat, const std::string& kind, double center, double scale,
                                double amplitude) {
  Point c{};
  c[0] = center;
  if (kind == "bump") return bump(lat, c, scale, amplitude);
  if (kind == "indicator") {
    std::vector<double> lo(lat.dim(), -scale), hi(lat.dim(), scale);
    lo[0] += center;
    hi[0] += center;
    return GridFunction::box_indicator(lat, lo, hi).scaled(amplitude);
  }
  throw CLI::ValidationError("--function", "unknown function '" + kind + "'");
}

int cmd_norm(const std::string& space, const std::string& kind, double center, double scale, double amplitude,
             double p, double kappa, double a, std::optional<double> b, const GridFlags& g, const std::string& format) {
  const auto lat = g.lattice();
  const auto f = described_function(lat, kind, center, scale, amplitude);
  const auto w = Weight::power(a, g.n);
  NormReport r;
  if (space == "lebesgue") {
    r.quantity = "lebesgue";
    r.value = lebesgue_norm(f, w, p);
  } else if (space == "weak-lebesgue") {
    r = weak_lebesgue_norm(f, w, p);
  } else {
    const auto fam = g.family();
    const MorreyParams mp(p, kappa);
    if (space == "morrey")
      r = morrey_norm(f, w, mp, fam);
    else if (space == "weak-morrey")
      r = weak_morrey_norm(f, w, mp, fam);
    else if (space == "two-weight")
      r = two_weight_morrey_norm(f, w, Weight::power(b.value_or(a), g.n), mp, fam);
    else
      throw CLI::ValidationError("--space", "unknown space '" + space + "'");
  }
  if (format == "json") {
    std::cout << to_json(r).dump(2) << '\n';
  } else {
    std::cout << fmt::format("{} = {}", r.quantity, fmt_value(r.value));
    if (r.extremal_ball) std::cout << "  at " << describe_ball(r.extremal_ball, g.n);
    if (r.extremal_level) std::cout << fmt::format("  lambda = {:.6g}", *r.extremal_level);
    std::cout << '\n';
    for (auto& s : r.warnings) std::cerr << "warning: " << s << '\n';
  }
  return 0;
}

int cmd_apply(const ExperimentConfig& cfg, double translation, double dilation, const std::string& out) {
  TheoremRunner runner(cfg);
  Instance inst{0, translation, dilation, 1.0};
  const auto fs = runner.inputs(inst);
  const auto t = runner.apply(fs);
  const auto lat = cfg.lattice();
  std::ostringstream os;
  os << "index";
  for (int k = 0; k < lat.dim(); ++k) os << ",x" << k + 1;
  for (std::size_t i = 0; i < fs.size(); ++i) os << ",f" << i + 1;
  os << ",out\n";
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const Point x = lat.point(i);
    os << i;
    for (int k = 0; k < lat.dim(); ++k) os << fmt::format(",{:.17g}", x[k]);
    for (const auto& f : fs) os << fmt::format(",{:.17g}", f[i]);
    os << fmt::format(",{:.17g}\n", t[i]);
  }
  if (out.empty()) {
    std::cout << os.str();
  } else {
    write_file(fs::path(out) / "apply.csv", os.str());
    std::cout << fmt::format("wrote {} nodes to {}\n", lat.size(), (fs::path(out) / "apply.csv").string());
  }
  return 0;
}

Weight random_weight(const Lattice& lat, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(lat.size());
  for (auto& x : v) x = std::exp(u(rng));
  return Weight::sampled(GridFunction(lat, std::move(v)));
}

int cmd_lemma(const ExperimentConfig& cfg, bool fractional, int random, std::uint64_t seed) {
  const auto P = cfg.exponents();
  std::optional<FractionalParams> fp;
  if (fractional) fp = cfg.fractional_params();
  const auto ws = cfg.weight_list();
  const auto coarse = check_product_lemma(ws, P, cfg.family(), fp);
  const auto fine =
      check_product_lemma(ws, P, make_ball_family(refine(cfg.lattice()), refine(cfg.family_spec())), fp);
  const bool stable = stable_under_refinement(coarse.constant.value, fine.constant.value, cfg.tol.refinement);
  std::cout << fmt::format("{}  weights |x|^a, a = [{}]\n", fractional ? "lemma41" : "lemma31",
                           fmt::join(cfg.weights, ", "));
  std::cout << fmt::format("  C_lemma coarse {}  fine {}  stable {}\n", fmt_value(coarse.constant.value),
                           fmt_value(fine.constant.value), stable ? "yes" : "no");
  bool holder = coarse.holder_ok && fine.holder_ok;
  std::mt19937_64 rng(seed);
  const auto lat = cfg.lattice();
  const auto fam = cfg.family();
  double worst = std::max(coarse.worst_holder, fine.worst_holder);
  for (int k = 0; k < random; ++k) {
    std::vector<Weight> rw;
    for (int i = 0; i < cfg.degree(); ++i) rw.push_back(random_weight(lat, rng));
    const auto r = check_product_lemma(rw, P, fam, fp);
    holder = holder && r.holder_ok;
    worst = std::max(worst, r.worst_holder);
  }
  std::cout << fmt::format("  Hoelder direction on {} random weight tuples: {} (max RHS/LHS = {:.12g})\n", random,
                           holder ? "holds" : "FAILS", worst);
  const bool ok = holder && stable;
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

int cmd_tail(const ExperimentConfig& cfg) {
  const auto r = calibrate_tail(cfg);
  for (std::size_t i = 0; i < r.patterns.size(); ++i)
    std::cout << fmt::format("{:<9} C_tail {:>10}  held-out max {:>10}  violations {}\n", to_string(r.patterns[i]),
                             fmt_value(r.c_tail[i]), fmt_value(r.heldout_max[i]), r.heldout_violations[i]);
  std::cout << fmt::format("{} held-out (B, x) checks at slack {}\n{}\n", r.heldout_checks, r.slack,
                           r.pass ? "PASS" : "FAIL");
  return r.pass ? 0 : 1;
}

int cmd_kernel(const std::string& name, int samples, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.op.kernel = name;
  const auto k = cfg.kernel();
  SamplingPlan plan;
  plan.samples = samples;
  plan.seed = seed;
  const auto r = verify_kernel_class(k, plan);
  std::cout << fmt::format("kernel {}  declared A = {}  eps = {}\n", k.name, k.size_constant, k.epsilon);
  std::cout << fmt::format("  size {:.6g}  regularity x {:.6g}", r.size, r.regularity_x);
  for (std::size_t i = 0; i < r.regularity_y.size(); ++i)
    std::cout << fmt::format("  y{} {:.6g}", i + 1, r.regularity_y[i]);
  std::cout << fmt::format("\n  {} tuples, {} skipped\n{}\n", r.tuples, r.skipped, r.pass() ? "PASS" : "FAIL");
  return r.pass() ? 0 : 1;
}

int cmd_theorem(ExperimentConfig cfg, const std::string& which, const std::string& out, const std::string& format,
                int jobs, bool truncation) {
  if (which != cfg.theorem)
    throw ConfigError(fmt::format("config is for theorem {}, not {}", cfg.theorem, which));
  const auto r = sweep(cfg, jobs);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << fmt::format("theorem {}  instances {}  rejected {}\n", r.theorem, r.results.size(), r.rejected);
  std::cout << fmt::format("  R max {}  min {}  spread {}  (limit {})\n", fmt_value(r.max), fmt_value(r.min),
                           fmt_value(r.spread), cfg.tol.spread);
  bool ok = r.pass.value_or(false);
  std::optional<TruncationReport> tr;
  if (truncation && !cfg.fractional()) {
    tr = truncation_sensitivity(cfg, jobs);
    std::cout << fmt::format("  delta {:.4g} -> {:.4g}  max relative change {:.4g}  (limit {})\n", tr->delta_coarse,
                             tr->delta_fine, tr->max_change, cfg.tol.truncation);
    ok = ok && tr->pass;
  }
  if (!out.empty()) {
    const std::string stem = "theorem_" + which;
    const fs::path dir(out);
    if (format == "json") {
      auto j = to_json(r);
      if (tr) j["truncation"] = {{"delta_coarse", tr->delta_coarse},
                                  {"delta_fine", tr->delta_fine},
                                  {"change", tr->change},
                                  {"max_change", tr->max_change},
                                  {"pass", tr->pass}};
      write_file(dir / (stem + ".json"), j.dump(2) + "\n");
    } else {
      write_file(dir / (stem + ".csv"), to_csv(r));
    }
  }
  if (!r.pass) {
    std::cout << "verdict n/a (hypotheses violated)\n";
    return 1;
  }
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Weighted Morrey estimates for multilinear operators"};
  app.require_subcommand(1);
  std::string format = "text";
  std::string th_format = "csv";

  GridFlags wg;
  double power = 0.0;
  std::optional<double> wp, wq;
  auto* weights = app.add_subcommand("weights", "weight constants and A_inf diagnostics of |x|^a");
  weights->add_option("--power", power, "exponent a")->required();
  weights->add_option("--p", wp, "A_p exponent");
  weights->add_option("--q", wq, "A_{p,q} second exponent");
  weights->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  wg.add(weights);

  GridFlags ng;
  std::string space = "morrey", kind = "bump";
  double center = 0.0, scale = 1.0, amplitude = 1.0, np = 1.0, kappa = 0.5, na = 0.0;
  std::optional<double> nb;
  auto* norm = app.add_subcommand("norm", "a space norm of a described function");
  norm->add_option("--space", space)->check(
      CLI::IsMember({"lebesgue", "weak-lebesgue", "morrey", "weak-morrey", "two-weight"}));
  norm->add_option("--function", kind)->check(CLI::IsMember({"bump", "indicator"}));
  norm->add_option("--center", center);
  norm->add_option("--scale", scale, "bump radius or box half-width");
  norm->add_option("--amplitude", amplitude);
  norm->add_option("--p", np);
  norm->add_option("--kappa", kappa);
  norm->add_option("--weight", na, "weight exponent a (u for two-weight)");
  norm->add_option("--v-weight", nb, "second weight exponent for two-weight");
  norm->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  ng.add(norm);

  std::string config, out;
  double translation = 0.0, dilation = 1.0;
  auto* apply = app.add_subcommand("apply", "evaluate the configured operator on one bump instance");
  apply->add_option("--config", config, "TOML experiment config");
  apply->add_option("--translation", translation);
  apply->add_option("--dilation", dilation);
  apply->add_option("--out", out, "directory for apply.csv (stdout when omitted)");

  auto* verify = app.add_subcommand("verify", "run a check");
  verify->require_subcommand(1);
  std::uint64_t seed = 1;
  int jobs = 1, random = 20, samples = 10000;
  bool truncation = false;
  std::string kernel = "homogeneous-odd", theorem_id;

  auto* l31 = verify->add_subcommand("lemma31", "product lemma, czo weights");
  auto* l41 = verify->add_subcommand("lemma41", "product lemma, fractional weights");
  for (auto* s : {l31, l41}) {
    s->add_option("--config", config)->required();
    s->add_option("--random", random, "random sampled-weight tuples");
    s->add_option("--seed", seed);
  }
  auto* tail = verify->add_subcommand("tail", "calibrate and hold out the pointwise tail bound");
  tail->add_option("--config", config)->required();
  auto* kc = verify->add_subcommand("kernel-class", "empirical size and regularity constants");
  kc->add_option("--kernel", kernel)->check(CLI::IsMember({"homogeneous-odd", "fractional-size", "jump-angular"}));
  kc->add_option("--samples", samples);
  kc->add_option("--seed", seed);
  auto* th = verify->add_subcommand("theorem", "ratio sweep for a theorem");
  th->add_option("id", theorem_id)->required()->check(CLI::IsMember({"1.1", "1.2", "1.3", "1.4"}));
  th->add_option("--config", config)->required();
  th->add_option("--out", out);
  th->add_option("--seed", seed);
  th->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  th->add_option("--format", th_format)->check(CLI::IsMember({"csv", "json"}));
  th->add_flag("--truncation", truncation, "also rerun with delta halved (czo)");

  std::vector<std::string> csvs;
  auto* report = app.add_subcommand("report", "render sweep CSV files as SVG plots");
  report->add_option("--csv", csvs, "sweep CSV files")->required()->check(CLI::ExistingFile);
  report->add_option("--out", out, "output directory");

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*weights) return cmd_weights(power, wp, wq, wg, format);
    if (*norm) return cmd_norm(space, kind, center, scale, amplitude, np, kappa, na, nb, ng, format);
    if (*apply) return cmd_apply(config.empty() ? parse_config("[functions]\ndilations = [1.0]\n") : load_config(config), translation, dilation, out);
    if (*l31 || *l41) return cmd_lemma(load_config(config), static_cast<bool>(*l41), random, seed);
    if (*tail) return cmd_tail(load_config(config));
    if (*kc) return cmd_kernel(kernel, samples, seed);
    if (*th) {
      auto cfg = load_config(config);
      if (th->count("--seed")) cfg.seed = seed;
      return cmd_theorem(cfg, theorem_id, out, th_format, jobs, truncation);
    }
    if (*report) {
      for (const auto& path : csvs) {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        const auto series = read_ratio_csv(ss.str());
        const fs::path p(path);
        const fs::path dir = out.empty() ? p.parent_path() : fs::path(out);
        const auto target = dir / (p.stem().string() + ".svg");
        write_file(target, render_svg(series, p.stem().string() + ": ratio vs dilation"));
        std::cout << "wrote " << target.string() << '\n';
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace morrey
