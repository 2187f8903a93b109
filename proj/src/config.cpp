#include "morrey/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "toml.hpp"

namespace morrey {

namespace {

void check_keys(const toml::table& t, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : t) {
    const std::string key(k.str());
    if (!allowed.count(key))
      throw ConfigError(fmt::format("unknown key '{}' in {}", key, where.empty() ? "top level" : "[" + where + "]"));
  }
}

const toml::table* section(const toml::table& root, const char* name) {
  const auto* node = root.get(name);
  if (!node) return nullptr;
  const auto* t = node->as_table();
  if (!t) throw ConfigError(fmt::format("'{}' must be a table", name));
  return t;
}

double number(const toml::node& n, const std::string& what) {
  if (auto v = n.value<double>()) return *v;
  throw ConfigError(fmt::format("'{}' must be a number", what));
}

template <class T>
void read(const toml::table* t, const char* key, T& out, const std::string& where) {
  if (!t) return;
  const auto* n = t->get(key);
  if (!n) return;
  const std::string what = where + "." + key;
  if constexpr (std::is_same_v<T, double>) {
    out = number(*n, what);
  } else if constexpr (std::is_same_v<T, int>) {
    auto v = n->value<std::int64_t>();
    if (!v) throw ConfigError(fmt::format("'{}' must be an integer", what));
    out = static_cast<int>(*v);
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    auto v = n->value<std::int64_t>();
    if (!v || *v < 0) throw ConfigError(fmt::format("'{}' must be a nonnegative integer", what));
    out = static_cast<std::uint64_t>(*v);
  } else if constexpr (std::is_same_v<T, std::string>) {
    auto v = n->value<std::string>();
    if (!v) throw ConfigError(fmt::format("'{}' must be a string", what));
    out = *v;
  } else if constexpr (std::is_same_v<T, std::vector<double>>) {
    const auto* arr = n->as_array();
    if (!arr) throw ConfigError(fmt::format("'{}' must be an array of numbers", what));
    out.clear();
    for (const auto& e : *arr) out.push_back(number(e, what));
  }
}

std::vector<double> read_dilations(const toml::node& n) {
  if (n.is_array()) {
    std::vector<double> v;
    for (const auto& e : *n.as_array()) v.push_back(number(e, "functions.dilations"));
    return v;
  }
  const auto* t = n.as_table();
  if (!t) throw ConfigError("'functions.dilations' must be an array or {min, max, count}");
  check_keys(*t, "functions.dilations", {"min", "max", "count"});
  double lo = 0, hi = 0;
  int count = 0;
  read(t, "min", lo, "functions.dilations");
  read(t, "max", hi, "functions.dilations");
  read(t, "count", count, "functions.dilations");
  if (!(lo > 0) || !(hi >= lo) || count < 1)
    throw ConfigError("geometric dilations need 0 < min <= max and count >= 1");
  std::vector<double> v;
  for (int k = 0; k < count; ++k)
    v.push_back(count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
  return v;
}

void validate(const ExperimentConfig& c) {
  static const std::set<std::string> theorems{"1.1", "1.2", "1.3", "1.4"};
  if (!theorems.count(c.theorem)) throw ConfigError(fmt::format("unknown theorem '{}'", c.theorem));
  try {
    (void)c.lattice();
    (void)c.family();
    (void)c.exponents();
    if (c.fractional()) (void)c.fractional_params();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.n != 1 && c.degree() == 2 && c.points > 65)
    throw ConfigError("dense sums beyond n = 1 are limited to 65 points per axis");
  if (c.weights.size() != c.p.size())
    throw ConfigError(fmt::format("{} weight exponents given for {} input exponents", c.weights.size(), c.p.size()));
  for (double a : c.weights)
    if (!(a > -c.n)) throw ConfigError(fmt::format("weight |x|^{} is not locally integrable", a));
  if (!(c.kappa > 0)) throw ConfigError("kappa must be positive");
  const bool czo_theorem = c.theorem == "1.1" || c.theorem == "1.2";
  if (czo_theorem == c.fractional())
    throw ConfigError(fmt::format("theorem {} needs the {} operator", c.theorem, czo_theorem ? "czo" : "fractional"));
  if (!c.fractional()) {
    try {
      (void)c.kernel();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!(c.op.delta_cells >= 1.0)) throw ConfigError("delta_cells must be at least 1");
  }
  const auto& f = c.functions;
  if (f.shape != "bump") throw ConfigError(fmt::format("unknown function shape '{}'", f.shape));
  if (f.dilations.empty()) throw ConfigError("functions.dilations is empty");
  for (double s : f.dilations)
    if (!(s > 0)) throw ConfigError("dilations must be positive");
  for (double a : f.amplitudes)
    if (a == 0.0 || !std::isfinite(a)) throw ConfigError("amplitudes must be finite and nonzero");
  if (f.translations.empty() || f.amplitudes.empty()) throw ConfigError("empty translation or amplitude list");
  if (!(c.tol.spread >= 1.0)) throw ConfigError("spread threshold must be at least 1");
  if (c.tail.instances < 1 || c.tail.balls_per_instance < 1 || !(c.tail.slack >= 1.0))
    throw ConfigError("tail corpus needs instances >= 1, balls_per_instance >= 1, slack >= 1");
}

}  // namespace

Lattice ExperimentConfig::lattice() const { return make_lattice(n, half_width, points); }

BallFamilySpec ExperimentConfig::family_spec() const {
  BallFamilySpec s;
  s.center_stride = center_stride;
  s.r0 = r0_cells * lattice().spacing();
  s.count = count;
  s.center_extent = center_extent;
  return s;
}

BallFamily ExperimentConfig::family() const { return make_ball_family(lattice(), family_spec()); }

std::vector<Weight> ExperimentConfig::weight_list() const {
  std::vector<Weight> ws;
  for (double a : weights) ws.push_back(Weight::power(a, n));
  return ws;
}

ExponentVector ExperimentConfig::exponents() const { return ExponentVector(p); }

FractionalParams ExperimentConfig::fractional_params() const {
  return FractionalParams(op.alpha, exponents(), n);
}

KernelSpec ExperimentConfig::kernel() const {
  KernelSpec k;
  if (op.kernel == "homogeneous-odd")
    k = KernelSpec::homogeneous_odd();
  else if (op.kernel == "fractional-size")
    k = KernelSpec::fractional_size(degree(), n);
  else if (op.kernel == "jump-angular")
    k = KernelSpec::jump_angular();
  else
    throw std::invalid_argument(fmt::format("unknown kernel '{}'", op.kernel));
  if (k.m != degree() || k.n != n)
    throw std::invalid_argument(fmt::format("kernel '{}' is defined for m = {}, n = {}", op.kernel, k.m, k.n));
  return k;
}

TruncationPolicy ExperimentConfig::truncation() const { return {op.delta_cells * lattice().spacing()}; }

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j{{"theorem", theorem},
                   {"seed", seed},
                   {"lattice", {{"n", n}, {"half_width", half_width}, {"points", points}}},
                   {"family", {{"center_stride", center_stride}, {"r0_cells", r0_cells}, {"count", count}}},
                   {"exponents", {{"p", p}, {"kappa", kappa}}},
                   {"weights", {{"power", weights}}},
                   {"functions",
                    {{"shape", functions.shape},
                     {"translations", functions.translations},
                     {"dilations", functions.dilations},
                     {"amplitudes", functions.amplitudes},
                     {"pair_offset", functions.pair_offset}}},
                   {"tolerances",
                    {{"spread", tol.spread},
                     {"truncation", tol.truncation},
                     {"algebraic", tol.algebraic},
                     {"refinement", tol.refinement}}}};
  if (center_extent) j["family"]["center_extent"] = *center_extent;
  if (fractional())
    j["operator"] = {{"kind", "fractional"},
                     {"alpha", op.alpha},
                     {"singular", op.singular == SingularCell::Integrate ? "integrate" : "skip"}};
  else
    j["operator"] = {{"kind", "czo"}, {"kernel", op.kernel}, {"delta_cells", op.delta_cells}};
  return j;
}

ExperimentConfig parse_config(const std::string& text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.description() << " at " << e.source().begin;
    throw ConfigError("TOML parse error: " + os.str());
  }
  check_keys(root, "", {"theorem", "seed", "lattice", "family", "operator", "exponents", "weights", "functions",
                        "tolerances", "tail"});
  ExperimentConfig c;
  read(&root, "theorem", c.theorem, "");
  read(&root, "seed", c.seed, "");

  if (const auto* t = section(root, "lattice")) {
    check_keys(*t, "lattice", {"n", "half_width", "points"});
    read(t, "n", c.n, "lattice");
    read(t, "half_width", c.half_width, "lattice");
    read(t, "points", c.points, "lattice");
  }
  if (const auto* t = section(root, "family")) {
    check_keys(*t, "family", {"center_stride", "r0_cells", "count", "center_extent"});
    read(t, "center_stride", c.center_stride, "family");
    read(t, "r0_cells", c.r0_cells, "family");
    read(t, "count", c.count, "family");
    if (t->get("center_extent")) {
      double e = 0;
      read(t, "center_extent", e, "family");
      c.center_extent = e;
    }
  }
  if (const auto* t = section(root, "operator")) {
    check_keys(*t, "operator", {"kind", "kernel", "delta_cells", "alpha", "singular"});
    std::string kind = "fractional", singular = "integrate";
    read(t, "kind", kind, "operator");
    if (kind == "czo")
      c.op.kind = OperatorKind::Czo;
    else if (kind == "fractional")
      c.op.kind = OperatorKind::Fractional;
    else
      throw ConfigError(fmt::format("unknown operator kind '{}'", kind));
    read(t, "kernel", c.op.kernel, "operator");
    read(t, "delta_cells", c.op.delta_cells, "operator");
    read(t, "alpha", c.op.alpha, "operator");
    read(t, "singular", singular, "operator");
    if (singular == "integrate")
      c.op.singular = SingularCell::Integrate;
    else if (singular == "skip")
      c.op.singular = SingularCell::Skip;
    else
      throw ConfigError(fmt::format("unknown singular rule '{}'", singular));
  }
  if (const auto* t = section(root, "exponents")) {
    check_keys(*t, "exponents", {"p", "kappa"});
    read(t, "p", c.p, "exponents");
    read(t, "kappa", c.kappa, "exponents");
  }
  c.weights.assign(c.p.size(), 0.0);
  if (const auto* t = section(root, "weights")) {
    check_keys(*t, "weights", {"power"});
    read(t, "power", c.weights, "weights");
  }
  if (const auto* t = section(root, "functions")) {
    check_keys(*t, "functions", {"shape", "translations", "dilations", "amplitudes", "pair_offset"});
    read(t, "shape", c.functions.shape, "functions");
    read(t, "translations", c.functions.translations, "functions");
    read(t, "amplitudes", c.functions.amplitudes, "functions");
    read(t, "pair_offset", c.functions.pair_offset, "functions");
    if (const auto* d = t->get("dilations")) c.functions.dilations = read_dilations(*d);
  }
  if (const auto* t = section(root, "tolerances")) {
    check_keys(*t, "tolerances", {"spread", "truncation", "algebraic", "refinement"});
    read(t, "spread", c.tol.spread, "tolerances");
    read(t, "truncation", c.tol.truncation, "tolerances");
    read(t, "algebraic", c.tol.algebraic, "tolerances");
    read(t, "refinement", c.tol.refinement, "tolerances");
  }
  if (const auto* t = section(root, "tail")) {
    check_keys(*t, "tail", {"instances", "calibration_seed", "heldout_seed", "balls_per_instance", "slack"});
    read(t, "instances", c.tail.instances, "tail");
    read(t, "calibration_seed", c.tail.calibration_seed, "tail");
    read(t, "heldout_seed", c.tail.heldout_seed, "tail");
    read(t, "balls_per_instance", c.tail.balls_per_instance, "tail");
    read(t, "slack", c.tail.slack, "tail");
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

bool power_in_ap(double a, double r, int n) {
  if (!(a > -n)) return false;
  if (r == 1.0) return a <= 0.0;
  if (std::isinf(r)) return true;
  return a < n * (r - 1.0);
}

HypothesisCheck validate_hypotheses(const ExperimentConfig& c) {
  HypothesisCheck h;
  const int m = c.degree(), n = c.n;
  const auto P = c.exponents();
  const double pmin = *std::min_element(c.p.begin(), c.p.end());
  const bool endpoint = c.theorem == "1.2" || c.theorem == "1.4";
  if (endpoint && pmin != 1.0)
    h.violations.push_back(fmt::format("theorem {} needs min p_i = 1, got {}", c.theorem, pmin));
  if (!endpoint && pmin <= 1.0)
    h.violations.push_back(fmt::format("theorem {} needs every p_i > 1", c.theorem));

  if (!c.fractional()) {
    if (!(c.kappa < 1.0)) h.violations.push_back(fmt::format("kappa = {} is outside (0, 1)", c.kappa));
    // A_P: nu in A_{mp}, w_i^{1-p_i'} in A_{mp_i'} (w_i^{1/m} in A_1 when p_i = 1)
    double a_nu = 0.0;
    for (int i = 0; i < m; ++i) a_nu += c.weights[i] * P.p() / P[i];
    if (!power_in_ap(a_nu, m * P.p(), n))
      h.violations.push_back(fmt::format("nu = |x|^{} is not in A_{}", a_nu, m * P.p()));
    for (int i = 0; i < m; ++i) {
      const double a = c.weights[i];
      if (P[i] == 1.0) {
        if (!power_in_ap(a / m, 1.0, n))
          h.violations.push_back(fmt::format("w_{}^(1/m) = |x|^{} is not in A_1", i + 1, a / m));
      } else {
        const double pc = P.conjugate(i);
        if (!power_in_ap(a * (1 - pc), m * pc, n))
          h.violations.push_back(fmt::format("w_{}^(1-p') = |x|^{} is not in A_{}", i + 1, a * (1 - pc), m * pc));
      }
      if (!(a > -n)) h.violations.push_back(fmt::format("w_{} is not in A_inf", i + 1));
    }
  } else {
    const auto fp = c.fractional_params();
    const double q = fp.q();
    if (!(c.kappa < P.p() / q))
      h.violations.push_back(fmt::format("kappa = {} is outside (0, p/q) = (0, {})", c.kappa, P.p() / q));
    // A_{P,q}: nu^q in A_{mq}, w_i^{-p_i'} in A_{mp_i'}; p_i = 1 needs 1/w_i bounded on balls
    double a_nu = 0.0;
    for (double a : c.weights) a_nu += a;
    if (!power_in_ap(q * a_nu, m * q, n))
      h.violations.push_back(fmt::format("nu^q = |x|^{} is not in A_{}", q * a_nu, m * q));
    for (int i = 0; i < m; ++i) {
      const double a = c.weights[i];
      if (P[i] == 1.0) {
        if (a > 0.0) h.violations.push_back(fmt::format("1/w_{} is unbounded near the origin", i + 1));
      } else {
        const double pc = P.conjugate(i);
        if (!power_in_ap(-a * pc, m * pc, n))
          h.violations.push_back(fmt::format("w_{}^(-p') = |x|^{} is not in A_{}", i + 1, -a * pc, m * pc));
      }
      if (!(a * fp.q(i) > -n)) h.violations.push_back(fmt::format("w_{}^q_{} is not in A_inf", i + 1, i + 1));
      // informational: the product window w_i in A_{p_i,q_i}
      if (P[i] > 1.0) {
        const double lo = -n / fp.q(i), hi = n * (1 - 1 / P[i]);
        if (!(a > lo && a < hi))
          h.notes.push_back(fmt::format("w_{} lies outside the A_(p_i,q_i) window ({}, {})", i + 1, lo, hi));
      }
    }
  }
  return h;
}

}  // namespace morrey
