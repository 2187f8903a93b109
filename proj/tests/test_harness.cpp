#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "morrey/harness.hpp"

using namespace morrey;

namespace {

const char* kFractional = R"(
theorem = "1.3"
[lattice]
n = 1
half_width = 8.0
points = 129
[family]
center_stride = 2
count = 7
[operator]
kind = "fractional"
alpha = 0.5
[exponents]
p = [2.0, 2.0]
kappa = 0.25
[weights]
power = [0.2, -0.1]
[functions]
dilations = { min = 0.04, max = 4.0, count = 20 }
)";

const char* kCzo = R"(
theorem = "1.1"
[lattice]
n = 1
half_width = 8.0
points = 257
[family]
center_stride = 4
count = 8
[operator]
kind = "czo"
kernel = "homogeneous-odd"
[exponents]
p = [2.0, 2.0]
kappa = 0.5
[weights]
power = [0.3, -0.2]
[functions]
dilations = [0.25, 0.35, 0.5, 0.7, 1.0, 1.4, 2.0, 2.4, 2.8, 3.2]
)";

std::string with(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

std::string config_path(const char* name) { return std::string(MORREY_SOURCE_DIR) + "/configs/" + name; }

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "morreylab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kFractional);
  CHECK(cfg.theorem == "1.3");
  CHECK(cfg.fractional());
  CHECK(cfg.lattice().spacing() == doctest::Approx(0.125));
  REQUIRE(cfg.functions.dilations.size() == 20);
  CHECK(cfg.functions.dilations.front() == doctest::Approx(0.04).epsilon(1e-14));
  CHECK(cfg.functions.dilations.back() == doctest::Approx(4.0).epsilon(1e-14));
  const double step = cfg.functions.dilations[1] / cfg.functions.dilations[0];
  CHECK(step == doctest::Approx(std::pow(100.0, 1.0 / 19)).epsilon(1e-12));

  SUBCASE("round trip through json echo") {
    const auto j = cfg.to_json();
    CHECK(j["exponents"]["kappa"] == 0.25);
    CHECK(j["operator"]["kind"] == "fractional");
  }
  SUBCASE("unknown key") { CHECK_THROWS_AS(parse_config(with(kFractional, "kappa", "kapa")), ConfigError); }
  SUBCASE("operator does not match theorem") {
    CHECK_THROWS_AS(parse_config(with(kFractional, "theorem = \"1.3\"", "theorem = \"1.1\"")), ConfigError);
  }
  SUBCASE("unknown theorem") {
    CHECK_THROWS_AS(parse_config(with(kFractional, "theorem = \"1.3\"", "theorem = \"2.1\"")), ConfigError);
  }
  SUBCASE("even point count") {
    CHECK_THROWS_AS(parse_config(with(kFractional, "points = 129", "points = 128")), ConfigError);
  }
  SUBCASE("dense sums capped beyond n = 1") {
    CHECK_THROWS_AS(parse_config(with(kFractional, "n = 1", "n = 2")), ConfigError);
  }
  SUBCASE("alpha out of range") {
    CHECK_THROWS_AS(parse_config(with(kFractional, "alpha = 0.5", "alpha = 2.5")), ConfigError);
  }
  SUBCASE("mismatched weight count") {
    CHECK_THROWS_AS(parse_config(with(kFractional, "power = [0.2, -0.1]", "power = [0.2]")), ConfigError);
  }
  SUBCASE("malformed toml") { CHECK_THROWS_AS(parse_config("theorem = "), ConfigError); }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_config("/nonexistent/c.toml"), ConfigError); }
}

TEST_CASE("power weight windows") {
  CHECK(power_in_ap(0.5, 2.0, 1));
  CHECK_FALSE(power_in_ap(1.0, 2.0, 1));
  CHECK_FALSE(power_in_ap(-1.0, 2.0, 1));
  CHECK(power_in_ap(-0.5, 1.0, 1));
  CHECK(power_in_ap(0.0, 1.0, 1));
  CHECK_FALSE(power_in_ap(0.1, 1.0, 1));
  CHECK(power_in_ap(1.9, 2.0, 2));
}

TEST_CASE("hypothesis validator flags exactly the kappa window") {
  SUBCASE("fractional: kappa < p/q") {
    // p = 1, q = 2 for alpha = 1/2, p_i = 2
    auto cfg = parse_config(kFractional);
    CHECK(validate_hypotheses(cfg).ok());
    cfg.kappa = 0.49;
    CHECK(validate_hypotheses(cfg).ok());
    cfg.kappa = 0.5;
    CHECK_FALSE(validate_hypotheses(cfg).ok());
    cfg.kappa = 0.75;
    const auto h = validate_hypotheses(cfg);
    REQUIRE(h.violations.size() == 1);
    CHECK(h.violations[0].find("kappa") != std::string::npos);
  }
  SUBCASE("czo: kappa < 1") {
    auto cfg = parse_config(kCzo);
    CHECK(validate_hypotheses(cfg).ok());
    cfg.kappa = 0.99;
    CHECK(validate_hypotheses(cfg).ok());
    cfg.kappa = 1.0;
    CHECK(validate_hypotheses(cfg).violations.size() == 1);
  }
  SUBCASE("weights outside the multiple-weight class") {
    auto cfg = parse_config(kCzo);
    cfg.weights = {1.5, 0.0};  // w^(1-p') = |x|^-1.5 is not locally integrable
    CHECK_FALSE(validate_hypotheses(cfg).ok());
    auto f = parse_config(kFractional);
    f.weights = {0.6, 0.0};  // w^(-p') = |x|^-1.2
    CHECK_FALSE(validate_hypotheses(f).ok());
  }
  SUBCASE("endpoint theorems need min p = 1") {
    auto cfg = parse_config(kFractional);
    cfg.theorem = "1.4";
    CHECK_FALSE(validate_hypotheses(cfg).ok());
    cfg.p = {1.0, 2.0};
    cfg.weights = {0.0, 0.0};
    cfg.kappa = 0.25;
    CHECK(validate_hypotheses(cfg).ok());
    cfg.weights = {0.1, 0.0};  // 1/w_1 unbounded at the origin
    CHECK_FALSE(validate_hypotheses(cfg).ok());
  }
}

TEST_CASE("corpus order and bump shape") {
  auto cfg = parse_config(kCzo);
  cfg.functions.translations = {0.0, 1.0};
  cfg.functions.amplitudes = {1.0, -2.0};
  const auto c = corpus(cfg);
  REQUIRE(c.size() == 40);
  CHECK(c[0].translation == 0.0);
  CHECK(c[0].dilation == 0.25);
  CHECK(c[1].amplitude == -2.0);
  CHECK(c[2].dilation == 0.35);
  CHECK(c[20].translation == 1.0);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i].id == i);

  const auto lat = cfg.lattice();
  const auto f = bump(lat, Point{}, 1.0, 2.0);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double x = lat.point(i)[0];
    const double want = std::abs(x) < 1.0 ? 2.0 * std::pow(1.0 - x * x, 3) : 0.0;
    CHECK(f[i] == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("ratio is invariant under amplitude changes") {
  auto cfg = parse_config(kFractional);
  cfg.functions.dilations = {0.05, 0.3, 1.0, 3.0};
  cfg.functions.amplitudes = {1.0, 7.5, -0.02};
  const auto r = sweep(cfg);
  REQUIRE(r.results.size() == 12);
  for (std::size_t i = 0; i < r.results.size(); i += 3)
    for (std::size_t k = 1; k < 3; ++k) {
      CHECK(r.results[i + k].ratio == doctest::Approx(r.results[i].ratio).epsilon(1e-10));
      CHECK(r.results[i + k].weak_ratio == doctest::Approx(r.results[i].weak_ratio).epsilon(1e-10));
    }
}

TEST_CASE("unweighted ratio is invariant under family-aligned translations") {
  auto cfg = parse_config(kFractional);
  cfg.weights = {0.0, 0.0};
  cfg.center_extent = cfg.half_width;
  const double step = cfg.center_stride * cfg.lattice().spacing();
  cfg.functions.translations = {0.0, 4 * step, -6 * step};
  cfg.functions.dilations = {0.2, 0.5, 1.0, 1.5};
  const auto r = sweep(cfg);
  REQUIRE(r.results.size() == 12);
  for (std::size_t i = 4; i < 12; ++i)
    CHECK(r.results[i].ratio == doctest::Approx(r.results[i % 4].ratio).epsilon(1e-10));
}

TEST_CASE("identical instances give spread 1") {
  auto cfg = parse_config(kCzo);
  cfg.functions.dilations.assign(10, 1.0);
  const auto r = sweep(cfg);
  CHECK(r.spread == 1.0);
  CHECK(r.pass == true);
}

TEST_CASE("weak left side never exceeds the strong left side") {
  for (const char* text : {kFractional, kCzo}) {
    const auto r = sweep(parse_config(text));
    for (const auto& x : r.results) {
      CHECK(x.left_weak <= x.left_strong * (1 + 1e-12));
      CHECK(x.weak_ratio <= x.strong_ratio * (1 + 1e-12));
    }
  }
}

TEST_CASE("sweep output does not depend on the thread count") {
  auto cfg = parse_config(kFractional);
  const auto one = to_csv(sweep(cfg, 1));
  CHECK(one == to_csv(sweep(cfg, 3)));
  CHECK(one == to_csv(sweep(cfg, 8)));
}

TEST_CASE("sweep rejects supports leaving the central half") {
  auto cfg = parse_config(kCzo);
  cfg.functions.dilations.back() = 4.5;
  const auto r = sweep(cfg);
  CHECK(r.rejected == 1);
  CHECK(r.results[9].rejected);
  CHECK_FALSE(r.results[0].rejected);
  CHECK(std::isfinite(r.spread));
}

TEST_CASE("a sweep needs at least ten instances") {
  auto cfg = parse_config(kCzo);
  cfg.functions.dilations.resize(9);
  CHECK_THROWS_AS(sweep(cfg), ConfigError);
}

TEST_CASE("broken kappa gives verdict n/a but still runs") {
  auto cfg = parse_config(kFractional);
  cfg.kappa = 0.75;
  const auto r = sweep(cfg);
  CHECK_FALSE(r.hypotheses_ok);
  CHECK_FALSE(r.pass.has_value());
  CHECK(r.results.size() == 20);
  CHECK_FALSE(r.warnings.empty());
  CHECK(to_json(r)["pass"] == "n/a");
}

TEST_CASE("csv and svg output") {
  auto cfg = parse_config(kCzo);
  const auto r = sweep(cfg);
  const auto csv = to_csv(r);
  CHECK(csv.rfind("instance,translation,dilation,amplitude,ratio", 0) == 0);
  const auto s = read_ratio_csv(csv);
  REQUIRE(s.x.size() == r.results.size());
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    CHECK(s.x[i] == r.results[i].instance.dilation);
    CHECK(s.y[i] == r.results[i].ratio);
  }
  const auto svg = render_svg(s, "t");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(render_svg(CsvSeries{}, "empty").find("no finite data") != std::string::npos);
}

TEST_CASE("product lemma") {
  const auto cfg = parse_config(kCzo);
  const auto fam = cfg.family();
  SUBCASE("unit weights give C = 1") {
    const std::vector<Weight> ws{Weight::unit(1), Weight::unit(1)};
    const auto r = check_product_lemma(ws, ExponentVector({2.0, 3.0}), fam);
    CHECK(r.constant.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.holder_ok);
    const auto f = check_product_lemma(ws, ExponentVector({2.0, 2.0}), fam, FractionalParams(0.5, ExponentVector({2.0, 2.0}), 1));
    CHECK(f.constant.value == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("Hoelder direction on random sampled weights") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const auto lat = cfg.lattice();
    for (int t = 0; t < 10; ++t) {
      std::vector<Weight> ws;
      for (int i = 0; i < 2; ++i) {
        std::vector<double> v(lat.size());
        for (auto& x : v) x = std::exp(u(rng));
        ws.push_back(Weight::sampled(GridFunction(lat, std::move(v))));
      }
      const auto r = check_product_lemma(ws, ExponentVector({1.5, 4.0}), fam);
      CHECK(r.holder_ok);
      CHECK(r.worst_holder <= 1 + 1e-8);
      CHECK(r.constant.value >= 1.0 - 1e-12);
      CHECK(check_product_lemma(ws, ExponentVector({2.0, 2.0}), fam,
                                FractionalParams(0.5, ExponentVector({2.0, 2.0}), 1))
                .holder_ok);
    }
  }
  SUBCASE("power weights against a closed form") {
    // centered ball: (int |x|^(1/2) int |x|^(-1/2))^(1/2) / |B| = 2/sqrt(3)
    BallFamily centered = fam;
    centered.balls = {Ball{Point{}, 1.0}};
    const std::vector<Weight> ws{Weight::power(0.5, 1), Weight::power(-0.5, 1)};
    const auto r = check_product_lemma(ws, ExponentVector({2.0, 2.0}), centered);
    CHECK(r.constant.value == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
  }
}

TEST_CASE("finiteness classification") {
  CHECK(classify(1.0, 1.01, 0.05) == Finiteness::Finite);
  CHECK(classify(1.0, 2.5, 0.05) == Finiteness::Divergent);
  CHECK(classify(1.0, INFINITY, 0.05) == Finiteness::Divergent);
  CHECK(classify(1.0, 1.5, 0.05) == Finiteness::Indeterminate);
  CHECK(std::string(to_string(Finiteness::Finite)) == "finite");
}

TEST_CASE("corollary chain") {
  SUBCASE("weights in the class: every stage finite") {
    auto cfg = parse_config(kFractional);
    const auto r = check_corollaries(cfg);
    for (const auto& s : r.singles) CHECK(s.status == Finiteness::Finite);
    CHECK(r.multi.status == Finiteness::Finite);
    REQUIRE(r.sweep.has_value());
    CHECK(r.pass());
  }
  SUBCASE("czo chain") {
    const auto r = check_corollaries(parse_config(kCzo));
    CHECK(r.multi.status == Finiteness::Finite);
    CHECK(r.pass());
  }
  SUBCASE("a single weight outside its class diverges in both characterizations") {
    auto cfg = parse_config(kFractional);
    cfg.weights = {0.6, 0.0};
    const auto r = check_corollaries(cfg, false);
    CHECK(r.singles[0].status == Finiteness::Divergent);
    CHECK(r.equivalence[0].status == Finiteness::Divergent);
    CHECK(r.equivalence_ok);
    CHECK(r.chain_ok);
  }
}

TEST_CASE("tail corpus is deterministic and finite") {
  auto cfg = parse_config(kFractional);
  cfg.tail.instances = 2;
  cfg.tail.balls_per_instance = 4;
  const auto a = tail_corpus(cfg, 3);
  const auto b = tail_corpus(cfg, 3);
  CHECK(a.ratio_max == b.ratio_max);
  for (double v : a.ratio_max) {
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
  }
}

TEST_CASE("cli exit codes") {
  CHECK(cli({}) != 0);
  CHECK(cli({"bogus"}) == 2);
  CHECK(cli({"verify", "theorem", "1.3", "--config", "/nonexistent.toml"}) == 2);
  CHECK(cli({"verify", "theorem", "1.1", "--config", config_path("theorem_1_3.toml")}) == 2);
  CHECK(cli({"verify", "theorem", "1.3", "--config", config_path("theorem_1_3.toml")}) == 0);
  CHECK(cli({"verify", "theorem", "1.3", "--config", config_path("broken_kappa.toml")}) == 1);
  CHECK(cli({"verify", "kernel-class", "--kernel", "homogeneous-odd", "--samples", "2000"}) == 0);
  CHECK(cli({"verify", "kernel-class", "--kernel", "jump-angular", "--samples", "2000"}) == 1);
  CHECK(cli({"verify", "lemma31", "--config", config_path("lemma31.toml")}) == 0);
  CHECK(cli({"weights", "--power", "0.5", "--p", "2"}) == 0);
  CHECK(cli({"norm", "--space", "weak-morrey", "--p", "2", "--kappa", "0.5"}) == 0);
}
