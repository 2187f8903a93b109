#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "morrey/lattice.hpp"
#include "morrey/operators.hpp"
#include "morrey/weights.hpp"

namespace morrey {

// Malformed or out-of-domain configuration (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OperatorKind { Czo, Fractional };

struct OperatorSpec {
  OperatorKind kind = OperatorKind::Fractional;
  std::string kernel = "homogeneous-odd";
  double delta_cells = 2.0;  // truncation radius in spacings
  double alpha = 0.5;
  SingularCell singular = SingularCell::Integrate;
};

struct FunctionCorpus {
  std::string shape = "bump";  // (1 - |x/s|^2)^3 on |x| < s
  std::vector<double> translations{0.0};
  std::vector<double> dilations;
  std::vector<double> amplitudes{1.0};
  double pair_offset = 0.0;  // centre of f_k is translation + k * pair_offset * s
};

struct Tolerances {
  double spread = 10.0;
  double truncation = 0.2;
  double algebraic = 1e-10;
  double refinement = 0.05;
};

struct TailSpec {
  int instances = 20;
  std::uint64_t calibration_seed = 11;
  std::uint64_t heldout_seed = 29;
  int balls_per_instance = 64;
  double slack = 1.2;
};

struct ExperimentConfig {
  std::string theorem = "1.3";
  std::uint64_t seed = 1;
  int n = 1;
  double half_width = 8.0;
  int points = 129;
  int center_stride = 2;
  double r0_cells = 1.0;
  int count = 8;
  std::optional<double> center_extent;
  OperatorSpec op;
  std::vector<double> p{2.0, 2.0};
  double kappa = 0.25;
  std::vector<double> weights{0.0, 0.0};  // power exponents a_i
  FunctionCorpus functions;
  Tolerances tol;
  TailSpec tail;

  int degree() const { return static_cast<int>(p.size()); }
  bool fractional() const { return op.kind == OperatorKind::Fractional; }
  bool weak() const { return theorem == "1.2" || theorem == "1.4"; }
  Lattice lattice() const;
  BallFamilySpec family_spec() const;
  BallFamily family() const;
  std::vector<Weight> weight_list() const;
  ExponentVector exponents() const;
  FractionalParams fractional_params() const;
  KernelSpec kernel() const;
  TruncationPolicy truncation() const;
  nlohmann::json to_json() const;
};

ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::string& path);

// |x|^a in A_r (r >= 1): -n < a < n(r - 1), or -n < a <= 0 when r = 1.
bool power_in_ap(double a, double r, int n);

struct HypothesisCheck {
  std::vector<std::string> violations;
  std::vector<std::string> notes;
  bool ok() const { return violations.empty(); }
};

// The kappa window, the exponent conditions and the weight class of the
// requested theorem, with power weights tested through the A_r windows of the
// multiple-weight characterizations.
HypothesisCheck validate_hypotheses(const ExperimentConfig& cfg);

}  // namespace morrey
