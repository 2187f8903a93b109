#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "morrey/lattice.hpp"
#include "morrey/report.hpp"

namespace morrey {

// A weight is either the power |x|^a (a > -n) or a strictly positive sampled
// grid function.
class Weight {
 public:
  static Weight power(double exponent, int dim);
  static Weight sampled(GridFunction values);
  static Weight unit(int dim) { return power(0.0, dim); }

  bool is_power() const { return std::holds_alternative<Power>(form_); }
  double exponent() const;
  const GridFunction& grid() const;
  int dim() const;
  std::string describe() const;

 private:
  struct Power {
    double exponent;
    int dim;
  };
  explicit Weight(std::variant<Power, GridFunction> form) : form_(std::move(form)) {}
  std::variant<Power, GridFunction> form_;
};

// Node values of w on the lattice. A power weight carries |x|^a at every node
// except the origin, which carries the cell average of |x|^a.
GridFunction sample(const Weight& w, const Lattice& lattice);

// w^t as a weight. Throws when the result is not locally integrable.
Weight weight_power(const Weight& w, double t);

// w(B). Power weights in n = 1 use the exact antiderivative; everything else
// is the midpoint quadrature of the node samples.
double weight_measure(const Weight& w, const Ball& ball, const Lattice& lattice);
// w(B) for every ball of the family, same rules as weight_measure.
std::vector<double> weight_measures(const Weight& w, const BallFamily& family);

// Integral of |z|^e over the unit cube [-1/2, 1/2]^d; +inf when e <= -d.
double cube_power_integral(int d, double e);

// Integral of |x|^e over [lo, hi]; +inf when the singularity at 0 is not
// integrable.
double power_integral_1d(double e, double lo, double hi);

class ExponentVector {
 public:
  explicit ExponentVector(std::vector<double> exponents);

  int degree() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[i]; }
  std::span<const double> values() const { return p_; }
  // 1/p = sum 1/p_i
  double p() const { return p_total_; }
  // p_i / (p_i - 1), +inf for p_i = 1
  double conjugate(int i) const;

 private:
  std::vector<double> p_;
  double p_total_;
};

class FractionalParams {
 public:
  FractionalParams(double alpha, ExponentVector exponents, int dim);

  double alpha() const { return alpha_; }
  const ExponentVector& exponents() const { return exps_; }
  int dim() const { return dim_; }
  int degree() const { return exps_.degree(); }
  // 1/q_k = 1/p_k - alpha/(mn)
  double q(int k) const { return q_k_[k]; }
  // 1/q = 1/p - alpha/n
  double q() const { return q_; }

 private:
  double alpha_;
  ExponentVector exps_;
  int dim_;
  std::vector<double> q_k_;
  double q_;
};

enum class NuMode { Czo, Fractional };

// Czo: prod w_i^{p/p_i}. Fractional: prod w_i. Power inputs stay power
// weights (exponents add); anything sampled makes the product sampled.
Weight nu_weight(std::span<const Weight> ws, const ExponentVector& exps, NuMode mode);

EstimateReport muckenhoupt_constant(const Weight& w, double p, const BallFamily& family);
EstimateReport apq_constant(const Weight& w, double p, double q, const BallFamily& family);
EstimateReport multi_ap_constant(std::span<const Weight> ws, const ExponentVector& exps,
                                 const BallFamily& family);
EstimateReport multi_apq_constant(std::span<const Weight> ws, const ExponentVector& exps, double q,
                                  const BallFamily& family);
EstimateReport doubling_constant(const Weight& w, const BallFamily& family);

struct WeightDiagnostics {
  EstimateReport doubling;
  EstimateReport reverse_jensen;
  std::optional<EstimateReport> delta;        // A_inf comparability exponent of w
  std::optional<EstimateReport> delta_prime;  // same for w^q when q is given
  std::vector<std::string> warnings;
};

// Reverse-Jensen ratio and the fitted comparability exponent: the least
// squares slope of log(w(E)/w(B)) against log(|E|/|B|) over the concentric
// sub-balls E = B(c, r/2^k), k = 1..4, minimized over the family.
WeightDiagnostics ainfty_diagnostics(const Weight& w, const BallFamily& family,
                                     std::optional<double> q = std::nullopt);

// A constant counts as stable when it is finite at both levels and moves by
// at most `tolerance` relative.
bool stable_under_refinement(double coarse, double fine, double tolerance = 0.05);

}  // namespace morrey
