#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morrey/lattice.hpp"
#include "morrey/weights.hpp"

namespace morrey {

enum class KernelTag { HomogeneousOdd, FractionalSize, JumpAngular, Zero, Custom };

// K(x, y_1, ..., y_m) off the diagonal, with its declared class constants.
struct KernelSpec {
  KernelTag tag = KernelTag::Custom;
  std::string name;
  int m = 2;
  int n = 1;
  double size_constant = 1.0;  // declared A
  double epsilon = 1.0;        // declared regularity exponent
  std::function<double(const Point& x, std::span<const Point> ys)> evaluate;
  // Set when K depends only on (u, v) = (x - y_1, x - y_2) with n = 1, m = 2.
  std::function<double(double u, double v)> difference;

  // (u+v)/(u^2+v^2)^{3/2}, n = 1, m = 2. Odd, homogeneous of degree -2.
  static KernelSpec homogeneous_odd();
  // (sum_k |x - y_k|)^{-mn}, positive; size-only test kernel.
  static KernelSpec fractional_size(int m, int n);
  // sgn(u)/(u^2+v^2): obeys the size bound but jumps across u = 0.
  static KernelSpec jump_angular();
  static KernelSpec zero(int m, int n);
};

// Tuples with |(x - y_1, ..., x - y_m)| <= delta are left out of the sum.
struct TruncationPolicy {
  double delta;
  static TruncationPolicy grid_default(const Lattice& lattice) { return {2.0 * lattice.spacing()}; }
};

enum class SingularCell {
  Integrate,  // the all-coincident tuple carries the exact cell integral of the kernel
  Skip,       // the all-coincident tuple is dropped
};

// h^{mn} sum over untruncated y-tuples of K(x, y) prod f_i(y_i), at every node x.
GridFunction apply_czo(const KernelSpec& kernel, std::span<const GridFunction> fs,
                       const TruncationPolicy& trunc);

GridFunction apply_fractional(const FractionalParams& fp, std::span<const GridFunction> fs,
                              SingularCell rule = SingularCell::Integrate);

// |(u_1, ..., u_m)|^{alpha - mn} as a kernel; the diagonal is excluded by callers.
KernelSpec fractional_kernel(const FractionalParams& fp);

struct TailMode {
  bool fractional = false;
  double alpha = 0.0;  // fractional only
  static TailMode czo() { return {}; }
  static TailMode fractional_order(double alpha) { return {true, alpha}; }
};

// sum_{j=1}^{J} prod_i |2^{j+1}B|^{-theta} int_{2^{j+1}B} |f_i|, theta = 1 (czo)
// or 1 - alpha/(mn) (fractional), with exact ball volumes.
double tail_majorant(std::span<const GridFunction> fs, const Ball& ball, int annuli, const TailMode& mode);

struct SamplingPlan {
  int samples = 10000;
  std::uint64_t seed = 1;
  double slack = 0.05;
};

struct KernelClassReport {
  double size = 0.0;                // max |K| (sum |x - y_k|)^{mn}
  double regularity_x = 0.0;        // shifts of x
  std::vector<double> regularity_y;  // shifts of each y_k
  std::size_t tuples = 0;
  std::size_t skipped = 0;
  bool size_ok = false;
  bool regularity_ok = false;
  bool pass() const { return size_ok && regularity_ok; }
};

// Empirical size and regularity constants on random off-diagonal tuples, with
// shifts obeying |x - x'| <= max_k |x - y_k| / 2 (and likewise for y_k). Passes
// when every constant is at most the declared A times (1 + slack).
KernelClassReport verify_kernel_class(const KernelSpec& kernel, const SamplingPlan& plan);

}  // namespace morrey
