#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "morrey/config.hpp"
#include "morrey/operators.hpp"
#include "morrey/report.hpp"
#include "morrey/spaces.hpp"
#include "morrey/weights.hpp"

namespace morrey {

// ---------------------------------------------------------------- theorems

struct Instance {
  std::size_t id = 0;
  double translation = 0.0;
  double dilation = 1.0;
  double amplitude = 1.0;
};

// translations x dilations x amplitudes, dilation-major within a translation.
std::vector<Instance> corpus(const ExperimentConfig& cfg);

// (1 - |(x - c)/s|^2)^3 on |x - c| < s
GridFunction bump(const Lattice& lattice, const Point& center, double s, double amplitude = 1.0);

struct InstanceResult {
  Instance instance;
  bool rejected = false;
  std::string reason;
  double ratio = 0.0;         // the theorem's own pairing (weak left for 1.2 / 1.4)
  double strong_ratio = 0.0;  // strong left side
  double weak_ratio = 0.0;    // weak left side
  double left_strong = 0.0;
  double left_weak = 0.0;
  std::vector<double> right;  // per-input norms
};

// Holds everything shared by the instances of one config.
class TheoremRunner {
 public:
  explicit TheoremRunner(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  std::vector<GridFunction> inputs(const Instance& inst) const;
  GridFunction apply(std::span<const GridFunction> fs) const;
  // R = left / prod right with the exact norm pairing of the theorem.
  InstanceResult evaluate(const Instance& inst) const;
  InstanceResult evaluate(const Instance& inst, std::span<const GridFunction> fs) const;

 private:
  ExperimentConfig cfg_;
  Lattice lattice_;
  BallFamily family_;
  std::vector<Weight> ws_;
  Weight left_weight_;
  std::vector<Weight> right_u_, right_v_;
  MorreyParams left_params_;
  std::vector<MorreyParams> right_params_;
};

struct RatioReport {
  std::string theorem;
  std::vector<InstanceResult> results;
  double max = 0.0;
  double min = 0.0;
  double spread = 0.0;
  std::size_t argmax = 0;
  std::size_t argmin = 0;
  std::size_t rejected = 0;
  bool hypotheses_ok = true;
  std::optional<bool> pass;  // empty when the hypotheses fail
  std::vector<std::string> warnings;
  nlohmann::json config;
};

// Evaluates every instance (in parallel with `jobs` threads) and merges in
// instance order, so output does not depend on `jobs`.
RatioReport sweep(const ExperimentConfig& cfg, int jobs = 1);

struct TruncationReport {
  double delta_coarse = 0.0;
  double delta_fine = 0.0;
  std::vector<double> change;  // |R_fine / R_coarse - 1| per instance
  double max_change = 0.0;
  bool pass = false;
  RatioReport coarse, fine;
};

// Reruns a czo sweep with delta halved.
TruncationReport truncation_sensitivity(const ExperimentConfig& cfg, int jobs = 1);

// ------------------------------------------------------------------ lemmas

struct LemmaReport {
  EstimateReport constant;  // C_lemma = max LHS / RHS
  double worst_holder = 0.0;  // max RHS / LHS, at most 1 + 1e-8 when Hoelder holds
  bool holder_ok = false;
  std::size_t balls = 0;
};

// czo: LHS = prod (int_B w_i)^{p/p_i}, RHS = int_B nu.
// fractional: LHS = prod (int_B w_i^{q_i})^{q/q_i}, RHS = int_B nu^q.
LemmaReport check_product_lemma(std::span<const Weight> ws, const ExponentVector& exps,
                                const BallFamily& family,
                                const std::optional<FractionalParams>& fractional = std::nullopt);

enum class Finiteness { Finite, Divergent, Indeterminate };
const char* to_string(Finiteness f);

// Finite: finite at both levels and moves by at most `tolerance`. Divergent:
// infinite, or at least doubles under refinement.
Finiteness classify(double coarse, double fine, double tolerance);

struct CorollaryStage {
  std::string name;
  double coarse = 0.0;
  double fine = 0.0;
  Finiteness status = Finiteness::Indeterminate;
};

struct CorollaryReport {
  std::vector<CorollaryStage> singles;      // A_{p_i} or A_{p_i,q_i}
  CorollaryStage multi;                     // A_P or A_{P,q}
  std::vector<CorollaryStage> equivalence;  // A_{p,q} vs A_{1+q/p'} of w^q, fractional only
  std::optional<RatioReport> sweep;
  bool chain_ok = false;
  bool equivalence_ok = true;
  bool pass() const { return chain_ok && equivalence_ok; }
};

// singles finite => multi finite => sweep passes, and (fractional) A_{p,q}
// finite <=> A_{1+q/p'}(w^q) finite, each judged at the config family and one
// refinement of it.
CorollaryReport check_corollaries(const ExperimentConfig& cfg, bool run_sweep = true, int jobs = 1);

// ------------------------------------------------------------------- tails

enum class SplitPattern { FarFar, FarNear, NearFar };
const char* to_string(SplitPattern p);

struct TailSample {
  double lhs = 0.0;  // max over x in B of |T(split inputs)(x)|
  double rhs = 0.0;  // tail majorant of the full inputs
};

struct TailCorpusResult {
  std::vector<double> ratio_max;  // per pattern
  std::vector<std::size_t> samples;
};

struct TailReport {
  std::vector<SplitPattern> patterns;
  std::vector<double> c_tail;         // calibrated per pattern
  std::vector<double> heldout_max;    // max lhs / rhs on the held-out corpus
  std::vector<std::size_t> heldout_violations;
  std::size_t heldout_checks = 0;
  double slack = 1.2;
  bool pass = false;
};

// Random bump pairs and balls drawn from `seed`; every node x of every ball
// is tested.
TailCorpusResult tail_corpus(const ExperimentConfig& cfg, std::uint64_t seed,
                             const std::vector<double>* c_tail = nullptr,
                             std::vector<std::size_t>* violations = nullptr, std::size_t* checks = nullptr);
TailReport calibrate_tail(const ExperimentConfig& cfg);

// ------------------------------------------------------------------ output

nlohmann::json to_json(const EstimateReport& r);
nlohmann::json to_json(const RatioReport& r);
std::string to_csv(const RatioReport& r);

struct CsvSeries {
  std::vector<double> x;
  std::vector<double> y;
};

// Ratio against dilation, log-x axis.
std::string render_svg(const CsvSeries& series, const std::string& title);
CsvSeries read_ratio_csv(const std::string& csv_text);

// --------------------------------------------------------------------- cli

int run_cli(int argc, char** argv);

}  // namespace morrey
