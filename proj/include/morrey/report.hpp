#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "morrey/lattice.hpp"

namespace morrey {

// A sup-over-family quantity with the ball (and level, for weak norms) that
// attains it. value may be +inf when a ball makes the quantity diverge.
struct EstimateReport {
  std::string quantity;
  double value = 0.0;
  std::optional<Ball> extremal_ball;
  std::optional<double> extremal_level;
  std::size_t balls_used = 0;
  std::vector<std::string> warnings;
  nlohmann::json config = nlohmann::json::object();

  bool finite() const { return std::isfinite(value); }
};

using NormReport = EstimateReport;

// Running max with first-wins tie breaking in family order.
class ExtremumTracker {
 public:
  void offer(double value, const Ball& ball, std::optional<double> level = std::nullopt) {
    ++seen_;
    if (!has_ || value > best_ || (std::isnan(best_) && !std::isnan(value))) {
      has_ = true;
      best_ = value;
      ball_ = ball;
      level_ = level;
    }
  }
  bool has_value() const { return has_; }
  std::size_t seen() const { return seen_; }

  void fill(EstimateReport& report) const {
    report.value = has_ ? best_ : 0.0;
    if (has_) report.extremal_ball = ball_;
    report.extremal_level = level_;
    report.balls_used = seen_;
  }

 private:
  bool has_ = false;
  double best_ = 0.0;
  Ball ball_{};
  std::optional<double> level_;
  std::size_t seen_ = 0;
};

inline nlohmann::json family_echo(const BallFamily& family) {
  const auto& s = family.provenance;
  nlohmann::json j{{"center_stride", s.center_stride},
                   {"r0", s.r0},
                   {"count", s.count},
                   {"balls", family.balls.size()},
                   {"lattice",
                    {{"n", family.lattice.dim()},
                     {"half_width", family.lattice.half_width()},
                     {"points", family.lattice.points_per_axis()}}}};
  if (s.center_extent) j["center_extent"] = *s.center_extent;
  return j;
}

}  // namespace morrey
