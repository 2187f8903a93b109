#pragma once

#include "morrey/lattice.hpp"
#include "morrey/report.hpp"
#include "morrey/weights.hpp"

namespace morrey {

// Only p > 0 and kappa > 0 are enforced here; the theorem windows on kappa
// are checked by the harness so that out-of-window runs stay possible.
struct MorreyParams {
  double p;
  double kappa;
  MorreyParams(double p, double kappa);
};

// (int |f|^p w)^{1/p} over the whole lattice.
double lebesgue_norm(const GridFunction& f, const Weight& w, double p);

// max over attained lambda > 0 of lambda * w({|f| >= lambda})^{1/p}.
NormReport weak_lebesgue_norm(const GridFunction& f, const Weight& w, double p);

// max over B of (w(B)^{-kappa} int_B |f|^p w)^{1/p}
NormReport morrey_norm(const GridFunction& f, const Weight& w, const MorreyParams& mp,
                       const BallFamily& family);

// max over B and lambda of w(B)^{-kappa/p} lambda w({x in B : |f| >= lambda})^{1/p}
NormReport weak_morrey_norm(const GridFunction& f, const Weight& w, const MorreyParams& mp,
                            const BallFamily& family);

// max over B of (v(B)^{-kappa} int_B |f|^p u)^{1/p}
NormReport two_weight_morrey_norm(const GridFunction& f, const Weight& u, const Weight& v,
                                  const MorreyParams& mp, const BallFamily& family);

}  // namespace morrey
