#ifndef SGCALC_SG_SYMBOLS_HPP
#define SGCALC_SG_SYMBOLS_HPP

#include "sgcalc/expr.hpp"

#include <cstdint>
#include <vector>

namespace sgcalc {

// Bi-graded order (exit order in x, fiber order in t).
struct OrderPair {
  double me = 0.0;
  double mpsi = 0.0;
  bool operator==(const OrderPair& o) const { return me == o.me && mpsi == o.mpsi; }
};

// <x>^me <t>^mpsi with <v> = sqrt(1 + |v|^2).
double sg_weight(const double* x, int d, const double* t, int s, OrderPair m);

struct EstimateViolation {
  std::vector<int> beta_x;  // x-derivative multi-index
  std::vector<int> alpha_t; // t-derivative multi-index
  double slope;             // fitted log-log growth of the weighted ratio
  std::vector<double> x, t; // witness sample at the largest radius
};

struct EstimateReport {
  bool satisfied = false;
  // Largest fitted growth rate of |D a| / (<x>^(me-|beta|) <t>^(mpsi-|alpha|))
  // across derivative indices and scan directions; <= 0 for a true symbol.
  double worst_slope = 0.0;
  // Sup of the weighted ratio over all samples: the estimate constant.
  double best_constant = 0.0;
  std::vector<EstimateViolation> violations;
};

// Samples weighted derivative ratios along dyadic rays (x-sweep at fixed t,
// t-sweep at fixed x, and the joint diagonal), fits the growth rate over the
// outermost radii, and flags any derivative index whose ratio still grows.
// Derivatives are taken to total order `order` (1..3, default 2).
// When a is a difference of nearly-equal fields, pass one operand as
// noise_ref: derivative coefficients within 1e-12 of the reference
// coefficient are cancellation residue and are treated as exact zeros.
EstimateReport check_sg_estimates(const ScalarField& a, OrderPair m,
                                  int order = 2, std::uint64_t seed = 1,
                                  const ScalarField* noise_ref = nullptr);
EstimateReport check_sg_estimates(const Expression& a, OrderPair m,
                                  int order = 2, std::uint64_t seed = 1);

} // namespace sgcalc

#endif
