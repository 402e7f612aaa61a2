#pragma once

#include "sgcalc/classical_symbols.hpp"

#include <Eigen/Dense>
#include <optional>

namespace sgcalc {

// Real bi-classical symbol of order (1, 1) used as an oscillation phase.
struct PhaseFunction {
  ClassicalSymbol sym;
};

PhaseFunction make_phase(Expression phi,
                         std::optional<PrincipalTriple> declared = std::nullopt);

// Growth functional <x>^2 |grad_x phi|^2 + <t>^2 |grad_t phi|^2.
double big_phi(const PhaseFunction& p, const double* x, const double* t);

// Non-vanishing audit of one gradient pair over a face mesh.
struct PairWitness {
  bool nonvanishing = false;
  double min_norm = 0.0;  // smallest pair magnitude found (after polish)
  double scale = 0.0;     // largest pair magnitude on the mesh
  Eigen::VectorXd x, t;   // where the minimum sits (unit homogeneous blocks)
};

struct AdmissibilityReport {
  bool admissible = false;
  // Smallest big_phi / (<x>^2 <t>^2) over |x| + |t| >= R.
  double interior_min = 0.0;
  Eigen::VectorXd interior_x, interior_t;
  PairWitness e, psi, corner;
};

// A phase is admissible when the growth functional dominates <x>^2 <t>^2
// outside radius R and the face gradient pairs
//   e:      (gauge(t) grad_x phi^e,  grad_t phi^e)
//   psi:    (grad_x phi^psi,         gauge(x) grad_t phi^psi)
//   corner: (grad_x phi^psie,        grad_t phi^psie)
// stay away from zero on their faces (gauge(v) = 1 - radial_profile(|v|)).
// Dyadic mesh scan plus deterministic pattern polish; both thresholds are
// 1e-6 relative to the mesh scale.
AdmissibilityReport admissibility_check(const PhaseFunction& p, double R = 8.0);

struct NondegeneracyInfo {
  bool nondegenerate = false;
  double sigma_min = 0.0, sigma_max = 0.0;
  int rows = 0, cols = 0;
};

// Rank of the stationary system's Jacobian at a face point: rows are the
// s theta-gradient equations of the face component, columns the full
// face-adapted coordinates (sphere chart on each homogeneous block, the
// whole block otherwise). Full rank s, read as sigma_min > 1e-6 sigma_max,
// certifies a clean stationary manifold through the point.
NondegeneracyInfo nondegeneracy_at(const PhaseFunction& p, Face face, const double* x,
                                   const double* t);

} // namespace sgcalc
