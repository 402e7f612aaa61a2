#pragma once

#include "sgcalc/stationary_geometry.hpp"

#include <string>

namespace sgcalc {

// Canonical one-forms and the symplectic form on (dx, dxi) tangent vectors.
// one_form_psi is the contraction of xi.dx with a tangent vector; one_form_e
// is -x.dxi; both arise by contracting the symplectic form with the radial
// generator of the respective face (fiber dilations for psi, base dilations
// for e).
double one_form_psi(const Eigen::VectorXd& xi, const Eigen::VectorXd& dx);
double one_form_e(const Eigen::VectorXd& x, const Eigen::VectorXd& dxi);
double symplectic_form(const Eigen::VectorXd& ux, const Eigen::VectorXd& uxi,
                       const Eigen::VectorXd& vx, const Eigen::VectorXd& vxi);

// Audit of the Lagrangian cloud attached to a stationary report:
//   - face Euler identities: x.grad_x phi^e = phi^e and t.grad_t phi^psi = phi^psi,
//     sampled on a direction/radius grid (euler_tol);
//   - gauge-weighted phase values vanish on the psi and corner stationary sets;
//   - the face one-form vanishes on every cloud tangent frame vector,
//     relative to the scale |x||dxi| + |xi||dx| (rel_tol);
//   - corner cloud points satisfy <x, xi> = 0.
// Checks run in that order; the verdict names the first failure.
struct LagrangianReport {
  bool valid = false;
  double alpha_psi_max = 0.0;
  double alpha_e_max = 0.0;
  double corner_pairing_max = 0.0;
  double phase_value_max = 0.0;
  double euler_e_max = 0.0;
  double euler_psi_max = 0.0;
  std::string verdict;
};

LagrangianReport lagrangian_validate(const PhaseFunction& p, const NeatnessReport& rep,
                                     double rel_tol = 1e-8, double euler_tol = 1e-9);

} // namespace sgcalc
