#pragma once

#include "sgcalc/stationary_geometry.hpp"

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sgcalc {

// Graph description of a conic Lagrangian over the coordinate split
// x = (x', x''), xi = (xi', xi'') with |x'| = |xi'| = s. Near the e face the
// manifold is the graph x' = X^e(x'', xi'), xi'' = Xi^e(x'', xi'); near the
// psi face it is x' = X^psi(x'', xi'), xi'' = Xi^psi(x'', xi'). Components
// are expressions over the phase variables, with x_{s+1}..x_d standing for
// x'' and t_1..t_s for xi'; they must not depend on x_1..x_s. The X blocks
// scale like x'' (degree 1 in x'', 0 in xi'), the Xi blocks like xi'
// (degree 0 in x'', 1 in xi').
//
// Xie is the defining block for the e side and Xpsi for the psi side; the
// companion blocks are redundant (each is determined by a derivative of the
// defining one) and are cross-checked when supplied.
struct LagrangianGraphData {
  Dims dims;                      // d ambient variables, s paired coordinates
  bool has_e = false;             // e-side graph supplied (Xie, optionally Xe)
  bool has_psi = false;           // psi-side graph supplied (Xpsi, optionally Xipsi)
  std::vector<Expression> Xe;     // size s when supplied, else empty
  std::vector<Expression> Xie;    // size d - s, required with has_e
  std::vector<Expression> Xpsi;   // size s, required with has_psi
  std::vector<Expression> Xipsi;  // size d - s when supplied, else empty
};

// Phase rebuilt from graph data. The declared triple is exact by
// construction; `glued` is the smooth representative that interpolates the
// face components through the excision collar.
struct ReconstructedPhase {
  PhaseFunction phase;
  std::shared_ptr<const ScalarField> glued;
};

// Reconstruction of a phase from Lagrangian graph data:
//   phi^e   = <x', xi'> + <x'', Xi^e(x'', xi')>
//   phi^psi = <x', xi'> - <X^psi(x'', xi'), xi'>
// A missing side is filled from the other by the corresponding face limit
// (which the exact scaling of the supplied blocks makes closed-form). The
// corner component is the shared limit of the two.
//
// Gates, in order, all reported as InvalidInput:
//   1. shapes and variable usage ("invalid input: ..."), including exact
//      scaling of every supplied block under mu in {2, 3} (relative 1e-9)
//      and independence from x_1..x_s;
//   2. corner compatibility of the two sides, sampled over unit direction
//      pairs ("graph data violates conormality", tolerance 1e-7);
//   3. derivative identities tying the redundant blocks to the defining
//      ones, when supplied (tolerance 1e-8).
//
// xi0 pins the eliminated fiber block (size d - s; empty means zero). The
// construction is constant in that block, so the choice cannot change the
// result; the parameter keeps the elimination step explicit and testable.
ReconstructedPhase build_phase(const LagrangianGraphData& g,
                               const Eigen::VectorXd& xi0 = Eigen::VectorXd());

// Per-face Hausdorff distance between the Lagrangian clouds of two phases
// in the compactified embedding. Passes when every face distance is at most
// tol; a face populated on one side only fails with a diagnosis.
struct RoundtripReport {
  bool pass = false;
  double hausdorff_e = 0.0, hausdorff_psi = 0.0, hausdorff_corner = 0.0;
  std::string diagnosis;  // empty when pass
};
RoundtripReport roundtrip_verify(const PhaseFunction& src, const PhaseFunction& rec,
                                 double tol = 1e-4, SolveOptions opt = {});

// Inertia of the s x s theta-Hessian of the face principal component at the
// point's stored representative (unit homogeneous blocks). Eigenvalues
// within 1e-8 of the largest magnitude count as zero; the counts sum to s.
struct Signature {
  int n_plus = 0, n_minus = 0, n_zero = 0;
  bool operator==(const Signature&) const = default;
};
Signature hessian_signature(const PhaseFunction& p, const StationaryPoint& q);

// Small solution of W + W^T C W = B by the fixed-point iteration
// W <- B - W^T C W from W = B. Converges exactly in the contraction regime
// where a small solution exists; iterates escaping norm 1e3 (or 200 steps
// without the increment falling below 1e-12) report failure.
struct WSolveResult {
  bool converged = false;
  Eigen::MatrixXd W;
  double residual = 0.0;  // Frobenius defect of the equation at exit
  int iterations = 0;
  std::string message;    // "converged" or "no small solution found"
};
WSolveResult solve_W(const Eigen::MatrixXd& B, const Eigen::MatrixXd& C);

// Principal-level comparison of two phases over a common stationary region:
//   1. the face clouds must match both ways (nearest point polished along
//      the stationary manifold, embedding gap at most 1e-4);
//   2. phase values at matched points must agree within 1e-6;
//   3. theta-Hessian signatures at matched points must be equal.
// Verdicts, in order of precedence: "Lagrangians differ", "phase values
// differ", "signature mismatch", "equivalent (principal level)".
//
// When some matched pair has an invertible theta-Hessian on the first
// phase, the quadratic intertwiner W of the two local Hessians is attached
// (the small solution of W + W^T C W = B with C, B built from the pair);
// no pair qualifying, or the iteration finding no small solution, leaves
// it empty.
struct EquivalenceReport {
  bool equivalent = false;
  std::string verdict;
  double max_cloud_gap = 0.0;  // worst matched embedding distance
  double max_value_gap = 0.0;  // worst phase value difference over matches
  int unmatched = 0;           // points with no counterpart within 1e-4
  std::optional<Eigen::MatrixXd> solver_W;
};
EquivalenceReport equivalence_check(const PhaseFunction& p1, const PhaseFunction& p2,
                                    SolveOptions region = {});

} // namespace sgcalc
