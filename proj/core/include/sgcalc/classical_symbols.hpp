#pragma once

#include "sgcalc/compactification.hpp"
#include "sgcalc/expr.hpp"
#include "sgcalc/sg_symbols.hpp"

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sgcalc {

// Closed-form homogeneous components of a bi-classical symbol: sigma_e is
// homogeneous of degree m.me in x, sigma_psi of degree m.mpsi in t, and
// sigma_psie in both.
struct PrincipalTriple {
  Expression e;
  Expression psi;
  Expression psie;
};

struct ClassicalSymbol {
  Expression symbol;
  OrderPair order;
  std::optional<PrincipalTriple> declared;
};

// Quintic-smoothstep radial cutoff in the x block or the t block:
// 0 for radius <= inner, 1 for radius >= outer, 6u^5 - 15u^4 + 10u^3 in
// between (u rescaled to [0, 1]). C^2 across the seams; jets at the seam
// radii use the polynomial branch. Requires 0 < inner < outer.
class Excision final : public ScalarField {
public:
  Excision(Dims dims, bool in_x, double inner = 1.0, double outer = 2.0);
  Dims dims() const override { return dims_; }
  TruncPoly jet(const double* x, const double* t, int order) const override;
  double value(const double* x, const double* t) const override;

private:
  Dims dims_;
  bool in_x_;
  double inner_, outer_;
};

// sigma-limit of a field along a boundary face, itself a field:
//   E:    lim mu^-me        a(mu x, t)
//   Psi:  lim mu^-mpsi      a(x, mu t)
//   PsiE: lim mu^-(me+mpsi) a(mu x, mu t)
// Jets are computed coefficient-wise: the jet of a at the scaled point is
// rescaled per coefficient and extrapolated in 1/mu over mu such that the
// scaled block sits at radii 4*2^k, k = 0..8. Throws InvalidInput when a
// coefficient fails to settle to 1e-5 (relative), i.e. when the input is
// not classical, and when the scaled block vanishes at the base point.
class PrincipalComponent final : public ScalarField {
public:
  PrincipalComponent(std::shared_ptr<const ScalarField> a, OrderPair m, Face face);
  Dims dims() const override;
  TruncPoly jet(const double* x, const double* t, int order) const override;
  double value(const double* x, const double* t) const override;

private:
  std::shared_ptr<const ScalarField> a_;
  OrderPair m_;
  Face face_;
};

// Difference a - b of two fields over the same dims.
std::shared_ptr<const ScalarField> field_difference(std::shared_ptr<const ScalarField> a,
                                                    std::shared_ptr<const ScalarField> b);

// Face component of s as a field: the declared expression when present,
// otherwise the sigma-limit extractor applied to the full symbol.
std::shared_ptr<const ScalarField> principal_component(const ClassicalSymbol& s, Face face);

// Glued principal part chi_e sigma_e + chi_psi (sigma_psi - chi_e sigma_psie),
// with chi_e, chi_psi the excision cutoffs in x and t over [inner, outer].
// Differs from the full symbol by one order in each slot when the symbol is
// classical; the cutoff radii only move the transition collar.
std::shared_ptr<const ScalarField> principal_part(const ClassicalSymbol& s,
                                                  double inner = 1.0, double outer = 2.0);

struct FaceCheck {
  bool homogeneous = false;  // declared expression scales exactly
  bool matches = false;      // declared expression equals the extracted limit
  double homogeneity_err = 0.0;
  double match_err = 0.0;
};

// Declared-triple audit: exact scaling under mu in {2, 3, 5} (relative
// 1e-9) and agreement with the extracted limits at 20 sample points
// (relative 1e-6).
struct TripleCheckReport {
  bool consistent = false;
  FaceCheck e, psi, psie;
};
TripleCheckReport verify_declared(const ClassicalSymbol& s, unsigned seed = 1);

// Iterated-limit compatibility: sigma_psi(sigma_e a) and sigma_e(sigma_psi a)
// against the diagonal corner limit, 20 sample pairs, relative 1e-6.
struct CompatibilityReport {
  bool consistent = false;
  double max_rel_err = 0.0;
};
CompatibilityReport compatibility_check(const ClassicalSymbol& s, unsigned seed = 1);

struct FaceEllipticity {
  bool nonvanishing = false;
  double min_abs = 0.0;    // smallest |sigma| found
  double scale = 0.0;      // largest |sigma| on the mesh
  Eigen::VectorXd witness_x, witness_t;
};

// All three principal components bounded away from zero on their natural
// domains (unit directions in the homogeneous block, a bounded window in
// the other). Mesh scan plus deterministic local minimization; elliptic
// iff min |sigma| >= eps_ell * mesh scale on every face.
struct EllipticityReport {
  bool elliptic = false;
  FaceEllipticity e, psi, psie;
};
EllipticityReport ellipticity_check(const ClassicalSymbol& s, double eps_ell = 1e-6,
                                    unsigned seed = 1);

} // namespace sgcalc
