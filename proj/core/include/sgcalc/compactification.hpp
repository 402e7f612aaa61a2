#ifndef SGCALC_COMPACTIFICATION_HPP
#define SGCALC_COMPACTIFICATION_HPP

#include "sgcalc/sg_symbols.hpp"

#include <Eigen/Dense>

#include <string>

namespace sgcalc {

// Radial profile of the ball compactification: strictly increasing,
// rho(0) = 0, rho(r) = 1 - 1/r for r >= 3, and r times a polynomial in
// r^2 below the seam so the map is smooth at the origin and C^2 across
// r = 3.
double radial_profile(double r);
// Inverse on [0, 1): closed form outside rho(3) = 2/3, bisection-guarded
// Newton inside (tolerance 1e-14).
double radial_profile_inv(double y);

// x |-> rho(|x|) x/|x|, an open-ball chart of the radial compactification.
Eigen::VectorXd iota(const Eigen::VectorXd& x);
// Inverse chart; requires |y| < 1.
Eigen::VectorXd iota_inv(const Eigen::VectorXd& y);
// Derivative matrix of iota at x, closed form on both sides of the seam.
Eigen::MatrixXd iota_jacobian(const Eigen::VectorXd& x);

// Distance-to-boundary gauge on the closed ball: equals 1 - |y| for
// |y| >= 2/3 and is smoothed through the origin below (value 1 at y = 0,
// strictly positive inside, C^2 at the seam). For y = iota(x) with |x| >= 3
// this is exactly 1/|x|.
double boundary_gauge(const Eigen::VectorXd& y);

enum class Face { Interior, E, Psi, PsiE };

std::string face_name(Face f);          // "interior", "e", "psi", "psie"
Face face_from_name(const std::string&); // throws InvalidInput on unknown names

// A point of the doubly compactified phase space: y is the x-side ball
// coordinate, g the t-side one. Boundary membership is exact: |y| = 1 on
// the e and corner faces, |g| = 1 on the psi and corner faces.
struct FacePoint {
  Face face = Face::Interior;
  Eigen::VectorXd y, g;
};

// Builds a face point from raw ball coordinates, snapping norms within
// snap_tol of 1 onto the boundary and classifying the face.
FacePoint make_face_point(Eigen::VectorXd y, Eigen::VectorXd g,
                          double snap_tol = 1e-12);

// Interior embedding of a finite phase-space point.
FacePoint compactify(const Eigen::VectorXd& x, const Eigen::VectorXd& t);

struct TransportResult {
  double value = 0.0;
  double error = 0.0;   // last extrapolation increment
  bool converged = false;
};

// Value of the gauge-transported symbol
//   b(y, g) = gauge(y)^me gauge(g)^mpsi a(iota^-1 y, iota^-1 g)
// at a face point. Interior points evaluate directly; boundary points take
// the radial limit by Richardson extrapolation along the ray (radii 4*2^k,
// k = 0..8), which converges exactly when a has order (me, mpsi) asymptotics
// in the escaping factor.
TransportResult transport_value(const ScalarField& a, OrderPair m,
                                const FacePoint& p);
TransportResult transport_value(const Expression& a, OrderPair m,
                                const FacePoint& p);

} // namespace sgcalc

#endif
