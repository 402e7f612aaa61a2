#pragma once

#include "sgcalc/phase_functions.hpp"

#include <complex>
#include <string>
#include <vector>

namespace sgcalc {

// Schwartz test function with an explicit Gaussian envelope,
//   u(x) = profile(x) * exp(-(x - center)^T quad (x - center)).
// The envelope is what the quadrature engine relies on to truncate the
// base integral, so the quadratic form is verified positive definite at
// assembly and its smallest eigenvalue is kept for box sizing.
struct TestFunction {
  Expression profile;      // base variables only (dims {d, 0})
  Eigen::MatrixXd quad;
  Eigen::VectorXd center;
  double quad_min = 0.0;   // smallest eigenvalue of quad

  int dim() const { return profile.dims().d; }
  double value(const Eigen::VectorXd& x) const;
};

TestFunction make_test_function(Expression profile, Eigen::MatrixXd quad,
                                Eigen::VectorXd center);

// exp(-|x - center|^2 / (2 width^2))
TestFunction gaussian_bump(const Eigen::VectorXd& center, double width = 1.0);

struct OscIntResult {
  std::complex<double> value;                // extrapolated to eps = 0
  std::vector<double> eps_ladder;            // as evaluated
  std::vector<std::complex<double>> ladder;  // regularized pairing per rung
  double residual = 0.0;                     // |last extrapolant - previous estimate|
  long long grid_points = 0;                 // integrand evaluations on the finest rung
  double truncation_x = 0.0;                 // base box half-width, finest rung
  double truncation_theta = 0.0;             // fiber march reach, finest rung
  double step_x = 0.0;                       // smallest base step used, finest rung
  double step_theta = 0.0;                   // fiber step, finest rung
};

// Pairing <I_phi(a), u> as the eps -> 0 limit of
//   integral of e^{i phi(x,theta)} a(x,theta) u(x) e^{-eps(|x|^2+|theta|^2)}.
// Dense tensor quadrature, so d + s <= 3 is required. Fiber rows are
// marched outward from 0 and dropped once the row integrals stay below
// 1e-13 of the running maximum (hard cap 6/sqrt(eps) per axis); the base
// box comes from the envelope, and each row is resolved with step
// pi / (8 max|grad phi|) using an affine bound of the gradient growth.
// The ladder values are extrapolated to eps = 0 by sliding three-point
// quadratic fits. Consecutive ladder differences that stop shrinking
// raise DomainError("regularization unstable"). threads parallelizes
// over ladder rungs; results are bytewise independent of the count.
OscIntResult oscint_eval(const PhaseFunction& phi, const Expression& a,
                         const TestFunction& u,
                         std::vector<double> eps_ladder = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3},
                         int threads = 1);

struct WavefrontProbe {
  Eigen::VectorXd x0;                        // probe location (base space)
  Eigen::VectorXd xi;                        // probe direction, unit
  std::vector<double> lambdas;
  std::vector<std::complex<double>> values;  // F(lambda)
  std::vector<double> mass;                  // integrated |amplitude| per rung
  double slope = 0.0;                        // log|F| vs log lambda, least squares
  bool flagged = false;
  std::string verdict;  // "possible wave-front direction" or "regular direction"
};

// Directional smoothness probe at a finite base point:
//   F(lambda) = pairing of I_phi(a) with the scaled window
//               exp(-lambda |x - x0|^2 / (2 w^2)) e^{-i lambda <xi, x>},
// w = 0.42. The window shrinks like lambda^{-1/2}, so near a smooth point
// F decays like a Gaussian in lambda while an actual singularity keeps it
// at a power law or a plateau. The fitted log-log slope is compared with
// -3; the probe is flagged when the slope is above the threshold and the
// pairing is at least 1e-8 of the integrated amplitude mass (guards
// against fitting roundoff noise). Slope -999 marks a pairing that
// underflowed on every rung. Requires d in {1, 2} and d + s <= 3.
WavefrontProbe wavefront_probe(const PhaseFunction& phi, const Expression& a,
                               const Eigen::VectorXd& x0, const Eigen::VectorXd& xi_dir,
                               std::vector<double> scale_ladder = {2, 4, 8, 16, 32},
                               int threads = 1);

// One row per probe: x0 components, direction components, slope, verdict.
std::string probe_csv(const std::vector<WavefrontProbe>& probes);

} // namespace sgcalc
