#ifndef SGCALC_GEOMETRY_HPP
#define SGCALC_GEOMETRY_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace sgcalc {

// Deterministic counter-based generator (splitmix64). Used wherever sampling
// must be reproducible across runs and platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller.
  double normal();

private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Compensated accumulator for long summations.
struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double v) {
    double y = v - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double get() const { return s; }
};

// n quasi-uniform unit vectors in R^dim. For dim <= 3 the signed coordinate
// axes come first (so meshes contain the exact axis directions), followed by
// golden-angle points (dim 2) or a Fibonacci sphere (dim 3). dim 1 always
// yields {+1, -1}. dim >= 4 falls back to seeded normalized Gaussians.
std::vector<Eigen::VectorXd> sphere_directions(int dim, int n);

// Orthonormal basis of the tangent space u-perp at a unit vector u, as the
// columns of a dim x (dim-1) matrix (Householder complement of u).
Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& u);

// Limit of F at infinity from geometric samples f[k] = F(lambda_0 2^k),
// assuming an asymptotic expansion of F in powers of 1/lambda. Returns the
// extrapolated value and the last diagonal increment as an error estimate.
std::pair<double, double> richardson_extrapolate(const std::vector<double>& f);

// Symmetric Hausdorff distance between finite point sets under the
// Euclidean metric. Empty-vs-nonempty is infinite; empty-vs-empty is zero.
double hausdorff_distance(const std::vector<Eigen::VectorXd>& a,
                          const std::vector<Eigen::VectorXd>& b);

// One-sided version: sup over a of the distance to b.
double directed_hausdorff(const std::vector<Eigen::VectorXd>& a,
                          const std::vector<Eigen::VectorXd>& b);

// Deterministic derivative-free local minimization: axis pattern search
// with halving steps, from `start` down to step_min. `project` (optional)
// maps probes back to the feasible set; probes where f returns +inf are
// rejected. Returns the best point found; f(best) is written to fbest.
Eigen::VectorXd compass_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                 Eigen::VectorXd start, double step0, double step_min,
                                 double& fbest,
                                 const std::function<void(Eigen::VectorXd&)>& project = {});

} // namespace sgcalc

#endif
