#include "sgcalc/geometry.hpp"
#include "sgcalc/errors.hpp"

#include <cmath>
#include <limits>

namespace sgcalc {

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform01(), u2 = uniform01();
  while (u1 <= 1e-300) u1 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::vector<Eigen::VectorXd> sphere_directions(int dim, int n) {
  if (dim < 1) throw InvalidInput("sphere_directions requires dim >= 1");
  if (n < 1) throw InvalidInput("sphere_directions requires n >= 1");
  std::vector<Eigen::VectorXd> out;

  if (dim == 1) {
    out.push_back(Eigen::VectorXd::Constant(1, 1.0));
    out.push_back(Eigen::VectorXd::Constant(1, -1.0));
    return out;
  }

  if (dim <= 3) {
    for (int i = 0; i < dim && static_cast<int>(out.size()) < n; ++i)
      for (int sgn : {1, -1}) {
        if (static_cast<int>(out.size()) >= n) break;
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
        v[i] = sgn;
        out.push_back(v);
      }
  }

  int rest = n - static_cast<int>(out.size());
  if (rest <= 0) return out;

  if (dim == 2) {
    // Golden-fraction offset keeps the fill points away from the axes.
    const double golden = 0.3819660112501051;
    for (int k = 0; k < rest; ++k) {
      double a = 2.0 * M_PI * (k + golden) / rest;
      Eigen::VectorXd v(2);
      v << std::cos(a), std::sin(a);
      out.push_back(v);
    }
    return out;
  }

  if (dim == 3) {
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < rest; ++k) {
      double z = 1.0 - (2.0 * k + 1.0) / rest;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double a = ga * k;
      Eigen::VectorXd v(3);
      v << r * std::cos(a), r * std::sin(a), z;
      out.push_back(v);
    }
    return out;
  }

  Rng rng(0x5f3759df9e3779b9ull + static_cast<std::uint64_t>(dim));
  for (int k = 0; k < rest; ++k) {
    Eigen::VectorXd v(dim);
    do {
      for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    } while (v.norm() < 1e-8);
    out.push_back(v / v.norm());
  }
  return out;
}

Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& u) {
  const int dim = static_cast<int>(u.size());
  if (dim < 1) throw InvalidInput("tangent_basis requires a nonempty vector");
  if (std::fabs(u.norm() - 1.0) > 1e-8)
    throw InvalidInput("tangent_basis requires a unit vector");
  if (dim == 1) return Eigen::MatrixXd(1, 0);

  // Householder reflection mapping e_k to u, where e_k maximizes |u_k|;
  // the remaining columns of the reflector span u-perp.
  int k = 0;
  for (int i = 1; i < dim; ++i)
    if (std::fabs(u[i]) > std::fabs(u[k])) k = i;
  Eigen::VectorXd w = u;
  w[k] += (u[k] >= 0.0 ? 1.0 : -1.0);
  w /= w.norm();
  Eigen::MatrixXd basis(dim, dim - 1);
  int col = 0;
  for (int j = 0; j < dim; ++j) {
    if (j == k) continue;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[j] = 1.0;
    basis.col(col++) = e - 2.0 * w[j] * w;
  }
  return basis;
}

std::pair<double, double> richardson_extrapolate(const std::vector<double>& f) {
  const int n = static_cast<int>(f.size());
  if (n == 0) throw InvalidInput("richardson_extrapolate needs samples");
  if (n == 1) return {f[0], std::fabs(f[0])};
  std::vector<double> col = f;
  std::vector<double> diag{f[0]};
  for (int j = 1; j < n; ++j) {
    double w = std::ldexp(1.0, j);
    for (int k = n - 1; k >= j; --k)
      col[k] = (w * col[k] - col[k - 1]) / (w - 1.0);
    diag.push_back(col[j]);
  }
  return {diag[n - 1], std::fabs(diag[n - 1] - diag[n - 2])};
}

double directed_hausdorff(const std::vector<Eigen::VectorXd>& a,
                          const std::vector<Eigen::VectorXd>& b) {
  if (a.empty()) return 0.0;
  if (b.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, (p - q).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

double hausdorff_distance(const std::vector<Eigen::VectorXd>& a,
                          const std::vector<Eigen::VectorXd>& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

} // namespace sgcalc

namespace sgcalc {

Eigen::VectorXd compass_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                 Eigen::VectorXd start, double step0, double step_min,
                                 double& fbest,
                                 const std::function<void(Eigen::VectorXd&)>& project) {
  if (project) project(start);
  Eigen::VectorXd best = start;
  fbest = f(best);
  double step = step0;
  int evals = 0;
  const int n = static_cast<int>(start.size());
  while (step >= step_min && evals < 40000) {
    bool improved = false;
    for (int i = 0; i < n; ++i)
      for (double sgn : {1.0, -1.0}) {
        Eigen::VectorXd probe = best;
        probe[i] += sgn * step;
        if (project) project(probe);
        double v = f(probe);
        ++evals;
        if (v < fbest) {
          fbest = v;
          best = probe;
          improved = true;
        }
      }
    if (!improved) step *= 0.5;
  }
  return best;
}

} // namespace sgcalc
