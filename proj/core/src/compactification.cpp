#include "sgcalc/compactification.hpp"

#include "sgcalc/errors.hpp"
#include "sgcalc/geometry.hpp"

#include <cmath>

namespace sgcalc {

namespace {

constexpr double kSeamR = 3.0;        // profile switches to 1 - 1/r here
constexpr double kSeamY = 2.0 / 3.0;  // = radial_profile(kSeamR)

// Interior completion rho(r) = r * g(r^2).  The even factor g makes
// iota(x) = g(|x|^2) x a polynomial map with Jacobian (7/24) I at the
// origin.  g(9) = 2/9, g'(9) = -1/162, g''(9) = 1/2916 match 1 - 1/r at
// r = 3 to second order, and rho'(r) = 7/24 - u/36 + 5u^2/5832 >= 1/9 on
// u in [0, 9], so the profile is strictly increasing.
double seam_factor(double u) {
  return 7.0 / 24.0 + u * (-1.0 / 108.0 + u * (1.0 / 5832.0));
}
double seam_rho(double r) { return r * seam_factor(r * r); }
double seam_rho_deriv(double r) {
  double u = r * r;
  return 7.0 / 24.0 + u * (-1.0 / 36.0 + u * (5.0 / 5832.0));
}

// Gauge completion h = v q(v), v = |y|^2, matching |y| at v = 4/9 to
// second order in v; strictly increasing on [0, 4/9].
double gauge_poly(double v) {
  return v * (45.0 / 16.0 + v * (-135.0 / 32.0 + v * (729.0 / 256.0)));
}

} // namespace

double radial_profile(double r) {
  if (r < 0.0) throw InvalidInput("radial_profile requires r >= 0");
  if (r >= kSeamR) return 1.0 - 1.0 / r;
  return seam_rho(r);
}

double radial_profile_inv(double y) {
  if (y < 0.0 || y >= 1.0) throw InvalidInput("radial_profile_inv requires 0 <= y < 1");
  if (y >= kSeamY) return 1.0 / (1.0 - y);
  if (y == 0.0) return 0.0;
  // Monotone solve of seam_rho(r) = y on (0, 3]; rho' >= 1/9 there.
  double lo = 0.0, hi = kSeamR;
  double r = kSeamR * y / kSeamY;  // linear initial guess
  for (int it = 0; it < 100; ++it) {
    double f = seam_rho(r) - y;
    if (f > 0.0) hi = r; else lo = r;
    double next = r - f / seam_rho_deriv(r);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - r) <= 1e-15 * (1.0 + r)) {
      r = next;
      break;
    }
    r = next;
  }
  return r;
}

Eigen::VectorXd iota(const Eigen::VectorXd& x) {
  double r = x.norm();
  if (r >= kSeamR) {
    // (rho(r)/r) x; the factor is exact in binary for power-of-two radii.
    return x * ((1.0 - 1.0 / r) / r);
  }
  return x * seam_factor(r * r);
}

Eigen::VectorXd iota_inv(const Eigen::VectorXd& y) {
  double ny = y.norm();
  if (ny >= 1.0) throw InvalidInput("iota_inv requires a point of the open ball");
  if (ny == 0.0) return Eigen::VectorXd::Zero(y.size());
  double r = radial_profile_inv(ny);
  return y * (r / ny);
}

Eigen::MatrixXd iota_jacobian(const Eigen::VectorXd& x) {
  int n = static_cast<int>(x.size());
  double r = x.norm();
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  if (r >= kSeamR) {
    // iota = f(r) x with f = 1/r - 1/r^2; D iota = f I + (f'(r)/r) x x^T.
    double f = (1.0 - 1.0 / r) / r;
    double fp_over_r = (2.0 / r - 1.0) / (r * r * r);
    return f * id + fp_over_r * (x * x.transpose());
  }
  double u = r * r;
  double g = seam_factor(u);
  double gp = -1.0 / 108.0 + u / 2916.0;
  return g * id + (2.0 * gp) * (x * x.transpose());
}

double boundary_gauge(const Eigen::VectorXd& y) {
  double v = y.squaredNorm();
  if (v > 1.0 + 1e-12) throw InvalidInput("boundary_gauge requires |y| <= 1");
  if (v >= kSeamY * kSeamY) return 1.0 - std::sqrt(v);
  return 1.0 - gauge_poly(v);
}

std::string face_name(Face f) {
  switch (f) {
    case Face::Interior: return "interior";
    case Face::E: return "e";
    case Face::Psi: return "psi";
    case Face::PsiE: return "psie";
  }
  return "interior";
}

Face face_from_name(const std::string& s) {
  if (s == "interior") return Face::Interior;
  if (s == "e") return Face::E;
  if (s == "psi") return Face::Psi;
  if (s == "psie") return Face::PsiE;
  throw InvalidInput("unknown face name '" + s + "'");
}

FacePoint make_face_point(Eigen::VectorXd y, Eigen::VectorXd g, double snap_tol) {
  double ny = y.norm(), ng = g.norm();
  if (ny > 1.0 + snap_tol || ng > 1.0 + snap_tol)
    throw InvalidInput("face point coordinates must lie in the closed unit ball");
  bool on_e = std::fabs(ny - 1.0) <= snap_tol;
  bool on_psi = std::fabs(ng - 1.0) <= snap_tol;
  if (on_e) y /= ny;
  if (on_psi) g /= ng;
  FacePoint p;
  p.face = on_e ? (on_psi ? Face::PsiE : Face::E) : (on_psi ? Face::Psi : Face::Interior);
  p.y = std::move(y);
  p.g = std::move(g);
  return p;
}

FacePoint compactify(const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
  FacePoint p;
  p.face = Face::Interior;
  p.y = iota(x);
  p.g = iota(t);
  return p;
}

namespace {

TransportResult finish(std::vector<double> samples) {
  auto [value, error] = richardson_extrapolate(samples);
  TransportResult r;
  r.value = value;
  r.error = error;
  r.converged = error <= 1e-7 * std::max(1.0, std::fabs(value));
  return r;
}

} // namespace

TransportResult transport_value(const ScalarField& a, OrderPair m, const FacePoint& p) {
  const int nk = 9;  // radii 4 * 2^k, k = 0..8
  switch (p.face) {
    case Face::Interior: {
      Eigen::VectorXd x = iota_inv(p.y), t = iota_inv(p.g);
      TransportResult r;
      r.value = std::pow(boundary_gauge(p.y), m.me) *
                std::pow(boundary_gauge(p.g), m.mpsi) *
                a.value(x.data(), t.data());
      r.error = 0.0;
      r.converged = true;
      return r;
    }
    case Face::E: {
      Eigen::VectorXd t = iota_inv(p.g);
      double gfac = std::pow(boundary_gauge(p.g), m.mpsi);
      std::vector<double> f(nk);
      for (int k = 0; k < nk; ++k) {
        double r = std::ldexp(4.0, k);
        Eigen::VectorXd x = r * p.y;
        f[k] = std::pow(r, -m.me) * gfac * a.value(x.data(), t.data());
      }
      return finish(std::move(f));
    }
    case Face::Psi: {
      Eigen::VectorXd x = iota_inv(p.y);
      double yfac = std::pow(boundary_gauge(p.y), m.me);
      std::vector<double> f(nk);
      for (int k = 0; k < nk; ++k) {
        double r = std::ldexp(4.0, k);
        Eigen::VectorXd t = r * p.g;
        f[k] = std::pow(r, -m.mpsi) * yfac * a.value(x.data(), t.data());
      }
      return finish(std::move(f));
    }
    case Face::PsiE: {
      std::vector<double> f(nk);
      for (int k = 0; k < nk; ++k) {
        double r = std::ldexp(4.0, k);
        Eigen::VectorXd x = r * p.y;
        Eigen::VectorXd t = r * p.g;
        f[k] = std::pow(r, -m.me - m.mpsi) * a.value(x.data(), t.data());
      }
      return finish(std::move(f));
    }
  }
  throw InvalidInput("corrupt face point");
}

TransportResult transport_value(const Expression& a, OrderPair m, const FacePoint& p) {
  ExpressionField f(a);
  return transport_value(static_cast<const ScalarField&>(f), m, p);
}

} // namespace sgcalc
