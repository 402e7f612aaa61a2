#include "sgcalc/phase_functions.hpp"

#include "sgcalc/errors.hpp"
#include "sgcalc/geometry.hpp"
#include "sgcalc/multi_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgcalc {

namespace {

constexpr double kFaceTol = 1e-6;
const double kInf = std::numeric_limits<double>::infinity();

double radial_gauge(const Eigen::VectorXd& v) { return 1.0 - radial_profile(v.norm()); }

Eigen::VectorXd jet_gradient(const TruncPoly& p, int n) {
  const MultiIndexTable& tab = p.table();
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = p.coeff(tab.var_index(i));
  return g;
}

Eigen::MatrixXd jet_hessian(const TruncPoly& p, int n) {
  Eigen::MatrixXd h(n, n);
  std::vector<int> e(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      e.assign(n, 0);
      e[i] += 1;
      e[j] += 1;
      double c = p.coeff_of(e);
      h(i, j) = h(j, i) = (i == j) ? 2.0 * c : c;
    }
  return h;
}

} // namespace

PhaseFunction make_phase(Expression phi, std::optional<PrincipalTriple> declared) {
  PhaseFunction p;
  p.sym.symbol = std::move(phi);
  p.sym.order = OrderPair{1.0, 1.0};
  p.sym.declared = std::move(declared);
  return p;
}

double big_phi(const PhaseFunction& p, const double* x, const double* t) {
  Dims dm = p.sym.symbol.dims();
  TruncPoly jet = p.sym.symbol.eval_poly(x, t, 1);
  Eigen::VectorXd g = jet_gradient(jet, dm.n());
  double nx2 = 1.0, nt2 = 1.0;
  for (int i = 0; i < dm.d; ++i) nx2 += x[i] * x[i];
  for (int i = 0; i < dm.s; ++i) nt2 += t[i] * t[i];
  return nx2 * g.head(dm.d).squaredNorm() + nt2 * g.tail(dm.s).squaredNorm();
}

namespace {

// Interior growth ratio big_phi / (<x>^2 <t>^2) minimized over the dyadic
// shell mesh outside radius R, then pattern-polished.
void scan_interior(const PhaseFunction& p, double R, AdmissibilityReport& rep) {
  Dims dm = p.sym.symbol.dims();
  auto ratio = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
    double nx2 = 1.0 + x.squaredNorm(), nt2 = 1.0 + t.squaredNorm();
    return big_phi(p, x.data(), t.data()) / (nx2 * nt2);
  };
  std::vector<double> radii = {0.0};
  for (int k = 0; k <= 10; ++k) radii.push_back(std::ldexp(1.0, k));
  auto xdirs = sphere_directions(dm.d, 32);
  auto tdirs = sphere_directions(dm.s, 32);
  rep.interior_min = kInf;
  for (double rx : radii)
    for (double rt : radii) {
      if (rx + rt < R) continue;
      std::size_t nx = rx == 0.0 ? 1 : xdirs.size();
      std::size_t nt = rt == 0.0 ? 1 : tdirs.size();
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < nt; ++j) {
          Eigen::VectorXd x = rx * xdirs[i], t = rt * tdirs[j];
          double v = ratio(x, t);
          if (v < rep.interior_min) {
            rep.interior_min = v;
            rep.interior_x = x;
            rep.interior_t = t;
          }
        }
    }
  Dims d = dm;
  auto packed = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd x = z.head(d.d), t = z.tail(d.s);
    if (x.norm() + t.norm() < R) return kInf;
    return ratio(x, t);
  };
  Eigen::VectorXd z0(d.n());
  z0 << rep.interior_x, rep.interior_t;
  double fbest = rep.interior_min;
  Eigen::VectorXd z = compass_minimize(packed, z0, 1.0, 1e-7, fbest);
  if (fbest < rep.interior_min) {
    rep.interior_min = fbest;
    rep.interior_x = z.head(d.d);
    rep.interior_t = z.tail(d.s);
  }
}

// One face pair: v has the x-gradient rows then the t-gradient rows of the
// face component, with the gauge damping on the block named by the face.
void scan_pair(const ScalarField& sigma, Dims dm, Face face, PairWitness& out) {
  auto pair_norm = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
    TruncPoly jet = sigma.jet(x.data(), t.data(), 1);
    Eigen::VectorXd g = jet_gradient(jet, dm.n());
    double wx = face == Face::E ? radial_gauge(t) : 1.0;
    double wt = face == Face::Psi ? radial_gauge(x) : 1.0;
    Eigen::VectorXd v(dm.n());
    v << wx * g.head(dm.d), wt * g.tail(dm.s);
    return v.norm();
  };
  bool x_sphere = face != Face::Psi, t_sphere = face != Face::E;
  std::vector<Eigen::VectorXd> xs, ts;
  if (x_sphere) {
    xs = sphere_directions(dm.d, 32);
  } else {
    xs.push_back(Eigen::VectorXd::Zero(dm.d));
    for (double r : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0})
      for (const auto& u : sphere_directions(dm.d, 16)) xs.push_back(r * u);
  }
  if (t_sphere) {
    ts = sphere_directions(dm.s, 32);
  } else {
    ts.push_back(Eigen::VectorXd::Zero(dm.s));
    for (double r : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0})
      for (const auto& u : sphere_directions(dm.s, 16)) ts.push_back(r * u);
  }
  out.min_norm = kInf;
  for (const auto& xp : xs)
    for (const auto& tp : ts) {
      double v = pair_norm(xp, tp);
      out.scale = std::max(out.scale, v);
      if (v < out.min_norm) {
        out.min_norm = v;
        out.x = xp;
        out.t = tp;
      }
    }
  auto packed = [&](const Eigen::VectorXd& z) {
    return pair_norm(z.head(dm.d), z.tail(dm.s));
  };
  auto project = [&](Eigen::VectorXd& z) {
    if (x_sphere) {
      double n = z.head(dm.d).norm();
      if (n == 0.0) z[0] = 1.0; else z.head(dm.d) /= n;
    }
    if (t_sphere) {
      double n = z.tail(dm.s).norm();
      if (n == 0.0) z[dm.d] = 1.0; else z.tail(dm.s) /= n;
    }
  };
  Eigen::VectorXd z0(dm.n());
  z0 << out.x, out.t;
  double fbest = out.min_norm;
  Eigen::VectorXd z = compass_minimize(packed, z0, 0.5, 1e-7, fbest, project);
  if (fbest < out.min_norm) {
    out.min_norm = fbest;
    out.x = z.head(dm.d);
    out.t = z.tail(dm.s);
  }
  out.nonvanishing = out.scale > 0.0 && out.min_norm >= kFaceTol * out.scale;
}

} // namespace

AdmissibilityReport admissibility_check(const PhaseFunction& p, double R) {
  Dims dm = p.sym.symbol.dims();
  AdmissibilityReport rep;
  scan_interior(p, R, rep);
  scan_pair(*principal_component(p.sym, Face::E), dm, Face::E, rep.e);
  scan_pair(*principal_component(p.sym, Face::Psi), dm, Face::Psi, rep.psi);
  scan_pair(*principal_component(p.sym, Face::PsiE), dm, Face::PsiE, rep.corner);
  rep.admissible = rep.interior_min >= kFaceTol && rep.e.nonvanishing &&
                   rep.psi.nonvanishing && rep.corner.nonvanishing;
  return rep;
}

NondegeneracyInfo nondegeneracy_at(const PhaseFunction& p, Face face, const double* x,
                                   const double* t) {
  if (face == Face::Interior)
    throw InvalidInput("stationary systems are attached to boundary faces");
  Dims dm = p.sym.symbol.dims();
  Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x, dm.d);
  Eigen::VectorXd tv = Eigen::Map<const Eigen::VectorXd>(t, dm.s);
  bool x_sphere = face != Face::Psi, t_sphere = face != Face::E;
  if (x_sphere) {
    if (xv.norm() == 0.0) throw InvalidInput("face point needs a nonzero x block");
    xv /= xv.norm();
  }
  if (t_sphere) {
    if (tv.norm() == 0.0) throw InvalidInput("face point needs a nonzero t block");
    tv /= tv.norm();
  }
  auto sigma = principal_component(p.sym, face);
  TruncPoly jet = sigma->jet(xv.data(), tv.data(), 2);
  Eigen::MatrixXd h = jet_hessian(jet, dm.n());
  Eigen::MatrixXd ht = h.bottomRows(dm.s);  // rows: d/dt_j of the gradient system
  Eigen::MatrixXd bx = x_sphere ? tangent_basis(xv) : Eigen::MatrixXd::Identity(dm.d, dm.d);
  Eigen::MatrixXd bt = t_sphere ? tangent_basis(tv) : Eigen::MatrixXd::Identity(dm.s, dm.s);
  NondegeneracyInfo info;
  info.rows = dm.s;
  info.cols = static_cast<int>(bx.cols() + bt.cols());
  Eigen::MatrixXd j(dm.s, info.cols);
  j << ht.leftCols(dm.d) * bx, ht.rightCols(dm.s) * bt;
  if (info.cols == 0) return info;  // no tangent directions at all
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  info.sigma_max = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  int rank_possible = std::min<int>(info.rows, info.cols);
  info.sigma_min = rank_possible <= svd.singularValues().size() && rank_possible > 0
                       ? svd.singularValues()(rank_possible - 1)
                       : 0.0;
  if (info.rows > info.cols) {
    info.nondegenerate = false;  // cannot reach rank s
    return info;
  }
  info.nondegenerate = info.sigma_max > 0.0 && info.sigma_min > 1e-6 * info.sigma_max;
  return info;
}

} // namespace sgcalc
