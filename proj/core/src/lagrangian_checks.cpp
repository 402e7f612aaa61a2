#include "sgcalc/lagrangian_checks.hpp"

#include "sgcalc/classical_symbols.hpp"
#include "sgcalc/geometry.hpp"

#include <cmath>

namespace sgcalc {

double one_form_psi(const Eigen::VectorXd& xi, const Eigen::VectorXd& dx) {
  return xi.dot(dx);
}

double one_form_e(const Eigen::VectorXd& x, const Eigen::VectorXd& dxi) {
  return -x.dot(dxi);
}

double symplectic_form(const Eigen::VectorXd& ux, const Eigen::VectorXd& uxi,
                       const Eigen::VectorXd& vx, const Eigen::VectorXd& vxi) {
  return uxi.dot(vx) - vxi.dot(ux);
}

namespace {

// Largest relative Euler defect |r . grad_r sigma - sigma| / max(1, |sigma|)
// over a direction/radius grid, where r is the homogeneity block of the face.
double euler_defect(const ScalarField& sigma, bool in_x) {
  const Dims dm = sigma.dims();
  const std::vector<double> radii = {0.5, 1.0, 3.0};
  std::vector<Eigen::VectorXd> xdirs = sphere_directions(dm.d, 8);
  std::vector<Eigen::VectorXd> tdirs = sphere_directions(dm.s, 8);
  double worst = 0.0;
  for (const Eigen::VectorXd& ux : xdirs) {
    for (const Eigen::VectorXd& ut : tdirs) {
      for (double rx : radii) {
        for (double rt : radii) {
          Eigen::VectorXd x = rx * ux, t = rt * ut;
          TruncPoly p = sigma.jet(x.data(), t.data(), 1);
          const MultiIndexTable& tab = p.table();
          double radial = 0.0;
          if (in_x) {
            for (int i = 0; i < dm.d; ++i) radial += x[i] * p.coeff(tab.var_index(i));
          } else {
            for (int j = 0; j < dm.s; ++j) radial += t[j] * p.coeff(tab.var_index(dm.d + j));
          }
          double defect = std::fabs(radial - p.value()) / std::max(1.0, std::fabs(p.value()));
          worst = std::max(worst, defect);
        }
      }
    }
  }
  return worst;
}

} // namespace

LagrangianReport lagrangian_validate(const PhaseFunction& p, const NeatnessReport& rep,
                                     double rel_tol, double euler_tol) {
  LagrangianReport out;

  out.euler_e_max = euler_defect(*principal_component(p.sym, Face::E), true);
  out.euler_psi_max = euler_defect(*principal_component(p.sym, Face::Psi), false);

  auto scan_set = [&](const StationarySet& set) {
    for (const StationaryPoint& q : set.points) {
      LambdaPoint lp = lambda_extend(p, q);
      if (q.face != Face::E)
        out.phase_value_max = std::max(out.phase_value_max, std::fabs(lp.phase_value));
      if (q.face == Face::PsiE)
        out.corner_pairing_max =
            std::max(out.corner_pairing_max, std::fabs(lp.x.dot(lp.xi)));
      if (!q.nondegenerate) continue;  // no frame to contract against
      TangentFrame fr = tangent_frame(p, q);
      for (int c = 0; c < fr.cloud.cols(); ++c) {
        Eigen::VectorXd dx = fr.cloud.col(c).head(lp.x.size());
        Eigen::VectorXd dxi = fr.cloud.col(c).tail(lp.x.size());
        double scale = lp.x.norm() * dxi.norm() + lp.xi.norm() * dx.norm();
        if (scale <= 0.0) continue;
        if (q.face == Face::Psi) {
          out.alpha_psi_max =
              std::max(out.alpha_psi_max, std::fabs(one_form_psi(lp.xi, dx)) / scale);
        } else if (q.face == Face::E) {
          out.alpha_e_max =
              std::max(out.alpha_e_max, std::fabs(one_form_e(lp.x, dxi)) / scale);
        } else {
          out.alpha_psi_max =
              std::max(out.alpha_psi_max, std::fabs(one_form_psi(lp.xi, dx)) / scale);
          out.alpha_e_max =
              std::max(out.alpha_e_max, std::fabs(one_form_e(lp.x, dxi)) / scale);
        }
      }
    }
  };
  scan_set(rep.e);
  scan_set(rep.psi);
  scan_set(rep.corner);

  if (out.euler_e_max > euler_tol || out.euler_psi_max > euler_tol) {
    out.verdict = "euler identity violated";
  } else if (out.phase_value_max > rel_tol) {
    out.verdict = "phase does not vanish on its stationary set";
  } else if (out.alpha_psi_max > rel_tol || out.alpha_e_max > rel_tol) {
    out.verdict = "one-form does not vanish on the cloud tangents";
  } else if (out.corner_pairing_max > rel_tol) {
    out.verdict = "corner pairing violated";
  } else {
    out.valid = true;
    out.verdict = "lagrangian";
  }
  return out;
}

} // namespace sgcalc
