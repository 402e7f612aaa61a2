#include "sgcalc/classical_symbols.hpp"

#include "sgcalc/errors.hpp"
#include "sgcalc/geometry.hpp"
#include "sgcalc/multi_index.hpp"
#include "sgcalc/trunc_poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace sgcalc {

namespace {

constexpr double kExtrapAbortRel = 1e-5;
constexpr int kScaleSteps = 9;  // radii 4 * 2^k, k = 0..8

double block_norm(const double* v, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

// Quintic smoothstep and its derivatives on [0, 1].
double smoothstep(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smoothstep_d1(double u) { return u * u * (30.0 + u * (-60.0 + 30.0 * u)); }
double smoothstep_d2(double u) { return u * (60.0 + u * (-180.0 + 120.0 * u)); }
double smoothstep_d3(double u) { return 60.0 + u * (-360.0 + 360.0 * u); }

} // namespace

Excision::Excision(Dims dims, bool in_x, double inner, double outer)
    : dims_(dims), in_x_(in_x), inner_(inner), outer_(outer) {
  if (!(inner > 0.0) || !(outer > inner))
    throw InvalidInput("excision radii must satisfy 0 < inner < outer");
}

double Excision::value(const double* x, const double* t) const {
  const double* v = in_x_ ? x : t;
  int n = in_x_ ? dims_.d : dims_.s;
  double r = block_norm(v, n);
  if (r <= inner_) return 0.0;
  if (r >= outer_) return 1.0;
  return smoothstep((r - inner_) / (outer_ - inner_));
}

TruncPoly Excision::jet(const double* x, const double* t, int order) const {
  const double* v = in_x_ ? x : t;
  int nb = in_x_ ? dims_.d : dims_.s;
  int base = in_x_ ? 0 : dims_.d;
  int n = dims_.n();
  double r = block_norm(v, nb);
  if (r < inner_) return TruncPoly(n, order, 0.0);
  if (r > outer_) return TruncPoly(n, order, 1.0);
  TruncPoly sq(n, order, 0.0);
  for (int i = 0; i < nb; ++i) {
    TruncPoly vi = TruncPoly::variable(n, order, base + i, v[i]);
    sq += vi * vi;
  }
  TruncPoly rp = tp_sqrt(sq);
  double w = outer_ - inner_;
  double u = (r - inner_) / w;
  double cs[4] = {smoothstep(u), smoothstep_d1(u) / w, smoothstep_d2(u) / (2.0 * w * w),
                  smoothstep_d3(u) / (6.0 * w * w * w)};
  return rp.compose_series(cs, order + 1);
}

PrincipalComponent::PrincipalComponent(std::shared_ptr<const ScalarField> a, OrderPair m,
                                       Face face)
    : a_(std::move(a)), m_(m), face_(face) {
  if (face_ == Face::Interior)
    throw InvalidInput("principal components are attached to boundary faces");
}

Dims PrincipalComponent::dims() const { return a_->dims(); }

namespace {

// Scale reference for the block(s) a face limit stretches; zero means the
// base point cannot anchor a ray.
double face_ref(Face face, const double* x, int d, const double* t, int s) {
  double nx = block_norm(x, d), nt = block_norm(t, s);
  switch (face) {
    case Face::E: return nx;
    case Face::Psi: return nt;
    default: return std::max(nx, nt);
  }
}

double face_scale_power(Face face, OrderPair m, int bx, int bt) {
  switch (face) {
    case Face::E: return bx - m.me;
    case Face::Psi: return bt - m.mpsi;
    default: return bx + bt - m.me - m.mpsi;
  }
}

} // namespace

TruncPoly PrincipalComponent::jet(const double* x, const double* t, int order) const {
  Dims dm = a_->dims();
  double ref = face_ref(face_, x, dm.d, t, dm.s);
  if (ref == 0.0)
    throw InvalidInput("principal limit needs a nonzero base point in the scaled block");
  bool sx = face_ != Face::Psi, st = face_ != Face::E;
  std::vector<double> xs(dm.d), ts(dm.s);
  std::vector<TruncPoly> jets;
  std::vector<double> mus;
  jets.reserve(kScaleSteps);
  for (int k = 0; k < kScaleSteps; ++k) {
    double mu = std::ldexp(4.0, k) / ref;
    for (int i = 0; i < dm.d; ++i) xs[i] = sx ? mu * x[i] : x[i];
    for (int i = 0; i < dm.s; ++i) ts[i] = st ? mu * t[i] : t[i];
    jets.push_back(a_->jet(xs.data(), ts.data(), order));
    mus.push_back(mu);
  }
  const MultiIndexTable& tab = jets[0].table();
  TruncPoly out(dm.n(), order, 0.0);
  std::vector<double> series(kScaleSteps), vals(tab.size()), errs(tab.size());
  for (int i = 0; i < tab.size(); ++i) {
    const auto* e = tab.exps(i);
    int bx = 0, bt = 0;
    for (int v = 0; v < dm.d; ++v) bx += e[v];
    for (int v = 0; v < dm.s; ++v) bt += e[dm.d + v];
    double p = face_scale_power(face_, m_, bx, bt);
    for (int k = 0; k < kScaleSteps; ++k) series[k] = jets[k].coeff(i) * std::pow(mus[k], p);
    auto [val, err] = richardson_extrapolate(series);
    vals[i] = val;
    errs[i] = err;
  }
  double scale = 1.0;
  for (double v : vals) scale = std::max(scale, std::fabs(v));
  for (int i = 0; i < tab.size(); ++i) {
    if (errs[i] > kExtrapAbortRel * scale)
      throw InvalidInput(std::string("no classical limit on the ") + face_name(face_) +
                         " face: jet coefficients do not settle");
    out.coeff(i) = vals[i];
  }
  return out;
}

double PrincipalComponent::value(const double* x, const double* t) const {
  Dims dm = a_->dims();
  double ref = face_ref(face_, x, dm.d, t, dm.s);
  if (ref == 0.0)
    throw InvalidInput("principal limit needs a nonzero base point in the scaled block");
  bool sx = face_ != Face::Psi, st = face_ != Face::E;
  std::vector<double> xs(dm.d), ts(dm.s), series(kScaleSteps);
  for (int k = 0; k < kScaleSteps; ++k) {
    double mu = std::ldexp(4.0, k) / ref;
    for (int i = 0; i < dm.d; ++i) xs[i] = sx ? mu * x[i] : x[i];
    for (int i = 0; i < dm.s; ++i) ts[i] = st ? mu * t[i] : t[i];
    double p = face_scale_power(face_, m_, 0, 0);
    series[k] = a_->value(xs.data(), ts.data()) * std::pow(mu, p);
  }
  auto [val, err] = richardson_extrapolate(series);
  if (err > kExtrapAbortRel * std::max(1.0, std::fabs(val)))
    throw InvalidInput(std::string("no classical limit on the ") + face_name(face_) +
                       " face: values do not settle");
  return val;
}

namespace {

class DifferenceField final : public ScalarField {
public:
  DifferenceField(std::shared_ptr<const ScalarField> a, std::shared_ptr<const ScalarField> b)
      : a_(std::move(a)), b_(std::move(b)) {
    if (a_->dims() != b_->dims()) throw InvalidInput("field difference needs matching dims");
  }
  Dims dims() const override { return a_->dims(); }
  TruncPoly jet(const double* x, const double* t, int order) const override {
    TruncPoly r = a_->jet(x, t, order);
    r -= b_->jet(x, t, order);
    return r;
  }
  double value(const double* x, const double* t) const override {
    return a_->value(x, t) - b_->value(x, t);
  }

private:
  std::shared_ptr<const ScalarField> a_, b_;
};

// chi_e sigma_e + chi_psi (sigma_psi - chi_e sigma_psie). Terms whose
// cutoff vanishes on a neighbourhood are skipped, so the homogeneous
// components are never evaluated where they may be singular.
class GluedPrincipal final : public ScalarField {
public:
  GluedPrincipal(Dims dm, std::shared_ptr<const ScalarField> se,
                 std::shared_ptr<const ScalarField> sp, std::shared_ptr<const ScalarField> sc,
                 double r_inner, double r_outer)
      : dims_(dm), se_(std::move(se)), sp_(std::move(sp)), sc_(std::move(sc)),
        chi_e_(dm, true, r_inner, r_outer), chi_psi_(dm, false, r_inner, r_outer),
        r_inner_(r_inner) {}

  Dims dims() const override { return dims_; }

  TruncPoly jet(const double* x, const double* t, int order) const override {
    double nx = block_norm(x, dims_.d), nt = block_norm(t, dims_.s);
    TruncPoly out(dims_.n(), order, 0.0);
    TruncPoly ce;
    if (nx >= r_inner_) {
      ce = chi_e_.jet(x, t, order);
      out += ce * se_->jet(x, t, order);
    }
    if (nt >= r_inner_) {
      TruncPoly inner = sp_->jet(x, t, order);
      if (nx >= r_inner_) inner -= ce * sc_->jet(x, t, order);
      out += chi_psi_.jet(x, t, order) * inner;
    }
    return out;
  }

  double value(const double* x, const double* t) const override {
    double nx = block_norm(x, dims_.d), nt = block_norm(t, dims_.s);
    double out = 0.0, ce = 0.0;
    if (nx >= r_inner_) {
      ce = chi_e_.value(x, t);
      out += ce * se_->value(x, t);
    }
    if (nt >= r_inner_) {
      double inner = sp_->value(x, t);
      if (nx >= r_inner_) inner -= ce * sc_->value(x, t);
      out += chi_psi_.value(x, t) * inner;
    }
    return out;
  }

private:
  Dims dims_;
  std::shared_ptr<const ScalarField> se_, sp_, sc_;
  Excision chi_e_, chi_psi_;
  double r_inner_;
};

} // namespace

std::shared_ptr<const ScalarField> field_difference(std::shared_ptr<const ScalarField> a,
                                                    std::shared_ptr<const ScalarField> b) {
  return std::make_shared<DifferenceField>(std::move(a), std::move(b));
}

std::shared_ptr<const ScalarField> principal_component(const ClassicalSymbol& s, Face face) {
  if (face == Face::Interior)
    throw InvalidInput("principal components are attached to boundary faces");
  if (s.declared) {
    const Expression& e = face == Face::E    ? s.declared->e
                          : face == Face::Psi ? s.declared->psi
                                              : s.declared->psie;
    return std::make_shared<ExpressionField>(e);
  }
  auto a = std::make_shared<ExpressionField>(s.symbol);
  return std::make_shared<PrincipalComponent>(a, s.order, face);
}

std::shared_ptr<const ScalarField> principal_part(const ClassicalSymbol& s, double inner,
                                                  double outer) {
  if (!(inner > 0.0) || !(outer > inner))
    throw InvalidInput("excision radii must satisfy 0 < inner < outer");
  return std::make_shared<GluedPrincipal>(s.symbol.dims(), principal_component(s, Face::E),
                                          principal_component(s, Face::Psi),
                                          principal_component(s, Face::PsiE), inner, outer);
}

namespace {

Eigen::VectorXd random_point(Rng& rng, int n, double rlo, double rhi) {
  Eigen::VectorXd v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
  } while (v.norm() == 0.0);
  v *= rng.uniform(rlo, rhi) / v.norm();
  return v;
}

// Largest relative defect of f(mu * block) = mu^deg f(block) over mu in
// {2, 3, 5}; scale_x picks the block.
double homogeneity_defect(const Expression& f, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& t, double deg, bool scale_x) {
  double base = f.eval(x.data(), t.data());
  double worst = 0.0;
  for (double mu : {2.0, 3.0, 5.0}) {
    Eigen::VectorXd xs = scale_x ? (mu * x).eval() : x;
    Eigen::VectorXd ts = scale_x ? t : (mu * t).eval();
    double lhs = f.eval(xs.data(), ts.data());
    double rhs = std::pow(mu, deg) * base;
    worst = std::max(worst, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(rhs)));
  }
  return worst;
}

} // namespace

TripleCheckReport verify_declared(const ClassicalSymbol& s, unsigned seed) {
  if (!s.declared) throw InvalidInput("no declared principal triple to verify");
  Dims dm = s.symbol.dims();
  Rng rng(seed);
  TripleCheckReport rep;
  auto a = std::make_shared<ExpressionField>(s.symbol);

  struct Slot {
    Face face;
    const Expression* decl;
    FaceCheck* out;
  };
  Slot slots[3] = {{Face::E, &s.declared->e, &rep.e},
                   {Face::Psi, &s.declared->psi, &rep.psi},
                   {Face::PsiE, &s.declared->psie, &rep.psie}};
  for (auto& sl : slots) {
    PrincipalComponent extract(a, s.order, sl.face);
    double herr = 0.0, merr = 0.0;
    for (int q = 0; q < 20; ++q) {
      Eigen::VectorXd x = random_point(rng, dm.d, 1.0, 3.0);
      Eigen::VectorXd t = random_point(rng, dm.s, 0.5, 3.0);
      if (sl.face == Face::E || sl.face == Face::PsiE)
        herr = std::max(herr, homogeneity_defect(*sl.decl, x, t, s.order.me, true));
      if (sl.face == Face::Psi || sl.face == Face::PsiE)
        herr = std::max(herr, homogeneity_defect(*sl.decl, x, t, s.order.mpsi, false));
      double want = extract.value(x.data(), t.data());
      double got = sl.decl->eval(x.data(), t.data());
      merr = std::max(merr, std::fabs(got - want) / std::max(1.0, std::fabs(want)));
    }
    sl.out->homogeneity_err = herr;
    sl.out->match_err = merr;
    sl.out->homogeneous = herr <= 1e-9;
    sl.out->matches = merr <= 1e-6;
  }
  rep.consistent = rep.e.homogeneous && rep.e.matches && rep.psi.homogeneous &&
                   rep.psi.matches && rep.psie.homogeneous && rep.psie.matches;
  return rep;
}

CompatibilityReport compatibility_check(const ClassicalSymbol& s, unsigned seed) {
  Dims dm = s.symbol.dims();
  Rng rng(seed);
  auto a = std::make_shared<ExpressionField>(s.symbol);
  auto sig_e = std::make_shared<PrincipalComponent>(a, s.order, Face::E);
  auto sig_psi = std::make_shared<PrincipalComponent>(a, s.order, Face::Psi);
  PrincipalComponent psi_of_e(sig_e, s.order, Face::Psi);
  PrincipalComponent e_of_psi(sig_psi, s.order, Face::E);
  PrincipalComponent diag(a, s.order, Face::PsiE);
  CompatibilityReport rep;
  for (int q = 0; q < 20; ++q) {
    Eigen::VectorXd x = random_point(rng, dm.d, 1.0, 3.0);
    Eigen::VectorXd t = random_point(rng, dm.s, 1.0, 3.0);
    double v1 = psi_of_e.value(x.data(), t.data());
    double v2 = e_of_psi.value(x.data(), t.data());
    double v3 = diag.value(x.data(), t.data());
    double scale = std::max({1.0, std::fabs(v1), std::fabs(v2), std::fabs(v3)});
    double spread = std::max({std::fabs(v1 - v2), std::fabs(v1 - v3), std::fabs(v2 - v3)});
    rep.max_rel_err = std::max(rep.max_rel_err, spread / scale);
  }
  rep.consistent = rep.max_rel_err <= 1e-6;
  return rep;
}

namespace {

struct FacePlan {
  bool x_on_sphere = false;
  bool t_on_sphere = false;
};

Eigen::VectorXd field_grad(const ScalarField& f, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& t) {
  TruncPoly p = f.jet(x.data(), t.data(), 1);
  const MultiIndexTable& tab = p.table();
  int n = x.size() + t.size();
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = p.coeff(tab.var_index(i));
  return g;
}

// Deterministic projected descent on sigma^2 from the best mesh point;
// sphere blocks stay on the sphere, free blocks stay inside radius 8.
void polish_minimum(const ScalarField& f, FacePlan plan, Eigen::VectorXd& x,
                    Eigen::VectorXd& t, double& best_abs) {
  int d = x.size(), st = t.size();
  for (int it = 0; it < 60; ++it) {
    double v = f.value(x.data(), t.data());
    Eigen::VectorXd g = field_grad(f, x, t);
    Eigen::VectorXd gx = 2.0 * v * g.head(d);
    Eigen::VectorXd gt = 2.0 * v * g.tail(st);
    if (plan.x_on_sphere) gx -= gx.dot(x) * x;
    if (plan.t_on_sphere) gt -= gt.dot(t) * t;
    double gn2 = gx.squaredNorm() + gt.squaredNorm();
    if (gn2 <= 1e-28) break;
    double f0 = v * v, step = 0.5;
    bool moved = false;
    for (int bt = 0; bt < 24; ++bt, step *= 0.5) {
      Eigen::VectorXd xn = x - step * gx;
      Eigen::VectorXd tn = t - step * gt;
      if (plan.x_on_sphere) xn.normalize();
      else if (xn.norm() > 8.0) xn *= 8.0 / xn.norm();
      if (plan.t_on_sphere) tn.normalize();
      else if (tn.norm() > 8.0) tn *= 8.0 / tn.norm();
      double fn = f.value(xn.data(), tn.data());
      if (fn * fn <= f0 - 1e-4 * step * gn2) {
        x = xn;
        t = tn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  best_abs = std::min(best_abs, std::fabs(f.value(x.data(), t.data())));
}

FaceEllipticity face_ellipticity(const ScalarField& sig, Dims dm, Face face, double eps_ell) {
  FacePlan plan;
  plan.x_on_sphere = face != Face::Psi;
  plan.t_on_sphere = face != Face::E;
  std::vector<Eigen::VectorXd> xs, ts;
  if (plan.x_on_sphere) {
    xs = sphere_directions(dm.d, 32);
  } else {
    xs.push_back(Eigen::VectorXd::Zero(dm.d));
    for (double r : {0.5, 1.0, 2.0, 4.0, 8.0})
      for (const auto& u : sphere_directions(dm.d, 16)) xs.push_back(r * u);
  }
  if (plan.t_on_sphere) {
    ts = sphere_directions(dm.s, 32);
  } else {
    ts.push_back(Eigen::VectorXd::Zero(dm.s));
    for (double r : {0.5, 1.0, 2.0, 4.0, 8.0})
      for (const auto& u : sphere_directions(dm.s, 16)) ts.push_back(r * u);
  }
  FaceEllipticity out;
  out.min_abs = std::numeric_limits<double>::infinity();
  for (const auto& xp : xs)
    for (const auto& tp : ts) {
      double v = std::fabs(sig.value(xp.data(), tp.data()));
      out.scale = std::max(out.scale, v);
      if (v < out.min_abs) {
        out.min_abs = v;
        out.witness_x = xp;
        out.witness_t = tp;
      }
    }
  polish_minimum(sig, plan, out.witness_x, out.witness_t, out.min_abs);
  out.nonvanishing = out.scale > 0.0 && out.min_abs >= eps_ell * out.scale;
  return out;
}

} // namespace

EllipticityReport ellipticity_check(const ClassicalSymbol& s, double eps_ell, unsigned seed) {
  (void)seed;  // meshes are deterministic; kept for interface stability
  Dims dm = s.symbol.dims();
  EllipticityReport rep;
  rep.e = face_ellipticity(*principal_component(s, Face::E), dm, Face::E, eps_ell);
  rep.psi = face_ellipticity(*principal_component(s, Face::Psi), dm, Face::Psi, eps_ell);
  rep.psie = face_ellipticity(*principal_component(s, Face::PsiE), dm, Face::PsiE, eps_ell);
  rep.elliptic = rep.e.nonvanishing && rep.psi.nonvanishing && rep.psie.nonvanishing;
  return rep;
}

} // namespace sgcalc
