#include "sgcalc/parametrize_equiv.hpp"

#include "sgcalc/compactification.hpp"
#include "sgcalc/errors.hpp"
#include "sgcalc/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgcalc {

namespace {

constexpr double kScalingTol = 1e-9;
constexpr double kConormalTol = 1e-7;
constexpr double kIdentityTol = 1e-8;
constexpr double kMatchTol = 1e-4;
constexpr double kValueTol = 1e-6;

std::string bad(const std::string& what) { return "invalid input: " + what; }

// Sample grid for the data gates: unit directions in the x'' and xi' blocks
// at a few radii, with a fixed off-axis probe in the x' slot (the gates also
// prove the probe cannot matter).
struct GraphSamples {
  std::vector<Eigen::VectorXd> xs, ts;  // full-length coordinate tuples
};

GraphSamples graph_samples(Dims dm, int split) {
  GraphSamples g;
  int free_d = dm.d - split;
  std::vector<Eigen::VectorXd> xdirs;
  if (free_d > 0) xdirs = sphere_directions(free_d, 4);
  std::vector<Eigen::VectorXd> tdirs = sphere_directions(dm.s, 4);
  const double xr[2] = {0.8, 1.7}, tr[2] = {0.9, 2.3};
  Eigen::VectorXd probe(split);
  for (int i = 0; i < split; ++i) probe[i] = 0.37 + 0.11 * i;
  int nx = free_d > 0 ? static_cast<int>(xdirs.size()) * 2 : 1;
  for (int ix = 0; ix < nx; ++ix) {
    Eigen::VectorXd x(dm.d);
    x.head(split) = probe;
    if (free_d > 0) x.tail(free_d) = xdirs[ix / 2] * xr[ix % 2];
    for (size_t it = 0; it < tdirs.size(); ++it) {
      for (double r : tr) {
        g.xs.push_back(x);
        g.ts.push_back(tdirs[it] * r);
      }
    }
  }
  return g;
}

// Exact-scaling and variable-usage gate for one data block component.
// deg_x is the declared degree in x'', deg_t the one in xi'.
void check_component(const Expression& f, Dims dm, int split, int deg_x, int deg_t,
                     const GraphSamples& g, const std::string& label) {
  if (f.dims() != dm) throw InvalidInput(bad(label + " has mismatched dimensions"));
  int free_d = dm.d - split;
  for (size_t k = 0; k < g.xs.size(); ++k) {
    const Eigen::VectorXd& x = g.xs[k];
    const Eigen::VectorXd& t = g.ts[k];
    Jet j = f.eval_jet(x.data(), t.data(), 1);
    double scale = 1.0 + std::fabs(j.value());
    for (int i = 0; i < split; ++i)
      if (std::fabs(j.dx(i)) > 1e-9 * scale)
        throw InvalidInput(bad(label + " depends on the paired base variables"));
    double base = j.value();
    for (double mu : {2.0, 3.0}) {
      if (free_d > 0) {
        Eigen::VectorXd xs = x;
        xs.tail(free_d) *= mu;
        double want = std::pow(mu, deg_x) * base;
        double got = f.eval(xs.data(), t.data());
        if (std::fabs(got - want) > kScalingTol * (1.0 + std::fabs(got)))
          throw InvalidInput(bad(label + " does not scale with the declared base degree"));
      }
      Eigen::VectorXd ts = t * mu;
      double want = std::pow(mu, deg_t) * base;
      double got = f.eval(x.data(), ts.data());
      if (std::fabs(got - want) > kScalingTol * (1.0 + std::fabs(got)))
        throw InvalidInput(bad(label + " does not scale with the declared fiber degree"));
    }
  }
}

Expression paired_dot(Dims dm, int split) {
  Expression acc = Expression::constant(0.0, dm);
  for (int i = 0; i < split; ++i)
    acc = acc + Expression::var_x(i, dm) * Expression::var_t(i, dm);
  return acc;
}

} // namespace

ReconstructedPhase build_phase(const LagrangianGraphData& g, const Eigen::VectorXd& xi0) {
  Dims dm = g.dims;
  int split = dm.s;
  int free_d = dm.d - split;
  if (dm.d < 1 || dm.s < 1 || free_d < 0)
    throw InvalidInput(bad("graph data needs 1 <= s <= d"));
  if (!g.has_e && !g.has_psi) throw InvalidInput(bad("no graph data provided"));
  if (xi0.size() != 0 && xi0.size() != free_d)
    throw InvalidInput(bad("eliminated-block anchor has the wrong size"));
  if (g.has_e && static_cast<int>(g.Xie.size()) != free_d)
    throw InvalidInput(bad("e-side fiber block must have d - s components"));
  if (g.has_psi && static_cast<int>(g.Xpsi.size()) != split)
    throw InvalidInput(bad("psi-side base block must have s components"));
  if (!g.Xe.empty() && (static_cast<int>(g.Xe.size()) != split || !g.has_e))
    throw InvalidInput(bad("stray or missized e-side base block"));
  if (!g.Xipsi.empty() && (static_cast<int>(g.Xipsi.size()) != free_d || !g.has_psi))
    throw InvalidInput(bad("stray or missized psi-side fiber block"));

  GraphSamples samples = graph_samples(dm, split);
  for (int j = 0; j < free_d && g.has_e; ++j)
    check_component(g.Xie[j], dm, split, 0, 1, samples, "Xi^e component");
  for (int i = 0; i < split && g.has_psi; ++i)
    check_component(g.Xpsi[i], dm, split, 1, 0, samples, "X^psi component");
  for (size_t i = 0; i < g.Xe.size(); ++i)
    check_component(g.Xe[i], dm, split, 1, 0, samples, "X^e component");
  for (size_t j = 0; j < g.Xipsi.size(); ++j)
    check_component(g.Xipsi[j], dm, split, 0, 1, samples, "Xi^psi component");

  // Face components. Exact block scaling makes both sides bihomogeneous of
  // degree (1, 1), except that the psi side loses its base degree when
  // there is no x'' block; the e limit then reduces to the paired pairing.
  Expression dot_expr = paired_dot(dm, split);
  Expression phi_e, phi_psi;
  if (g.has_e) {
    phi_e = dot_expr;
    for (int j = 0; j < free_d; ++j)
      phi_e = phi_e + Expression::var_x(split + j, dm) * g.Xie[j];
  }
  if (g.has_psi) {
    phi_psi = dot_expr;
    for (int i = 0; i < split; ++i)
      phi_psi = phi_psi - g.Xpsi[i] * Expression::var_t(i, dm);
  }
  if (!g.has_e) phi_e = free_d > 0 ? phi_psi : dot_expr;
  if (!g.has_psi) phi_psi = phi_e;

  // Corner compatibility: the fiber limit of phi^e against the base limit
  // of phi^psi on unit direction pairs.
  {
    Expression corner_e = phi_e;
    Expression corner_psi = (g.has_psi && free_d == 0) ? dot_expr : phi_psi;
    std::vector<Eigen::VectorXd> xdirs = sphere_directions(dm.d, 16);
    std::vector<Eigen::VectorXd> tdirs = sphere_directions(dm.s, 16);
    for (const Eigen::VectorXd& xd : xdirs) {
      for (const Eigen::VectorXd& td : tdirs) {
        double a = corner_e.eval(xd.data(), td.data());
        double b = corner_psi.eval(xd.data(), td.data());
        if (std::fabs(a - b) > kConormalTol * (1.0 + std::max(std::fabs(a), std::fabs(b))))
          throw InvalidInput("graph data violates conormality");
      }
    }
  }

  // Redundant blocks, when supplied, must be the derivatives of the
  // defining ones: X^e = -grad_{xi'} <x'', Xi^e>, Xi^psi = -grad_{x''} <xi', X^psi>.
  if (!g.Xe.empty()) {
    Expression inner = Expression::constant(0.0, dm);
    for (int j = 0; j < free_d; ++j)
      inner = inner + Expression::var_x(split + j, dm) * g.Xie[j];
    for (size_t k = 0; k < samples.xs.size(); ++k) {
      Jet j = inner.eval_jet(samples.xs[k].data(), samples.ts[k].data(), 1);
      for (int i = 0; i < split; ++i) {
        double xe = g.Xe[i].eval(samples.xs[k].data(), samples.ts[k].data());
        if (std::fabs(xe + j.dt(i)) > kIdentityTol * (1.0 + std::fabs(xe)))
          throw InvalidInput(bad("e-side blocks violate the graph identity"));
      }
    }
  }
  if (!g.Xipsi.empty()) {
    Expression inner = Expression::constant(0.0, dm);
    for (int i = 0; i < split; ++i)
      inner = inner + Expression::var_t(i, dm) * g.Xpsi[i];
    for (size_t k = 0; k < samples.xs.size(); ++k) {
      Jet j = inner.eval_jet(samples.xs[k].data(), samples.ts[k].data(), 1);
      for (int jj = 0; jj < free_d; ++jj) {
        double xip = g.Xipsi[jj].eval(samples.xs[k].data(), samples.ts[k].data());
        if (std::fabs(xip + j.dx(split + jj)) > kIdentityTol * (1.0 + std::fabs(xip)))
          throw InvalidInput(bad("psi-side blocks violate the graph identity"));
      }
    }
  }

  // The reduced phase never references the eliminated fiber block, so the
  // anchor xi0 drops out exactly; it has already been shape-checked above.
  PrincipalTriple triple{phi_e, phi_psi, phi_e};
  ReconstructedPhase out;
  out.phase = make_phase(phi_psi, triple);
  out.glued = principal_part(out.phase.sym);
  return out;
}

namespace {

std::vector<Eigen::VectorXd> face_cloud(const PhaseFunction& p, Face face, SolveOptions opt,
                                        bool* extend_failed) {
  StationarySet set = stationary_solve(p, face, opt);
  std::vector<Eigen::VectorXd> out;
  out.reserve(set.points.size());
  for (const StationaryPoint& q : set.points) {
    try {
      out.push_back(lambda_extend(p, q).embed);
    } catch (const InvalidInput&) {
      if (extend_failed) *extend_failed = true;
    }
  }
  return out;
}

} // namespace

RoundtripReport roundtrip_verify(const PhaseFunction& src, const PhaseFunction& rec,
                                 double tol, SolveOptions opt) {
  if (src.sym.symbol.dims() != rec.sym.symbol.dims())
    throw InvalidInput("roundtrip comparison requires phases over the same dimensions");
  RoundtripReport rep;
  double* slots[3] = {&rep.hausdorff_e, &rep.hausdorff_psi, &rep.hausdorff_corner};
  Face faces[3] = {Face::E, Face::Psi, Face::PsiE};
  std::ostringstream why;
  bool ok = true;
  for (int k = 0; k < 3; ++k) {
    bool ext_fail = false;
    std::vector<Eigen::VectorXd> a = face_cloud(src, faces[k], opt, &ext_fail);
    std::vector<Eigen::VectorXd> b = face_cloud(rec, faces[k], opt, &ext_fail);
    if (ext_fail) {
      ok = false;
      why << "lambda extension failed on the " << face_name(faces[k]) << " face; ";
      continue;
    }
    double h = hausdorff_distance(a, b);
    *slots[k] = h;
    if (h <= tol) continue;
    ok = false;
    if (a.empty() != b.empty())
      why << face_name(faces[k]) << " cloud present on one side only; ";
    else
      why << face_name(faces[k]) << " clouds differ (Hausdorff " << h << "); ";
  }
  rep.pass = ok;
  rep.diagnosis = why.str();
  if (!rep.diagnosis.empty()) rep.diagnosis.resize(rep.diagnosis.size() - 2);
  return rep;
}

Signature hessian_signature(const PhaseFunction& p, const StationaryPoint& q) {
  Dims dm = p.sym.symbol.dims();
  if (q.face == Face::Interior)
    throw InvalidInput("hessian signatures are attached to boundary faces");
  if (q.x.size() != dm.d || q.t.size() != dm.s)
    throw InvalidInput("stationary point does not match the phase dimensions");
  auto comp = principal_component(p.sym, q.face);
  TruncPoly jet = comp->jet(q.x.data(), q.t.data(), 2);
  Eigen::MatrixXd H(dm.s, dm.s);
  for (int i = 0; i < dm.s; ++i)
    for (int j = 0; j < dm.s; ++j) H(i, j) = jet.partial2(dm.d + i, dm.d + j);
  H = 0.5 * (H + H.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  double scale = 0.0;
  for (int i = 0; i < dm.s; ++i) scale = std::max(scale, std::fabs(es.eigenvalues()[i]));
  Signature sig;
  for (int i = 0; i < dm.s; ++i) {
    double ev = es.eigenvalues()[i];
    if (scale == 0.0 || std::fabs(ev) <= 1e-8 * scale)
      ++sig.n_zero;
    else if (ev > 0.0)
      ++sig.n_plus;
    else
      ++sig.n_minus;
  }
  return sig;
}

WSolveResult solve_W(const Eigen::MatrixXd& B, const Eigen::MatrixXd& C) {
  if (B.rows() != B.cols() || C.rows() != C.cols() || B.rows() != C.rows())
    throw InvalidInput("solve_W needs square matrices of a common size");
  WSolveResult res;
  Eigen::MatrixXd W = B;
  for (int it = 1; it <= 200; ++it) {
    Eigen::MatrixXd next = B - W.transpose() * C * W;
    double inc = (next - W).norm();
    W = next;
    res.iterations = it;
    if (W.norm() > 1e3) break;
    if (inc <= 1e-12) {
      res.W = W;
      res.residual = (W + W.transpose() * C * W - B).norm();
      res.converged = res.residual <= 1e-10;
      break;
    }
  }
  res.message = res.converged ? "converged" : "no small solution found";
  if (!res.converged) {
    res.W = Eigen::MatrixXd();
    res.residual = 0.0;
  }
  return res;
}

namespace {

// Differential of the cloud embedding along the frame's tangent directions.
Eigen::MatrixXd embed_tangent(const StationaryPoint& q, const LambdaPoint& lp,
                              const Eigen::MatrixXd& cloud) {
  int d = static_cast<int>(q.x.size());
  Eigen::MatrixXd E(2 * d, cloud.cols());
  switch (q.face) {
    case Face::E:
      E.topRows(d) = cloud.topRows(d);
      E.bottomRows(d) = iota_jacobian(lp.xi) * cloud.bottomRows(d);
      break;
    case Face::Psi:
      E.topRows(d) = iota_jacobian(q.x) * cloud.topRows(d);
      E.bottomRows(d) = cloud.bottomRows(d);
      break;
    default:
      E = cloud;
      break;
  }
  return E;
}

// Moves a face point along chart coordinates (sphere blocks through their
// tangent basis with renormalization, free blocks directly).
void chart_move(Face face, Eigen::VectorXd& x, Eigen::VectorXd& t,
                const Eigen::VectorXd& delta) {
  int d = static_cast<int>(x.size()), s = static_cast<int>(t.size());
  bool xs = face != Face::Psi;  // x block constrained to the sphere
  bool ts = face != Face::E;
  int ux = xs ? d - 1 : d;
  if (xs) {
    Eigen::MatrixXd Bx = tangent_basis(x);
    x = (x + Bx * delta.head(ux)).normalized();
  } else {
    x += delta.head(ux);
  }
  Eigen::VectorXd dt = delta.tail(delta.size() - ux);
  if (ts) {
    Eigen::MatrixXd Bt = tangent_basis(t);
    t = (t + Bt * dt).normalized();
  } else {
    t += dt;
  }
  (void)s;
}

double free_block_norm(Face face, const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
  if (face == Face::E) return t.norm();
  if (face == Face::Psi) return x.norm();
  return 0.0;
}

struct Match {
  StationaryPoint point;
  LambdaPoint lp;
  double gap = std::numeric_limits<double>::infinity();
};

// Nearest cloud point of p to the target embedding, polished by sliding
// along the stationary manifold: a least-squares tangent step toward the
// target followed by re-solving the stationary system.
std::optional<Match> match_into(const PhaseFunction& p, Face face,
                                const Eigen::VectorXd& target, const StationarySet& own,
                                SolveOptions region) {
  std::optional<Match> best;
  for (const StationaryPoint& q : own.points) {
    try {
      LambdaPoint lp = lambda_extend(p, q);
      double gap = (lp.embed - target).norm();
      if (!best || gap < best->gap) best = Match{q, lp, gap};
    } catch (const InvalidInput&) {
    }
  }
  if (!best) return best;
  for (int it = 0; it < 40 && best->gap > 1e-12; ++it) {
    if (!best->point.nondegenerate) break;
    TangentFrame fr;
    try {
      fr = tangent_frame(p, best->point);
    } catch (const InvalidInput&) {
      break;
    }
    if (fr.chart.cols() == 0) break;
    Eigen::MatrixXd E = embed_tangent(best->point, best->lp, fr.cloud);
    Eigen::VectorXd du = E.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
                             .solve(target - best->lp.embed);
    if (!du.allFinite() || du.norm() <= 1e-15) break;
    bool improved = false;
    double alpha = 1.0;
    for (int ls = 0; ls < 8 && !improved; ++ls, alpha *= 0.5) {
      Eigen::VectorXd xc = best->point.x, tc = best->point.t;
      chart_move(face, xc, tc, fr.chart * (alpha * du));
      std::optional<StationaryPoint> pol = stationary_refine(p, face, xc, tc);
      if (!pol) continue;
      if (free_block_norm(face, pol->x, pol->t) > region.free_radius_cap) continue;
      try {
        LambdaPoint lc = lambda_extend(p, *pol);
        double gc = (lc.embed - target).norm();
        if (gc < best->gap - 1e-15) {
          best = Match{*pol, lc, gc};
          improved = true;
        }
      } catch (const InvalidInput&) {
      }
    }
    if (!improved) break;
  }
  return best;
}

// Intertwiner data from a matched pair: C = H1 / 2 and B the symmetrized
// second-order mismatch of the two theta-Hessians in H1's frame.
void try_attach_W(const PhaseFunction& p1, const StationaryPoint& q1,
                  const PhaseFunction& p2, const StationaryPoint& q2,
                  std::optional<Eigen::MatrixXd>& slot) {
  Dims dm = p1.sym.symbol.dims();
  auto theta_hessian = [&](const PhaseFunction& p, const StationaryPoint& q) {
    auto comp = principal_component(p.sym, q.face);
    TruncPoly jet = comp->jet(q.x.data(), q.t.data(), 2);
    Eigen::MatrixXd H(dm.s, dm.s);
    for (int i = 0; i < dm.s; ++i)
      for (int j = 0; j < dm.s; ++j) H(i, j) = jet.partial2(dm.d + i, dm.d + j);
    return Eigen::MatrixXd(0.5 * (H + H.transpose().eval()));
  };
  Eigen::MatrixXd H1 = theta_hessian(p1, q1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H1);
  double emax = 0.0, emin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dm.s; ++i) {
    emax = std::max(emax, std::fabs(es.eigenvalues()[i]));
    emin = std::min(emin, std::fabs(es.eigenvalues()[i]));
  }
  if (emax == 0.0 || emin <= 1e-10 * emax) return;
  Eigen::MatrixXd H2 = theta_hessian(p2, q2);
  Eigen::MatrixXd Hinv = H1.inverse();
  Eigen::MatrixXd B = 0.5 * Hinv.transpose() * (H2 - H1) * Hinv;
  WSolveResult w = solve_W(B, 0.5 * H1);
  if (w.converged) slot = w.W;
}

} // namespace

EquivalenceReport equivalence_check(const PhaseFunction& p1, const PhaseFunction& p2,
                                    SolveOptions region) {
  if (p1.sym.symbol.dims() != p2.sym.symbol.dims())
    throw InvalidInput("equivalence comparison requires phases over the same dimensions");
  EquivalenceReport rep;
  bool lagr_ok = true, values_ok = true, sigs_ok = true;
  for (Face face : {Face::E, Face::Psi, Face::PsiE}) {
    StationarySet s1 = stationary_solve(p1, face, region);
    StationarySet s2 = stationary_solve(p2, face, region);
    if (s1.points.empty() && s2.points.empty()) continue;
    if (s1.points.empty() || s2.points.empty()) {
      lagr_ok = false;
      rep.unmatched += static_cast<int>(s1.points.size() + s2.points.size());
      continue;
    }
    for (const StationaryPoint& q1 : s1.points) {
      LambdaPoint l1;
      try {
        l1 = lambda_extend(p1, q1);
      } catch (const InvalidInput&) {
        lagr_ok = false;
        ++rep.unmatched;
        continue;
      }
      std::optional<Match> m = match_into(p2, face, l1.embed, s2, region);
      if (!m || m->gap > kMatchTol) {
        lagr_ok = false;
        ++rep.unmatched;
        continue;
      }
      rep.max_cloud_gap = std::max(rep.max_cloud_gap, m->gap);
      double dv = std::fabs(l1.phase_value - m->lp.phase_value);
      rep.max_value_gap = std::max(rep.max_value_gap, dv);
      if (dv > kValueTol * (1.0 + std::fabs(l1.phase_value))) values_ok = false;
      if (!(hessian_signature(p1, q1) == hessian_signature(p2, m->point))) sigs_ok = false;
      if (!rep.solver_W) try_attach_W(p1, q1, p2, m->point, rep.solver_W);
    }
    for (const StationaryPoint& q2 : s2.points) {
      LambdaPoint l2;
      try {
        l2 = lambda_extend(p2, q2);
      } catch (const InvalidInput&) {
        lagr_ok = false;
        ++rep.unmatched;
        continue;
      }
      std::optional<Match> m = match_into(p1, face, l2.embed, s1, region);
      if (!m || m->gap > kMatchTol) {
        lagr_ok = false;
        ++rep.unmatched;
      } else {
        rep.max_cloud_gap = std::max(rep.max_cloud_gap, m->gap);
      }
    }
  }
  if (!lagr_ok)
    rep.verdict = "Lagrangians differ";
  else if (!values_ok)
    rep.verdict = "phase values differ";
  else if (!sigs_ok)
    rep.verdict = "signature mismatch";
  else
    rep.verdict = "equivalent (principal level)";
  rep.equivalent = lagr_ok && values_ok && sigs_ok;
  return rep;
}

} // namespace sgcalc
