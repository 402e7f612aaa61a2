#include "sgcalc/stationary_geometry.hpp"

#include "sgcalc/classical_symbols.hpp"
#include "sgcalc/compactification.hpp"
#include "sgcalc/errors.hpp"
#include "sgcalc/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgcalc {

namespace {

constexpr int kMaxSteps = 50;
constexpr double kDedupTol = 1e-4;
// Iterates this close to an already-found point are treated as belonging
// to its basin and abandoned early; tighter than the dedup radius so a
// genuinely distinct neighbour is still resolved.
constexpr double kBasinTol = 5e-4;
constexpr double kRankTol = 1e-6;

Eigen::VectorXd jet_gradient(const TruncPoly& p, int n) {
  const MultiIndexTable& tab = p.table();
  Eigen::VectorXd g(n);
  for (int v = 0; v < n; ++v) g[v] = p.coeff(tab.var_index(v));
  return g;
}

Eigen::MatrixXd jet_hessian(const TruncPoly& p, int n) {
  Eigen::MatrixXd h(n, n);
  std::vector<int> e(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      e.assign(n, 0);
      e[i] += 1;
      e[j] += 1;
      double c = p.coeff_of(e);
      if (i == j) c *= 2.0;
      h(i, j) = c;
      h(j, i) = c;
    }
  }
  return h;
}

// Face stationary system F(x, t) = grad_t phi^face = 0 with the projective
// blocks held on their unit spheres via moving-frame charts.
struct FaceSystem {
  std::shared_ptr<const ScalarField> sigma;
  Dims dm;
  Face face = Face::Interior;
  bool xs = false, ts = false;  // block constrained to its sphere

  static FaceSystem make(const PhaseFunction& p, Face face) {
    if (face == Face::Interior)
      throw InvalidInput("stationary systems live on the boundary faces");
    FaceSystem fs;
    fs.sigma = principal_component(p.sym, face);
    fs.dm = p.sym.symbol.dims();
    fs.face = face;
    fs.xs = (face == Face::E || face == Face::PsiE);
    fs.ts = (face == Face::Psi || face == Face::PsiE);
    return fs;
  }

  static FaceSystem make(const FacePhase& p, Face face) {
    if (face == Face::Interior)
      throw InvalidInput("stationary systems live on the boundary faces");
    if (!p.e || !p.psi || !p.psie)
      throw InvalidInput("face phase needs all three components");
    if (p.e->dims() != p.psi->dims() || p.e->dims() != p.psie->dims())
      throw InvalidInput("face phase components disagree on dims");
    FaceSystem fs;
    fs.sigma = face == Face::E ? p.e : face == Face::Psi ? p.psi : p.psie;
    fs.dm = fs.sigma->dims();
    fs.face = face;
    fs.xs = (face == Face::E || face == Face::PsiE);
    fs.ts = (face == Face::Psi || face == Face::PsiE);
    return fs;
  }

  int ucols() const { return xs ? dm.d - 1 : dm.d; }
  int wcols() const { return ts ? dm.s - 1 : dm.s; }

  Eigen::VectorXd residual(const Eigen::VectorXd& x, const Eigen::VectorXd& t) const {
    TruncPoly p = sigma->jet(x.data(), t.data(), 1);
    Eigen::VectorXd g = jet_gradient(p, dm.d + dm.s);
    return g.tail(dm.s);
  }

  // F and its Jacobian with respect to the chart coordinates
  // (x-chart columns first, then t-chart columns).
  void linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& t,
                 Eigen::VectorXd& F, Eigen::MatrixXd& J,
                 Eigen::MatrixXd& Bx, Eigen::MatrixXd& Bt) const {
    const int d = dm.d, s = dm.s;
    TruncPoly p = sigma->jet(x.data(), t.data(), 2);
    Eigen::VectorXd g = jet_gradient(p, d + s);
    Eigen::MatrixXd h = jet_hessian(p, d + s);
    F = g.tail(s);
    Bx = xs ? tangent_basis(x) : Eigen::MatrixXd::Identity(d, d);
    Bt = ts ? tangent_basis(t) : Eigen::MatrixXd::Identity(s, s);
    J.resize(s, ucols() + wcols());
    J.leftCols(ucols()) = h.bottomLeftCorner(s, d) * Bx;
    J.rightCols(wcols()) = h.bottomRightCorner(s, s) * Bt;
  }

  void retract(Eigen::VectorXd& x, Eigen::VectorXd& t,
               const Eigen::MatrixXd& Bx, const Eigen::MatrixXd& Bt,
               const Eigen::VectorXd& step) const {
    x += Bx * step.head(ucols());
    if (xs) x.normalize();
    t += Bt * step.tail(wcols());
    if (ts) t.normalize();
  }
};

// Chordal embedding of a face point used for dedup and basin tests: the
// unbounded block through the ball chart, the projective block as is.
Eigen::VectorXd cpoint_embed(const FaceSystem& fs, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& t) {
  Eigen::VectorXd e(fs.dm.d + fs.dm.s);
  e.head(fs.dm.d) = fs.xs ? x : iota(x);
  e.tail(fs.dm.s) = fs.ts ? t : iota(t);
  return e;
}

std::optional<StationaryPoint> refine_impl(const FaceSystem& fs, Eigen::VectorXd x,
                                           Eigen::VectorXd t, double tol,
                                           const std::vector<Eigen::VectorXd>* basins) {
  if (fs.xs) {
    if (x.norm() == 0.0) return std::nullopt;
    x.normalize();
  }
  if (fs.ts) {
    if (t.norm() == 0.0) return std::nullopt;
    t.normalize();
  }
  Eigen::VectorXd F;
  Eigen::MatrixXd J, Bx, Bt;
  for (int it = 0; it < kMaxSteps; ++it) {
    try {
      fs.linearize(x, t, F, J, Bx, Bt);
    } catch (const DomainError&) {
      return std::nullopt;  // face component undefined here; seed is lost
    } catch (const InvalidInput&) {
      return std::nullopt;
    }
    double fn = F.norm();
    if (fn <= tol) {
      StationaryPoint q;
      q.face = fs.face;
      q.x = x;
      q.t = t;
      q.residual = fn;
      if (J.cols() > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
        q.sigma_max = svd.singularValues()(0);
        q.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
      }
      q.nondegenerate = J.rows() <= J.cols() && q.sigma_max > 0.0 &&
                        q.sigma_min > kRankTol * q.sigma_max;
      return q;
    }
    if (basins) {
      Eigen::VectorXd emb = cpoint_embed(fs, x, t);
      for (const Eigen::VectorXd& b : *basins)
        if ((emb - b).norm() < kBasinTol) return std::nullopt;
    }
    if (J.cols() == 0) return std::nullopt;  // isolated chart; seed either solves or fails
    Eigen::VectorXd step =
        J.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(-F);
    if (!step.allFinite() || step.norm() <= 1e-15 * (1.0 + x.norm() + t.norm()))
      return std::nullopt;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 25; ++ls) {
      Eigen::VectorXd xc = x, tc = t;
      fs.retract(xc, tc, Bx, Bt, alpha * step);
      double fc;
      try {
        fc = fs.residual(xc, tc).norm();
      } catch (const DomainError&) {
        alpha *= 0.5;
        continue;
      } catch (const InvalidInput&) {
        alpha *= 0.5;
        continue;
      }
      if (fc * fc <= (1.0 - 1e-4 * alpha) * fn * fn) {
        x = xc;
        t = tc;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return std::nullopt;
    if ((!fs.xs && x.norm() > 1e6) || (!fs.ts && t.norm() > 1e6)) return std::nullopt;
  }
  return std::nullopt;
}

bool embed_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i] - 1e-13) return true;
    if (a[i] > b[i] + 1e-13) return false;
  }
  return false;
}

} // namespace

std::optional<StationaryPoint> stationary_refine(const PhaseFunction& p, Face face,
                                                 Eigen::VectorXd x0, Eigen::VectorXd t0,
                                                 double newton_tol) {
  FaceSystem fs = FaceSystem::make(p, face);
  if (x0.size() != fs.dm.d || t0.size() != fs.dm.s)
    throw InvalidInput("seed dimensions do not match the phase");
  return refine_impl(fs, std::move(x0), std::move(t0), newton_tol, nullptr);
}

namespace {

StationarySet solve_on_system(const FaceSystem& fs, Face face, SolveOptions opt) {
  const int d = fs.dm.d, s = fs.dm.s;

  std::vector<Eigen::VectorXd> xseeds, tseeds;
  const std::vector<double> radii = {0.25, 0.5, 1.0, 2.0, 4.0};
  auto block_seeds = [&](int n, bool sphere) {
    std::vector<Eigen::VectorXd> out;
    std::vector<Eigen::VectorXd> dirs = sphere_directions(n, 64);
    if (sphere) {
      out = dirs;
    } else {
      out.push_back(Eigen::VectorXd::Zero(n));
      for (double r : radii) {
        if (r > opt.free_radius_cap) continue;
        for (const Eigen::VectorXd& u : dirs) out.push_back(r * u);
      }
    }
    return out;
  };
  xseeds = block_seeds(d, fs.xs);
  tseeds = block_seeds(s, fs.ts);

  StationarySet set;
  set.face = face;
  std::vector<Eigen::VectorXd> embeds;
  for (const Eigen::VectorXd& xs : xseeds) {
    for (const Eigen::VectorXd& ts : tseeds) {
      std::optional<StationaryPoint> q = refine_impl(fs, xs, ts, opt.newton_tol, &embeds);
      if (!q) continue;
      double free_norm = fs.xs ? (fs.ts ? 0.0 : q->t.norm()) : q->x.norm();
      if (free_norm > opt.free_radius_cap) continue;
      Eigen::VectorXd emb = cpoint_embed(fs, q->x, q->t);
      bool dup = false;
      for (std::size_t i = 0; i < embeds.size(); ++i) {
        if ((embeds[i] - emb).norm() < kDedupTol) {
          dup = true;
          if (q->residual < set.points[i].residual) {
            set.points[i] = *q;
            embeds[i] = emb;
          }
          break;
        }
      }
      if (!dup) {
        set.points.push_back(*q);
        embeds.push_back(emb);
      }
    }
  }

  std::vector<std::size_t> order(set.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return embed_less(embeds[a], embeds[b]);
  });
  StationarySet sorted;
  sorted.face = face;
  sorted.points.reserve(set.points.size());
  for (std::size_t i : order) sorted.points.push_back(set.points[i]);
  return sorted;
}

LambdaPoint lambda_on_system(const FaceSystem& fs, const StationaryPoint& q) {
  const int d = fs.dm.d;
  TruncPoly jp = fs.sigma->jet(q.x.data(), q.t.data(), 1);
  Eigen::VectorXd g = jet_gradient(jp, d + fs.dm.s);
  Eigen::VectorXd gx = g.head(d);

  LambdaPoint lp;
  lp.face = q.face;
  lp.x = q.x;
  lp.embed.resize(2 * d);
  switch (q.face) {
    case Face::E:
      lp.xi = gx;
      lp.embed.head(d) = q.x;
      lp.embed.tail(d) = iota(lp.xi);
      lp.phase_value = (1.0 - radial_profile(q.t.norm())) * jp.value();
      break;
    case Face::Psi:
      if (gx.norm() == 0.0)
        throw InvalidInput("x-gradient vanishes at a psi stationary point; no fiber direction");
      lp.xi = gx.normalized();
      lp.embed.head(d) = iota(q.x);
      lp.embed.tail(d) = lp.xi;
      lp.phase_value = (1.0 - radial_profile(q.x.norm())) * jp.value();
      break;
    case Face::PsiE:
      if (gx.norm() == 0.0)
        throw InvalidInput("x-gradient vanishes at a corner stationary point; no fiber direction");
      lp.xi = gx.normalized();
      lp.embed.head(d) = q.x;
      lp.embed.tail(d) = lp.xi;
      lp.phase_value = jp.value();
      break;
    default:
      throw InvalidInput("lambda extension is defined on the boundary faces");
  }
  return lp;
}

} // namespace

StationarySet stationary_solve(const PhaseFunction& p, Face face, SolveOptions opt) {
  return solve_on_system(FaceSystem::make(p, face), face, opt);
}

StationarySet stationary_solve(const FacePhase& p, Face face, SolveOptions opt) {
  return solve_on_system(FaceSystem::make(p, face), face, opt);
}

LambdaPoint lambda_extend(const PhaseFunction& p, const StationaryPoint& q) {
  return lambda_on_system(FaceSystem::make(p, q.face), q);
}

LambdaPoint lambda_extend(const FacePhase& p, const StationaryPoint& q) {
  return lambda_on_system(FaceSystem::make(p, q.face), q);
}

TangentFrame tangent_frame(const PhaseFunction& p, const StationaryPoint& q) {
  FaceSystem fs = FaceSystem::make(p, q.face);
  const int d = fs.dm.d, s = fs.dm.s;
  Eigen::VectorXd F;
  Eigen::MatrixXd J, Bx, Bt;
  fs.linearize(q.x, q.t, F, J, Bx, Bt);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankTol * smax) ++rank;
  const int cols = static_cast<int>(J.cols());
  const int k = cols - rank;

  TangentFrame fr;
  fr.chart = svd.matrixV().rightCols(k);
  fr.cloud.resize(2 * d, k);

  TruncPoly jp = fs.sigma->jet(q.x.data(), q.t.data(), 2);
  Eigen::MatrixXd h = jet_hessian(jp, d + s);
  Eigen::VectorXd gx = jet_gradient(jp, d + s).head(d);
  if (q.face != Face::E && gx.norm() == 0.0)
    throw InvalidInput("x-gradient vanishes at the stationary point; no fiber direction");
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd du = fr.chart.col(c).head(fs.ucols());
    Eigen::VectorXd dw = fr.chart.col(c).tail(fs.wcols());
    Eigen::VectorXd dx = Bx * du;
    Eigen::VectorXd dt = Bt * dw;
    Eigen::VectorXd dxi = h.topLeftCorner(d, d) * dx + h.topRightCorner(d, s) * dt;
    if (q.face != Face::E) {
      // cloud stores the fiber direction; project and rescale accordingly
      double gn = gx.norm();
      Eigen::VectorXd xih = gx / gn;
      dxi = (dxi - xih.dot(dxi) * xih) / gn;
    }
    fr.cloud.col(c).head(d) = dx;
    fr.cloud.col(c).tail(d) = dxi;
  }
  return fr;
}

CornerContinuation corner_continuation(const PhaseFunction& p, const StationaryPoint& corner,
                                       double newton_tol) {
  if (corner.face != Face::PsiE)
    throw InvalidInput("continuation starts from a corner point");
  const double R = 1e4;
  CornerContinuation cc;
  cc.gap_e = cc.gap_psi = std::numeric_limits<double>::infinity();
  LambdaPoint target = lambda_extend(p, corner);

  std::optional<StationaryPoint> qe =
      stationary_refine(p, Face::E, corner.x, R * corner.t, newton_tol);
  if (qe) {
    Eigen::VectorXd emb = lambda_extend(p, *qe).embed;
    cc.gap_e = (emb - target.embed).norm();
  }
  std::optional<StationaryPoint> qp =
      stationary_refine(p, Face::Psi, R * corner.x, corner.t, newton_tol);
  if (qp) {
    Eigen::VectorXd emb = lambda_extend(p, *qp).embed;
    cc.gap_psi = (emb - target.embed).norm();
  }
  cc.e_matched = cc.gap_e <= 1e-3;
  cc.psi_matched = cc.gap_psi <= 1e-3;
  return cc;
}

NeatnessReport neatness_report(const PhaseFunction& p, SolveOptions opt) {
  NeatnessReport rep;
  rep.e = stationary_solve(p, Face::E, opt);
  rep.psi = stationary_solve(p, Face::Psi, opt);
  rep.corner = stationary_solve(p, Face::PsiE, opt);

  const Dims dm = p.sym.symbol.dims();
  auto audit_set = [&](const StationarySet& set, int want_dim) {
    for (const StationaryPoint& q : set.points) {
      if (!q.nondegenerate) {
        ++rep.degenerate_points;
        continue;
      }
      TangentFrame fr = tangent_frame(p, q);
      if (fr.chart.cols() != want_dim) {
        rep.frames_ok = false;
        continue;
      }
      if (want_dim > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(fr.cloud);
        const Eigen::VectorXd& sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
          if (sv(i) > kRankTol * sv(0)) ++rank;
        if (rank != want_dim) rep.frames_ok = false;
      }
    }
  };
  audit_set(rep.e, dm.d - 1);
  audit_set(rep.psi, dm.d - 1);
  audit_set(rep.corner, dm.d - 2);

  for (const StationaryPoint& q : rep.corner.points) {
    if (!q.nondegenerate) continue;
    CornerContinuation cc = corner_continuation(p, q, opt.newton_tol);
    double gap = std::max(std::isfinite(cc.gap_e) ? cc.gap_e : 1e9,
                          std::isfinite(cc.gap_psi) ? cc.gap_psi : 1e9);
    rep.max_corner_gap = std::max(rep.max_corner_gap, gap);
    if (!cc.e_matched || !cc.psi_matched) ++rep.unmatched_corners;
  }

  rep.neat = rep.degenerate_points == 0 && rep.frames_ok && rep.unmatched_corners == 0;
  return rep;
}

std::string stationary_csv(const PhaseFunction& p, const NeatnessReport& rep) {
  const Dims dm = p.sym.symbol.dims();
  std::ostringstream os;
  os.precision(17);
  os << "face";
  for (int i = 0; i < dm.d; ++i) os << ",x" << (i + 1);
  for (int i = 0; i < dm.d; ++i) os << ",xi" << (i + 1);
  os << ",residual,sigma_min\n";
  auto dump = [&](const StationarySet& set) {
    for (const StationaryPoint& q : set.points) {
      os << face_name(q.face);
      try {
        LambdaPoint lp = lambda_extend(p, q);
        for (int i = 0; i < dm.d; ++i) os << "," << lp.x[i];
        for (int i = 0; i < dm.d; ++i) os << "," << lp.xi[i];
      } catch (const InvalidInput&) {
        // degenerate point without a fiber direction
        for (int i = 0; i < dm.d; ++i) os << "," << q.x[i];
        for (int i = 0; i < dm.d; ++i) os << ",nan";
      }
      os << "," << q.residual << "," << q.sigma_min << "\n";
    }
  };
  dump(rep.e);
  dump(rep.psi);
  dump(rep.corner);
  return os.str();
}

} // namespace sgcalc
