#include "sgcalc/oscint.hpp"

#include "sgcalc/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

namespace sgcalc {

namespace {

constexpr double kRowCutoff = 1e-13;    // relative to the running row maximum
constexpr int kQuietRows = 50;          // s = 1: rows below cutoff before stopping
constexpr int kQuietRings = 12;         // s = 2: rings below cutoff before stopping
constexpr double kEnvelopeReach = 40.0; // exponent at the base box edge
constexpr long long kMaxPoints = 2000000000LL;
constexpr double kProbeWindow = 0.42;
constexpr double kProbeEps = 1e-6;
constexpr double kSlopeThreshold = -3.0;
constexpr double kMassFloor = 1e-8;
constexpr double kUnderflowSlope = -999.0;

std::string bad(const std::string& what) { return "invalid input: " + what; }

struct Kahan {
  double s = 0.0, c = 0.0;
  void add(double v) {
    double y = v - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

// max|grad_x phi| <= ax + bx |theta|, max|grad_theta phi| <= mt on the box
struct GradModel {
  double ax = 1.0, bx = 0.0, mt = 1.0;
};

struct KernelSpec {
  Dims dims;
  const Expression* phi = nullptr;
  const Expression* amp = nullptr;
  const Expression* profile = nullptr;  // optional extra base factor
  Eigen::MatrixXd env_quad;
  Eigen::VectorXd env_center;
  double eps = 0.0;
  double mod_lambda = 0.0;
  Eigen::VectorXd mod_dir;
  double radius_x = 0.0;
  double theta_cap = 0.0;
  GradModel grad;
};

struct KernelOut {
  std::complex<double> sum{0.0, 0.0};
  double mass = 0.0;
  long long points = 0;
  double reach_theta = 0.0;
  double step_theta = 0.0;
  double min_step_x = std::numeric_limits<double>::infinity();
};

struct RowResult {
  double re = 0.0, im = 0.0, mass = 0.0;
  long long pts = 0;
};

// One fiber row: tensor trapezoid over the base box. The amplitude carries
// the envelope and the base part of the regulator; the fiber part of the
// regulator is a constant scale applied by the caller.
RowResult x_row(const KernelSpec& k, const double* tv, double& hx_used) {
  int d = k.dims.d;
  double freq = k.grad.ax + k.mod_lambda;
  if (k.dims.s >= 1) {
    double tn = 0.0;
    for (int j = 0; j < k.dims.s; ++j) tn += tv[j] * tv[j];
    freq += k.grad.bx * std::sqrt(tn);
  }
  double h = M_PI / (8.0 * std::max(1.0, freq));
  int n = std::max(2, (int)std::ceil(2.0 * k.radius_x / h) + 1);
  double hx = 2.0 * k.radius_x / (n - 1);
  hx_used = hx;

  const CompiledExpr& phiC = k.phi->compiled();
  const CompiledExpr& ampC = k.amp->compiled();
  const CompiledExpr* profC = k.profile ? &k.profile->compiled() : nullptr;
  thread_local std::vector<double> scratch;
  int need = std::max(phiC.scratch_size(),
                      std::max(ampC.scratch_size(), profC ? profC->scratch_size() : 0));
  if ((int)scratch.size() < need) scratch.resize(need);

  Kahan re, im, mass;
  long long pts = 0;
  double xv[2] = {0.0, 0.0};
  int n1 = (d == 2) ? n : 1;
  for (int i1 = 0; i1 < n1; ++i1) {
    double w1 = 1.0;
    if (d == 2) {
      xv[1] = k.env_center(1) - k.radius_x + i1 * hx;
      w1 = (i1 == 0 || i1 == n - 1) ? 0.5 : 1.0;
    }
    for (int i0 = 0; i0 < n; ++i0) {
      xv[0] = k.env_center(0) - k.radius_x + i0 * hx;
      double w = w1 * ((i0 == 0 || i0 == n - 1) ? 0.5 : 1.0);

      double q = 0.0, xn = 0.0;
      for (int a = 0; a < d; ++a) {
        double da = xv[a] - k.env_center(a);
        for (int b = 0; b < d; ++b) q += da * k.env_quad(a, b) * (xv[b] - k.env_center(b));
        xn += xv[a] * xv[a];
      }
      double ex = q + k.eps * xn;
      if (ex > kEnvelopeReach + 2.0) continue;  // below 1e-18 of the envelope peak

      double env = std::exp(-ex);
      double av = ampC.eval(xv, tv, scratch.data());
      if (profC) av *= profC->eval(xv, nullptr, scratch.data());
      double m = av * env;
      double ph = phiC.eval(xv, tv, scratch.data());
      if (k.mod_lambda != 0.0) {
        double dm = 0.0;
        for (int a = 0; a < d; ++a) dm += k.mod_dir(a) * xv[a];
        ph -= k.mod_lambda * dm;
      }
      double wm = w * m;
      re.add(wm * std::cos(ph));
      im.add(wm * std::sin(ph));
      mass.add(std::abs(wm));
      ++pts;
    }
  }
  double cell = (d == 2) ? hx * hx : hx;
  return {re.s * cell, im.s * cell, mass.s * cell, pts};
}

KernelOut march(const KernelSpec& k) {
  KernelOut out;
  double ht = M_PI / (8.0 * std::max(1.0, k.grad.mt));
  out.step_theta = ht;
  Kahan gre, gim, gmass;
  double gmax = 0.0;

  auto take_row = [&](const double* tv, double tn) {
    double hx = 0.0;
    RowResult row = x_row(k, tv, hx);
    out.points += row.pts;
    if (out.points > kMaxPoints) throw DomainError("quadrature budget exceeded");
    out.min_step_x = std::min(out.min_step_x, hx);
    double reg = std::exp(-k.eps * tn);
    double rre = row.re * reg, rim = row.im * reg;
    gre.add(rre);
    gim.add(rim);
    gmass.add(row.mass * reg);
    double mag = std::hypot(rre, rim);
    gmax = std::max(gmax, mag);
    return mag;
  };

  if (k.dims.s == 1) {
    for (int side = 0; side < 2; ++side) {
      int quiet = 0;
      for (int j = (side == 0 ? 0 : 1);; ++j) {
        double th = (side == 0 ? 1.0 : -1.0) * j * ht;
        if (std::abs(th) > k.theta_cap) break;
        double mag = take_row(&th, th * th);
        out.reach_theta = std::max(out.reach_theta, std::abs(th));
        if (mag < kRowCutoff * gmax) {
          if (++quiet >= kQuietRows) break;
        } else {
          quiet = 0;
        }
      }
    }
    out.sum = {gre.s * ht, gim.s * ht};
    out.mass = gmass.s * ht;
  } else {
    // square rings about the origin, scanned in a fixed order
    int quiet = 0;
    for (int r = 0;; ++r) {
      if (r * ht > k.theta_cap) break;
      double ringmax = 0.0;
      auto cell = [&](int i, int j) {
        double tv[2] = {i * ht, j * ht};
        ringmax = std::max(ringmax, take_row(tv, tv[0] * tv[0] + tv[1] * tv[1]));
      };
      if (r == 0) {
        cell(0, 0);
      } else {
        for (int i = -r; i <= r; ++i) {
          cell(i, r);
          cell(i, -r);
        }
        for (int j = -r + 1; j <= r - 1; ++j) {
          cell(r, j);
          cell(-r, j);
        }
      }
      out.reach_theta = r * ht;
      if (ringmax < kRowCutoff * gmax) {
        if (++quiet >= kQuietRings) break;
      } else {
        quiet = 0;
      }
    }
    out.sum = {gre.s * ht * ht, gim.s * ht * ht};
    out.mass = gmass.s * ht * ht;
  }
  return out;
}

// Affine bound of the gradient growth from first-order jets on a coarse
// mesh: base corners of the box, fiber directions at radius 1 and at a
// moderate radius. Points where the jet is undefined are skipped.
GradModel estimate_gradients(const Expression& phi, const Eigen::VectorXd& center,
                             double radius, double cap) {
  Dims dm = phi.dims();
  int d = dm.d, s = dm.s;
  double rm = std::clamp(cap, 8.0, 64.0);

  std::vector<Eigen::VectorXd> xs;
  xs.push_back(center);
  for (int i = 0; i < d; ++i) {
    for (double sg : {-1.0, 1.0}) {
      Eigen::VectorXd p = center;
      p(i) += sg * radius;
      xs.push_back(p);
    }
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(d, radius / std::sqrt((double)d));
  xs.push_back(center + diag);
  xs.push_back(center - diag);

  std::vector<Eigen::VectorXd> dirs;
  for (int j = 0; j < s; ++j) {
    for (double sg : {-1.0, 1.0}) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(s);
      e(j) = sg;
      dirs.push_back(e);
    }
  }
  if (s == 2) {
    dirs.push_back(Eigen::VectorXd::Constant(2, 1.0 / std::sqrt(2.0)));
    dirs.push_back(-Eigen::VectorXd::Constant(2, 1.0 / std::sqrt(2.0)));
  }

  double g1 = 0.0, gm = 0.0, gt = 0.0;
  for (const auto& x : xs) {
    for (const auto& e : dirs) {
      for (double rad : {1.0, rm}) {
        Eigen::VectorXd t = rad * e;
        Jet jet;
        try {
          jet = phi.eval_jet(x.data(), t.data(), 1);
        } catch (const DomainError&) {
          continue;
        } catch (const InvalidInput&) {
          continue;
        }
        double gx = 0.0, gth = 0.0;
        for (int i = 0; i < d; ++i) gx += jet.dx(i) * jet.dx(i);
        for (int j = 0; j < s; ++j) gth += jet.dt(j) * jet.dt(j);
        gx = std::sqrt(gx);
        gth = std::sqrt(gth);
        gt = std::max(gt, gth);
        if (rad == 1.0) g1 = std::max(g1, gx);
        else gm = std::max(gm, gx);
      }
    }
  }
  GradModel g;
  g.ax = 1.3 * g1 + 1.0;
  g.bx = 1.3 * std::max(0.0, (gm - g1) / (rm - 1.0));
  g.mt = 1.3 * gt + 1.0;
  return g;
}

void run_indexed(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, 8);
  if (threads == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errs(n);
  auto work = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(threads, n); ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

// Quadratic Lagrange extrapolation to eps = 0 through three ladder nodes.
std::complex<double> extrapolate3(const double* e, const std::complex<double>* v) {
  std::complex<double> acc{0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    double w = 1.0;
    for (int m = 0; m < 3; ++m) {
      if (m == i) continue;
      w *= (0.0 - e[m]) / (e[i] - e[m]);
    }
    acc += w * v[i];
  }
  return acc;
}

} // namespace

double TestFunction::value(const Eigen::VectorXd& x) const {
  if (x.size() != center.size()) throw InvalidInput(bad("test function argument size"));
  Eigen::VectorXd dxv = x - center;
  double q = dxv.dot(quad * dxv);
  return profile.eval(x.data(), nullptr) * std::exp(-q);
}

TestFunction make_test_function(Expression profile, Eigen::MatrixXd quad,
                                Eigen::VectorXd center) {
  Dims dm = profile.dims();
  if (dm.s != 0)
    throw InvalidInput(bad("test function profile must use base variables only"));
  int d = dm.d;
  if (quad.rows() != d || quad.cols() != d)
    throw InvalidInput(bad("test function envelope matrix size"));
  if (center.size() != d) throw InvalidInput(bad("test function center size"));
  double scale = std::max(1.0, quad.cwiseAbs().maxCoeff());
  if ((quad - quad.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidInput(bad("test function envelope must be symmetric"));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(quad);
  double lo = es.eigenvalues().minCoeff();
  if (!(lo > 0.0))
    throw InvalidInput(bad("test function envelope must be positive definite"));
  return {std::move(profile), std::move(quad), std::move(center), lo};
}

TestFunction gaussian_bump(const Eigen::VectorXd& center, double width) {
  if (!(width > 0.0)) throw InvalidInput(bad("bump width must be positive"));
  int d = (int)center.size();
  Dims dm{d, 0};
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(d, d) / (2.0 * width * width);
  return make_test_function(Expression::constant(1.0, dm), q, center);
}

OscIntResult oscint_eval(const PhaseFunction& phi, const Expression& a,
                         const TestFunction& u, std::vector<double> eps_ladder,
                         int threads) {
  Dims dm = phi.sym.symbol.dims();
  if (dm.d + dm.s > 3)
    throw InvalidInput(bad("dense quadrature supports d + s <= 3"));
  if (!(a.dims() == dm)) throw InvalidInput(bad("amplitude dimensions"));
  if (u.dim() != dm.d) throw InvalidInput(bad("test function dimensions"));
  if (eps_ladder.size() < 3)
    throw InvalidInput(bad("epsilon ladder needs at least three rungs"));
  for (double e : eps_ladder)
    if (!(e > 0.0)) throw InvalidInput(bad("epsilon ladder entries must be positive"));

  // warm the compiled caches and the gradient model on this thread
  phi.sym.symbol.compiled();
  a.compiled();
  u.profile.compiled();
  double eps_min = *std::min_element(eps_ladder.begin(), eps_ladder.end());
  double box = std::sqrt(kEnvelopeReach / u.quad_min) + u.center.norm();
  GradModel grad = estimate_gradients(phi.sym.symbol, u.center,
                                      std::min(box, 6.0 / std::sqrt(eps_min)),
                                      6.0 / std::sqrt(eps_min));

  int n = (int)eps_ladder.size();
  std::vector<KernelOut> outs(n);
  run_indexed(n, threads, [&](int i) {
    double eps = eps_ladder[i];
    KernelSpec k;
    k.dims = dm;
    k.phi = &phi.sym.symbol;
    k.amp = &a;
    k.profile = &u.profile;
    k.env_quad = u.quad;
    k.env_center = u.center;
    k.eps = eps;
    k.radius_x = std::min(std::sqrt(kEnvelopeReach / (u.quad_min + eps)) + u.center.norm(),
                          6.0 / std::sqrt(eps));
    k.theta_cap = 6.0 / std::sqrt(eps);
    k.grad = grad;
    outs[i] = march(k);
  });

  OscIntResult res;
  res.eps_ladder = eps_ladder;
  res.ladder.reserve(n);
  for (auto& o : outs) res.ladder.push_back(o.sum);
  int fin = (int)(std::min_element(eps_ladder.begin(), eps_ladder.end()) -
                  eps_ladder.begin());
  res.grid_points = outs[fin].points;
  res.truncation_x = std::sqrt(kEnvelopeReach / (u.quad_min + eps_ladder[fin])) +
                     u.center.norm();
  res.truncation_x = std::min(res.truncation_x, 6.0 / std::sqrt(eps_ladder[fin]));
  res.truncation_theta = outs[fin].reach_theta;
  res.step_x = outs[fin].min_step_x;
  res.step_theta = outs[fin].step_theta;

  // ladder differences must keep shrinking (up to roundoff) for the
  // regularization to count as convergent
  double vscale = std::abs(res.ladder.back());
  for (int i = 2; i < n; ++i) {
    double d1 = std::abs(res.ladder[i - 1] - res.ladder[i - 2]);
    double d2 = std::abs(res.ladder[i] - res.ladder[i - 1]);
    if (d2 > d1 * (1.0 + 1e-9) + 1e-13 * (vscale + 1.0))
      throw DomainError("regularization unstable");
  }

  std::vector<std::complex<double>> ex;
  for (int i = 2; i < n; ++i)
    ex.push_back(extrapolate3(&eps_ladder[i - 2], &res.ladder[i - 2]));
  res.value = ex.back();
  std::complex<double> prev = (ex.size() >= 2) ? ex[ex.size() - 2] : res.ladder.back();
  res.residual = std::abs(res.value - prev);
  return res;
}

WavefrontProbe wavefront_probe(const PhaseFunction& phi, const Expression& a,
                               const Eigen::VectorXd& x0, const Eigen::VectorXd& xi_dir,
                               std::vector<double> scale_ladder, int threads) {
  Dims dm = phi.sym.symbol.dims();
  if (dm.d < 1 || dm.d > 2) throw InvalidInput(bad("probe supports d in {1, 2}"));
  if (dm.d + dm.s > 3)
    throw InvalidInput(bad("dense quadrature supports d + s <= 3"));
  if (!(a.dims() == dm)) throw InvalidInput(bad("amplitude dimensions"));
  if (x0.size() != dm.d) throw InvalidInput(bad("probe location size"));
  if (xi_dir.size() != dm.d || !(xi_dir.norm() > 0.0))
    throw InvalidInput(bad("probe direction must be a nonzero d-vector"));
  if (scale_ladder.size() < 2)
    throw InvalidInput(bad("scale ladder needs at least two rungs"));
  for (size_t i = 0; i < scale_ladder.size(); ++i) {
    if (!(scale_ladder[i] > 0.0))
      throw InvalidInput(bad("scale ladder entries must be positive"));
    if (i > 0 && !(scale_ladder[i] > scale_ladder[i - 1]))
      throw InvalidInput(bad("scale ladder must be strictly increasing"));
  }

  phi.sym.symbol.compiled();
  a.compiled();
  double w2 = 2.0 * kProbeWindow * kProbeWindow;
  double lam_max = scale_ladder.back();
  double box0 = std::sqrt(kEnvelopeReach * w2 / scale_ladder.front());
  GradModel grad = estimate_gradients(phi.sym.symbol, x0, box0,
                                      lam_max + 20.0 * std::sqrt(lam_max) / kProbeWindow);

  WavefrontProbe pr;
  pr.x0 = x0;
  pr.xi = xi_dir.normalized();
  pr.lambdas = scale_ladder;
  int n = (int)scale_ladder.size();
  pr.values.resize(n);
  pr.mass.resize(n);

  run_indexed(n, threads, [&](int i) {
    double lam = scale_ladder[i];
    KernelSpec k;
    k.dims = dm;
    k.phi = &phi.sym.symbol;
    k.amp = &a;
    k.env_quad = (lam / w2) * Eigen::MatrixXd::Identity(dm.d, dm.d);
    k.env_center = x0;
    k.eps = kProbeEps;
    k.mod_lambda = lam;
    k.mod_dir = pr.xi;
    k.radius_x = std::sqrt(kEnvelopeReach * w2 / lam);
    k.theta_cap = lam + 20.0 * std::sqrt(lam) / kProbeWindow + 200.0;
    k.grad = grad;
    KernelOut o = march(k);
    pr.values[i] = o.sum;
    pr.mass[i] = o.mass;
  });

  // least squares on the rungs that kept a representable magnitude
  double sl = 0.0, sy = 0.0, sll = 0.0, sly = 0.0;
  int m = 0;
  double ratio = 0.0;
  for (int i = 0; i < n; ++i) {
    double mag = std::abs(pr.values[i]);
    ratio = std::max(ratio, mag / std::max(pr.mass[i], 1e-300));
    if (mag <= 0.0) continue;
    double l = std::log(scale_ladder[i]);
    double y = std::log(mag);
    sl += l;
    sy += y;
    sll += l * l;
    sly += l * y;
    ++m;
  }
  if (m >= 2 && sll * m - sl * sl > 0.0) {
    pr.slope = (m * sly - sl * sy) / (m * sll - sl * sl);
  } else {
    pr.slope = kUnderflowSlope;
  }
  pr.flagged = pr.slope > kSlopeThreshold && ratio >= kMassFloor;
  pr.verdict = pr.flagged ? "possible wave-front direction" : "regular direction";
  return pr;
}

std::string probe_csv(const std::vector<WavefrontProbe>& probes) {
  if (probes.empty()) return "";
  std::ostringstream os;
  int d = (int)probes.front().x0.size();
  for (int i = 0; i < d; ++i) os << "x0_" << (i + 1) << ",";
  for (int i = 0; i < d; ++i) os << "xi_" << (i + 1) << ",";
  os << "slope,verdict\n";
  os.precision(12);
  for (const auto& p : probes) {
    for (int i = 0; i < d; ++i) os << p.x0(i) << ",";
    for (int i = 0; i < d; ++i) os << p.xi(i) << ",";
    os << p.slope << "," << p.verdict << "\n";
  }
  return os.str();
}

} // namespace sgcalc
