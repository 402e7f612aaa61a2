#pragma once

#include "sgcalc/phase_functions.hpp"

#include <optional>
#include <string>

namespace sgcalc {

// Solution of a face stationary system grad_t phi^face = 0, in face
// coordinates: unit x for the faces where x is projective, unit t where t
// is; the other block is free.
struct StationaryPoint {
  Face face = Face::Interior;
  Eigen::VectorXd x, t;
  double residual = 0.0;
  double sigma_min = 0.0, sigma_max = 0.0;  // of the face Jacobian
  bool nondegenerate = false;
};

struct StationarySet {
  Face face = Face::Interior;
  std::vector<StationaryPoint> points;  // deduped, sorted by embedding
};

struct SolveOptions {
  double newton_tol = 1e-10;
  // Solutions (and seeds) whose free block exceeds this radius are
  // discarded; lets callers restrict to a bounded window of the face.
  double free_radius_cap = std::numeric_limits<double>::infinity();
};

// Damped least-squares sweep over a deterministic seed grid (64 directions
// on each constrained sphere, radii {0, 0.25, 0.5, 1, 2, 4} on the free
// block). Moving-frame charts keep sphere blocks exactly unit. Converged
// points are deduped at 1e-4 chordal distance in the compactified face
// embedding.
StationarySet stationary_solve(const PhaseFunction& p, Face face, SolveOptions opt = {});

// One damped run from a single seed; empty when 50 steps cannot reach the
// tolerance.
std::optional<StationaryPoint> stationary_refine(const PhaseFunction& p, Face face,
                                                 Eigen::VectorXd x0, Eigen::VectorXd t0,
                                                 double newton_tol = 1e-10);

// A stationary point pushed to the Lagrangian cloud.
struct LambdaPoint {
  Face face = Face::Interior;
  Eigen::VectorXd x;      // base coordinates (unit block on projective faces)
  Eigen::VectorXd xi;     // e face: full x-gradient; psi and corner: its direction
  Eigen::VectorXd embed;  // 2d-vector: ball chart in the unbounded slot
  double phase_value = 0.0;  // gauge-weighted face phase value at the point
};

LambdaPoint lambda_extend(const PhaseFunction& p, const StationaryPoint& q);

// Phase given directly by its face components (derived fields, glued
// representatives) instead of a symbol expression. All three components are
// required and must share the same dims.
struct FacePhase {
  std::shared_ptr<const ScalarField> e, psi, psie;
};

StationarySet stationary_solve(const FacePhase& p, Face face, SolveOptions opt = {});
LambdaPoint lambda_extend(const FacePhase& p, const StationaryPoint& q);

// Tangent data at a nondegenerate stationary point: a kernel basis of the
// face Jacobian in chart coordinates, and its pushforward to (dx, dxi)
// cloud coordinates (projected to the sphere tangent where the cloud slot
// is a direction).
struct TangentFrame {
  Eigen::MatrixXd chart;  // (face chart dim) x k, k = chart dim - s
  Eigen::MatrixXd cloud;  // 2d x k
};

TangentFrame tangent_frame(const PhaseFunction& p, const StationaryPoint& q);

// Corner-to-face continuation: re-solves the e system seeded at the corner
// with the t block pushed to radius 1e4 (and the psi system with x pushed
// out), then compares cloud embeddings against the corner's.
struct CornerContinuation {
  bool e_matched = false, psi_matched = false;
  double gap_e = 0.0, gap_psi = 0.0;
};

CornerContinuation corner_continuation(const PhaseFunction& p, const StationaryPoint& corner,
                                       double newton_tol = 1e-10);

// Full stationary geometry audit: all three face systems, rank checks,
// frame ranks, and corner continuation for every corner point.
struct NeatnessReport {
  bool neat = false;
  StationarySet e, psi, corner;
  int degenerate_points = 0;
  bool frames_ok = true;
  int unmatched_corners = 0;
  double max_corner_gap = 0.0;
};

NeatnessReport neatness_report(const PhaseFunction& p, SolveOptions opt = {});

// One row per stationary point: face, base coordinates, fiber coordinates,
// residual, smallest Jacobian singular value.
std::string stationary_csv(const PhaseFunction& p, const NeatnessReport& rep);

} // namespace sgcalc
