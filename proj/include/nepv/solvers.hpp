#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nepv/conditioning.hpp"
#include "nepv/core_model.hpp"

namespace nepv
{

struct SolveOptions
{
  int max_iter = 50;
  double tol_backward = 1e-13;  // stop when eta <= tol_backward
  double tol_step = 1e-15;      // relative step below which Newton is stagnating
  double damping = 1.0;         // in (0, 1]
  double singular_floor = 1e-15;  // sigma_min(J_F) <= floor (1 + ||J||) is SingularJacobian

  void validate() const;
};

struct IterationRecord
{
  int iteration = 0;
  double lambda = 0.0;
  double eta = 0.0;
  double step_norm = 0.0;  // norm of the update that produced this iterate (0 for the start)
};

struct SolveResult
{
  Eigenpair pair;
  double eta = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> log;
};

/// Newton's method on F(lambda, v) = [A(v)v - lambda v; 1 - v^T v / 2] with
/// the bordered Jacobian. Iterates live in the gauge v^T v = 2; the returned
/// eigenvector is unit norm and sign-aligned with v0.
/// Throws MaxIterExceeded or SingularJacobian.
SolveResult newton_solve(const SpmfProblem &problem, double lambda0, const Vector &v0,
                         const SolveOptions &opts = {});

/// Newton start with lambda0 taken as the Rayleigh quotient of v0.
SolveResult newton_solve(const SpmfProblem &problem, const Vector &v0, const SolveOptions &opts = {});

struct Selector
{
  enum class Kind
  {
    Smallest,
    Largest,
    NearestTo,
    Nth  // k-th smallest, 0-based
  };
  Kind kind = Kind::Smallest;
  double target = 0.0;
  int position = 0;

  static Selector smallest() { return {Kind::Smallest, 0.0, 0}; }
  static Selector largest() { return {Kind::Largest, 0.0, 0}; }
  static Selector nearest_to(double target) { return {Kind::NearestTo, target, 0}; }
  static Selector nth(int k) { return {Kind::Nth, 0.0, k}; }
};

/// Self-consistent field iteration v_{k+1} = selected eigenvector of A(v_k).
/// Converged when the Rayleigh-quotient backward error is <= tol_backward.
/// Throws MaxIterExceeded; SCF is not retried internally.
SolveResult scf_solve(const SpmfProblem &problem, const Vector &v0, Selector selector,
                      const SolveOptions &opts = {});

/// Eigenpair of the perturbed problem A(v) + eps sum_i f_i(v) E_i, found by
/// Newton warm-started at `warm`. eps = 0 returns `warm` unchanged.
SolveResult solve_perturbed(const SpmfProblem &problem, const PerturbationDirection &direction,
                            double epsilon, const Eigenpair &warm, const SolveOptions &opts = {});

// ---------------------------------------------------------------------------
// Parameter continuation

using ProblemFamily = std::function<SpmfProblem(double)>;

struct BranchPoint
{
  double delta = 0.0;
  double lambda = 0.0;
  Vector v;        // unit norm
  double kappa = 0.0;  // relative kappa(lambda); +inf when non-simple or lambda = 0
  bool simple = true;
  bool on_grid = true;  // false for refinement points near turning points
};

struct Branch
{
  std::vector<BranchPoint> points;  // sorted by increasing delta
};

struct TurningPoint
{
  double delta = 0.0;
  double lambda = 0.0;
  int branch_a = -1;  // the two branches that meet here
  int branch_b = -1;
};

struct ZeroCrossing
{
  double delta = 0.0;
  int branch = -1;
};

struct BranchData
{
  std::vector<double> deltas;
  std::vector<Branch> branches;
  std::vector<TurningPoint> turning_points;
  std::vector<ZeroCrossing> zero_crossings;
};

struct ContinuationOptions
{
  SolveOptions newton{};
  double tol_simple = 1e-8;
  double step_initial = 1e-2;  // pseudo-arclength step in (v, lambda, delta)
  double step_min = 1e-7;
  double step_max = 5e-2;
  int max_steps = 20000;
  int fold_refinement_points = 24;  // per side of each turning point
  double delta_derivative_step = 1e-4;
};

/// Follows every solution curve through the seeds (eigenpairs at the first
/// grid value) by pseudo-arclength continuation in (v, lambda, delta), so the
/// curves are tracked through turning points. Each curve is split at its
/// turning points into branches that are monotone in delta; branches are
/// sampled at the grid values by warm-started Newton and refined with extra
/// points approaching each turning point. Branch indices are ordered by
/// lambda at the leftmost delta of each branch.
///
/// Segments where the tracker fails are left as gaps; nothing is fatal.
BranchData continuation(const ProblemFamily &family, std::span<const double> delta_grid,
                        std::span<const Eigenpair> seeds, const ContinuationOptions &opts = {});

}  // namespace nepv
