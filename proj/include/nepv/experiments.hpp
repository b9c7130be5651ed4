#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "nepv/conditioning.hpp"
#include "nepv/core_model.hpp"
#include "nepv/solvers.hpp"

namespace nepv
{

/// Quadratic NEPv A(v) = A_0 + sum_{k=1}^{n-1} f_k(v) A_k with
/// f_k(v) = v^T B_k v / v^T v, built so that (n, e_1) is an eigenpair and
/// J(e_1) is the n x n Wilkinson matrix. Entries of B_k outside its first
/// row and column are zero. Weights are the spectral norms of the A_i.
SpmfProblem build_wilkinson(int n);

/// Upper bidiagonal matrix with diagonal n, ..., 1 and superdiagonal n.
Matrix wilkinson_matrix(int n);

struct WilkinsonRow
{
  int n = 0;
  double kappa = 0.0;
  double u_dot_v = 0.0;
  double alpha = 0.0;  // sum_i |f_i(v)| w_i ||v|| ||u||, unit u and v
};

/// kappa(lambda), |u^T v| and alpha for the eigenpair (n, e_1). Throws
/// InvalidProblem if J(e_1) differs from the Wilkinson matrix.
std::vector<WilkinsonRow> wilkinson_report(std::span<const int> ns);

/// A(v) = A_0(delta) + (v^T B v / v^T v) A_1 with the 3 x 3 saddle-node
/// example; delta shifts the (1,1) entry of A_0.
SpmfProblem build_bifurcation(double delta);

/// Eigenpairs at `delta` found by SCF from every eigenvector of A(1/sqrt(n)),
/// polished by Newton and deduplicated by eigenvalue and direction.
std::vector<Eigenpair> scf_seeds(const SpmfProblem &problem, const SolveOptions &opts = {});

struct SweepOptions
{
  double delta_min = -5.0;
  double delta_max = 0.0;
  int steps = 500;
  ContinuationOptions continuation{};
};

BranchData bifurcation_sweep(const SweepOptions &opts = {});

/// Header `delta,lambda,kappa,branch,simple`, one row per branch point in
/// branch order, doubles in shortest round-trip form and `inf` for
/// non-finite kappa.
void write_branch_csv(std::ostream &os, const BranchData &data);

void write_wilkinson_csv(std::ostream &os, std::span<const WilkinsonRow> rows);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

/// Least-squares slope of log|lambda - lambda*| against log|delta - delta*|
/// over the points of `branch` within the last decade of approach to the
/// turning point. Returns NaN when fewer than three points qualify.
double fold_exponent(const Branch &branch, const TurningPoint &turn);

struct MonteCarloReport
{
  int samples = 0;
  double max_ratio = 0.0;        // largest |lambda'| / |lambda| over sampled directions
  double predicted_kappa = 0.0;
  double attained_ratio = 0.0;   // from the optimal direction
  std::uint64_t seed = 0;
  // Largest relative gap between the first-order prediction and a Newton
  // resolve of the perturbed problem, over the resolved subsample.
  double resolve_discrepancy = 0.0;
  int resolved = 0;
};

/// Samples random feasible directions and compares the first-order
/// eigenvalue change against the predicted condition number. Sample k draws
/// from its own generator seeded by splitmix64(seed + k), so the result does
/// not depend on how samples are scheduled. `resolve_every` > 0 also solves
/// the perturbed problem at epsilon for every that-many-th sample.
MonteCarloReport monte_carlo_condition_check(const SpmfProblem &problem, const Eigenpair &pair,
                                             const Vector &weights, bool symmetric, NormKind norm,
                                             int samples, double epsilon, std::uint64_t seed,
                                             int resolve_every = 0);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace nepv
