#pragma once

#include <map>
#include <optional>
#include <random>
#include <vector>

#include "nepv/core_model.hpp"

namespace nepv
{

enum class ConditionMode
{
  Relative,  // divide by |lambda|
  Absolute
};

/// Direction (E_1, ..., E_m) of a perturbation A_i -> A_i + eps E_i.
struct PerturbationDirection
{
  std::vector<Matrix> E;
  bool symmetric = false;
  NormKind norm = NormKind::Spectral;

  /// Checks ||E_i|| <= w_i (1e-12 relative slack) and, for the symmetric
  /// class, E_i = E_i^T to 1e-13. Throws InvalidDirection.
  static PerturbationDirection make(std::vector<Matrix> E, bool symmetric, NormKind norm,
                                    const Vector &weights);

  static PerturbationDirection zero(int n, int m, bool symmetric = false,
                                    NormKind norm = NormKind::Spectral);
};

enum class ConditionQuantity
{
  Lambda,
  LambdaSym2,
  LambdaSymF,
  Vector,
  VectorSym2,
  VectorSymF
};

const char *to_string(ConditionQuantity q);

struct ConditionReport
{
  double kappa_lambda = 0.0;
  double kappa_lambda_sym_2 = 0.0;
  double kappa_lambda_sym_F = 0.0;
  double kappa_v = 0.0;
  double kappa_v_sym_2 = 0.0;
  double kappa_v_sym_F = 0.0;
  double theta = 0.0;  // angle between u and v
  double beta = 1.0;
  double u_dot_v = 0.0;  // |u^T v|, unit vectors
  std::map<ConditionQuantity, PerturbationDirection> attaining;
};

/// kappa(lambda) = (sum_i |f_i(v)| w_i) ||u|| ||v|| / (|lambda| |u^T v|), where u
/// is the left eigenvector of J(v). Absolute mode drops the 1/|lambda|.
///
/// Simplicity is required in the sense that lambda is an isolated eigenvalue
/// of J(v) with eigenvector v and u^T v != 0 (NonSimple otherwise).
double eigenvalue_condition(const SpmfProblem &problem, double lambda, const Vector &v,
                            const Vector &weights, ConditionMode mode = ConditionMode::Relative);

/// Spectral norm: equal to eigenvalue_condition. Frobenius: beta * kappa with
/// beta = sqrt((1 + cos^2 theta) / 2).
double eigenvalue_condition_symmetric(const SpmfProblem &problem, double lambda, const Vector &v,
                                      const Vector &weights, NormKind norm,
                                      ConditionMode mode = ConditionMode::Relative);

/// lambda' = sum_i f_i(v) u^T E_i v / (u^T v).
double eigenvalue_sensitivity(const SpmfProblem &problem, double lambda, const Vector &v,
                              const PerturbationDirection &direction);

PerturbationDirection optimal_eigenvalue_perturbation(const SpmfProblem &problem, double lambda,
                                                      const Vector &v, const Vector &weights,
                                                      bool symmetric, NormKind norm);

/// v' = -V (V^T (J - lambda I) V)^{-1} V^T sum_i f_i(v) E_i v for the v passed
/// in (the result scales with v; v^T v' = 0).
Vector eigenvector_sensitivity(const SpmfProblem &problem, double lambda, const Vector &v,
                               const PerturbationDirection &direction);

/// kappa(v) = ||Z||_2 sum_i |f_i(v)| w_i with Z = V (V^T (J - lambda I) V)^{-1} V^T.
double eigenvector_condition(const SpmfProblem &problem, double lambda, const Vector &v,
                             const Vector &weights);

/// Spectral: kappa(v). Frobenius: kappa(v) / sqrt(2).
double eigenvector_condition_symmetric(const SpmfProblem &problem, double lambda, const Vector &v,
                                       const Vector &weights, NormKind norm);

PerturbationDirection optimal_eigenvector_perturbation(const SpmfProblem &problem, double lambda,
                                                       const Vector &v, const Vector &weights,
                                                       bool symmetric, NormKind norm);

/// Inverse spectral gap form of kappa(v), valid when J(v) is symmetric (to
/// 1e-10 relative). Returns nullopt when J(v) is not symmetric.
std::optional<double> spectral_gap_condition(const SpmfProblem &problem, double lambda,
                                             const Vector &v, const Vector &weights);

/// All six condition numbers with their attaining directions. In relative
/// mode a zero eigenvalue raises ZeroEigenvalue.
ConditionReport condition_report(const SpmfProblem &problem, double lambda, const Vector &v,
                                 const Vector &weights, ConditionMode mode = ConditionMode::Relative);

/// Gaussian matrices projected onto the class and rescaled to ||E_i|| = w_i.
PerturbationDirection random_feasible_direction(int n, const Vector &weights, bool symmetric,
                                                NormKind norm, std::mt19937_64 &rng);

}  // namespace nepv
