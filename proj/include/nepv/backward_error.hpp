#pragma once

#include <map>

#include "nepv/conditioning.hpp"
#include "nepv/core_model.hpp"

namespace nepv
{

enum class BackwardQuantity
{
  Eta,
  EtaSym2,
  EtaSymF
};

const char *to_string(BackwardQuantity q);

struct AttainingBackward
{
  double epsilon = 0.0;
  PerturbationDirection direction;
};

struct BackwardErrorReport
{
  double eta = 0.0;
  double eta_sym_2 = 0.0;
  double eta_sym_F = 0.0;
  double vartheta = 0.0;  // angle between r and v
  double gamma = 1.0;
  std::map<BackwardQuantity, AttainingBackward> attaining;
};

/// eta = ||r|| / (sum_i |f_i(v)| w_i ||v||) with r = A(v)v - lambda v.
/// DegenerateWeights if the denominator vanishes.
double backward_error(const SpmfProblem &problem, double lambda, const Vector &v,
                      const Vector &weights);

/// Spectral: eta. Frobenius: gamma * eta, gamma = sqrt(1 + sin^2 vartheta),
/// with gamma = 1 when r = 0.
double backward_error_symmetric(const SpmfProblem &problem, double lambda, const Vector &v,
                                const Vector &weights, NormKind norm);

double rayleigh_quotient(const SpmfProblem &problem, const Vector &v);

struct EigenvectorBackwardError
{
  double eta = 0.0;
  double lambda_star = 0.0;
};

/// min over lambda of eta(lambda, v), attained at the Rayleigh quotient.
EigenvectorBackwardError eigenvector_backward_error(const SpmfProblem &problem, const Vector &v,
                                                    const Vector &weights);

/// Smallest epsilon and direction E with (A(v) + eps sum_i f_i(v) E_i) v = lambda v.
/// For r = 0 the result is epsilon = 0 with zero blocks.
AttainingBackward attaining_backward_perturbation(const SpmfProblem &problem, double lambda,
                                                  const Vector &v, const Vector &weights,
                                                  bool symmetric, NormKind norm);

BackwardErrorReport backward_error_report(const SpmfProblem &problem, double lambda,
                                          const Vector &v, const Vector &weights);

}  // namespace nepv
