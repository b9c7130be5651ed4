#include "nepv/backward_error.hpp"

#include <algorithm>
#include <cmath>

#include "nepv/error.hpp"
#include "nepv/spectral.hpp"

namespace nepv
{

namespace
{

constexpr double kDegenerate = 1e-300;

struct ResidualData
{
  Vector r;
  Vector f;
  double denominator = 0.0;  // sum_i |f_i(v)| w_i ||v||
};

ResidualData residual_data(const SpmfProblem &problem, double lambda, const Vector &v,
                           const Vector &weights)
{
  require_nonzero(v);
  if (weights.size() != problem.m() || !weights.allFinite() || weights.minCoeff() < 0.0)
  {
    throw Error(ErrorKind::InvalidInput, "need one nonnegative weight per term");
  }
  ResidualData d;
  d.f = evaluate_coefficients(problem, v);
  d.denominator = d.f.cwiseAbs().dot(weights) * v.norm();
  if (d.denominator <= kDegenerate)
  {
    throw Error(ErrorKind::DegenerateWeights,
                "no admissible perturbation can explain the residual");
  }
  d.r = residual(problem, lambda, v);
  return d;
}

// gamma = sqrt(1 + sin^2(vartheta)), vartheta = arccos(r^T v / (|r| |v|)).
double gamma_factor(const Vector &r, const Vector &v, double *vartheta = nullptr)
{
  const double rn = r.norm();
  if (rn == 0.0)
  {
    if (vartheta)
    {
      *vartheta = 0.0;
    }
    return 1.0;
  }
  const double t = std::acos(std::clamp(r.dot(v) / (rn * v.norm()), -1.0, 1.0));
  if (vartheta)
  {
    *vartheta = t;
  }
  const double s = std::sin(t);
  return std::sqrt(1.0 + s * s);
}

AttainingBackward attaining(const ResidualData &d, const Vector &v, const Vector &weights,
                            bool symmetric, NormKind norm)
{
  const auto n = v.size();
  const auto m = d.f.size();
  const double rn = d.r.norm();
  if (rn == 0.0)
  {
    return {0.0, PerturbationDirection::zero(static_cast<int>(n), static_cast<int>(m), symmetric,
                                             norm)};
  }
  const double vn = v.norm();
  const double eta = rn / d.denominator;

  Matrix H;
  double epsilon = eta;
  double outer = -1.0;
  if (!symmetric)
  {
    H = d.r * v.transpose() / (rn * vn);
  }
  else if (norm == NormKind::Spectral)
  {
    H = householder_between(v / vn, d.r / rn);
  }
  else
  {
    const double gamma = gamma_factor(d.r, v);
    const Matrix G = (d.r.dot(v) / (vn * vn)) * v * v.transpose() - v * d.r.transpose() -
                     d.r * v.transpose();
    H = G / (gamma * rn * vn);
    epsilon = gamma * eta;
    outer = 1.0;
  }
  std::vector<Matrix> E;
  E.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i)
  {
    E.push_back(outer * sign_of(d.f(i)) * weights(i) * H);
  }
  return {epsilon, PerturbationDirection{std::move(E), symmetric, norm}};
}

}  // namespace

const char *to_string(BackwardQuantity q)
{
  switch (q)
  {
    case BackwardQuantity::Eta:
      return "eta";
    case BackwardQuantity::EtaSym2:
      return "eta_sym_2";
    case BackwardQuantity::EtaSymF:
      return "eta_sym_F";
  }
  return "?";
}

double backward_error(const SpmfProblem &problem, double lambda, const Vector &v,
                      const Vector &weights)
{
  const ResidualData d = residual_data(problem, lambda, v, weights);
  return d.r.norm() / d.denominator;
}

double backward_error_symmetric(const SpmfProblem &problem, double lambda, const Vector &v,
                                const Vector &weights, NormKind norm)
{
  const ResidualData d = residual_data(problem, lambda, v, weights);
  const double eta = d.r.norm() / d.denominator;
  return norm == NormKind::Spectral ? eta : eta * gamma_factor(d.r, v);
}

double rayleigh_quotient(const SpmfProblem &problem, const Vector &v)
{
  require_nonzero(v);
  return v.dot(assemble_matrix(problem, v) * v) / v.squaredNorm();
}

EigenvectorBackwardError eigenvector_backward_error(const SpmfProblem &problem, const Vector &v,
                                                    const Vector &weights)
{
  EigenvectorBackwardError out;
  out.lambda_star = rayleigh_quotient(problem, v);
  out.eta = backward_error(problem, out.lambda_star, v, weights);
  return out;
}

AttainingBackward attaining_backward_perturbation(const SpmfProblem &problem, double lambda,
                                                  const Vector &v, const Vector &weights,
                                                  bool symmetric, NormKind norm)
{
  return attaining(residual_data(problem, lambda, v, weights), v, weights, symmetric, norm);
}

BackwardErrorReport backward_error_report(const SpmfProblem &problem, double lambda,
                                          const Vector &v, const Vector &weights)
{
  const ResidualData d = residual_data(problem, lambda, v, weights);
  BackwardErrorReport rep;
  rep.eta = d.r.norm() / d.denominator;
  rep.eta_sym_2 = rep.eta;
  rep.gamma = gamma_factor(d.r, v, &rep.vartheta);
  rep.eta_sym_F = rep.eta * rep.gamma;
  rep.attaining.emplace(BackwardQuantity::Eta, attaining(d, v, weights, false, NormKind::Spectral));
  rep.attaining.emplace(BackwardQuantity::EtaSym2, attaining(d, v, weights, true, NormKind::Spectral));
  rep.attaining.emplace(BackwardQuantity::EtaSymF,
                        attaining(d, v, weights, true, NormKind::Frobenius));
  return rep;
}

}  // namespace nepv
