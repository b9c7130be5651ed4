#include "nepv/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nepv/error.hpp"
#include "nepv/spectral.hpp"

namespace nepv
{

namespace
{

constexpr double kZeroEigenvalue = 1e-300;

struct PairData
{
  Vector v;  // unit
  Vector u;  // unit left eigenvector of J(v)
  Matrix J;
  Vector f;
  double uv = 0.0;         // u^T v, signed
  double weighted = 0.0;   // sum_i |f_i(v)| w_i
};

void check_weights(const SpmfProblem &problem, const Vector &weights)
{
  if (weights.size() != problem.m() || !weights.allFinite() || weights.minCoeff() < 0.0)
  {
    throw Error(ErrorKind::InvalidInput, "need one nonnegative weight per term");
  }
}

PairData analyze(const SpmfProblem &problem, double lambda, const Vector &v)
{
  require_nonzero(v);
  PairData d;
  d.v = v.normalized();
  d.J = assemble_jacobian(problem, d.v);
  const double Jnorm = spectral_norm(d.J);
  if ((d.J * d.v - lambda * d.v).norm() > kDefaultEigenvalueTolerance * (Jnorm + std::abs(lambda)))
  {
    throw Error(ErrorKind::NotAnEigenpair, "v is not an eigenvector of J(v) for lambda");
  }
  try
  {
    d.u = left_eigenvector(d.J, lambda);
  }
  catch (const Error &e)
  {
    throw Error(ErrorKind::NonSimple, e.what());
  }
  d.uv = d.u.dot(d.v);
  if (d.uv == 0.0)
  {
    throw Error(ErrorKind::NonSimple, "left and right eigenvectors are orthogonal");
  }
  d.f = evaluate_coefficients(problem, d.v);
  return d;
}

PairData analyze(const SpmfProblem &problem, double lambda, const Vector &v, const Vector &weights)
{
  check_weights(problem, weights);
  PairData d = analyze(problem, lambda, v);
  d.weighted = d.f.cwiseAbs().dot(weights);
  return d;
}

double relative_factor(double lambda, ConditionMode mode)
{
  if (mode == ConditionMode::Absolute)
  {
    return 1.0;
  }
  if (std::abs(lambda) <= kZeroEigenvalue)
  {
    throw Error(ErrorKind::ZeroEigenvalue, "relative condition number undefined for lambda = 0");
  }
  return 1.0 / std::abs(lambda);
}

double beta_factor(double cos_theta) { return std::sqrt((1.0 + cos_theta * cos_theta) / 2.0); }

double angle(const Vector &a, const Vector &b)
{
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// Z = V (V^T (J - lambda I) V)^{-1} V^T for the unit eigenvector v.
Matrix resolvent_on_complement(const Matrix &J, double lambda, const Vector &v)
{
  const auto n = J.rows();
  const Matrix V = orthogonal_complement_basis(v);
  const Matrix C = V.transpose() * (J - lambda * Matrix::Identity(n, n)) * V;
  Eigen::FullPivLU<Matrix> lu(C);
  if (!lu.isInvertible())
  {
    throw Error(ErrorKind::NonSimple, "projected Jacobian is singular");
  }
  return V * lu.inverse() * V.transpose();
}

struct TopSingular
{
  double sigma;
  Vector p;  // right singular vector
};

TopSingular top_singular(const Matrix &Z)
{
  Eigen::JacobiSVD<Matrix> svd(Z, Eigen::ComputeFullV);
  return {svd.singularValues()(0), svd.matrixV().col(0)};
}

std::vector<Matrix> scaled_blocks(const Matrix &H, const PairData &d, const Vector &weights)
{
  std::vector<Matrix> E;
  E.reserve(static_cast<std::size_t>(d.f.size()));
  for (Eigen::Index i = 0; i < d.f.size(); ++i)
  {
    E.push_back(sign_of(d.f(i)) * weights(i) * H);
  }
  return E;
}

Vector perturbation_action(const SpmfProblem &problem, const Vector &v,
                           const PerturbationDirection &direction)
{
  if (static_cast<int>(direction.E.size()) != problem.m())
  {
    throw Error(ErrorKind::InvalidDirection, "need one block per term");
  }
  const Vector f = evaluate_coefficients(problem, v);
  Vector g = Vector::Zero(problem.n());
  for (int i = 0; i < problem.m(); ++i)
  {
    g += f(i) * (direction.E[static_cast<std::size_t>(i)] * v);
  }
  return g;
}

}  // namespace

const char *to_string(ConditionQuantity q)
{
  switch (q)
  {
    case ConditionQuantity::Lambda:
      return "kappa_lambda";
    case ConditionQuantity::LambdaSym2:
      return "kappa_lambda_sym_2";
    case ConditionQuantity::LambdaSymF:
      return "kappa_lambda_sym_F";
    case ConditionQuantity::Vector:
      return "kappa_v";
    case ConditionQuantity::VectorSym2:
      return "kappa_v_sym_2";
    case ConditionQuantity::VectorSymF:
      return "kappa_v_sym_F";
  }
  return "?";
}

PerturbationDirection PerturbationDirection::make(std::vector<Matrix> E, bool symmetric,
                                                  NormKind norm, const Vector &weights)
{
  if (static_cast<Eigen::Index>(E.size()) != weights.size())
  {
    throw Error(ErrorKind::InvalidDirection, "need one block per weight");
  }
  for (std::size_t i = 0; i < E.size(); ++i)
  {
    const double w = weights(static_cast<Eigen::Index>(i));
    if (matrix_norm(E[i], norm) > w * (1.0 + 1e-12) + 1e-300)
    {
      throw Error(ErrorKind::InvalidDirection, "block exceeds its weight");
    }
    if (symmetric && (E[i] - E[i].transpose()).norm() > 1e-13 * std::max(1.0, E[i].norm()))
    {
      throw Error(ErrorKind::InvalidDirection, "block is not symmetric");
    }
  }
  return PerturbationDirection{std::move(E), symmetric, norm};
}

PerturbationDirection PerturbationDirection::zero(int n, int m, bool symmetric, NormKind norm)
{
  return PerturbationDirection{std::vector<Matrix>(static_cast<std::size_t>(m), Matrix::Zero(n, n)),
                               symmetric, norm};
}

double eigenvalue_condition(const SpmfProblem &problem, double lambda, const Vector &v,
                            const Vector &weights, ConditionMode mode)
{
  const PairData d = analyze(problem, lambda, v, weights);
  return d.weighted * relative_factor(lambda, mode) / std::abs(d.uv);
}

double eigenvalue_condition_symmetric(const SpmfProblem &problem, double lambda, const Vector &v,
                                      const Vector &weights, NormKind norm, ConditionMode mode)
{
  const PairData d = analyze(problem, lambda, v, weights);
  const double kappa = d.weighted * relative_factor(lambda, mode) / std::abs(d.uv);
  if (norm == NormKind::Spectral)
  {
    return kappa;
  }
  return beta_factor(std::cos(angle(d.u, d.v))) * kappa;
}

double eigenvalue_sensitivity(const SpmfProblem &problem, double lambda, const Vector &v,
                              const PerturbationDirection &direction)
{
  const PairData d = analyze(problem, lambda, v);
  return d.u.dot(perturbation_action(problem, v, direction)) / d.u.dot(v);
}

PerturbationDirection optimal_eigenvalue_perturbation(const SpmfProblem &problem, double lambda,
                                                      const Vector &v, const Vector &weights,
                                                      bool symmetric, NormKind norm)
{
  const PairData d = analyze(problem, lambda, v, weights);
  Matrix H;
  if (!symmetric)
  {
    H = d.u * d.v.transpose();
  }
  else if (norm == NormKind::Spectral)
  {
    H = householder_between(d.v, d.u);
  }
  else
  {
    const double beta = beta_factor(std::cos(angle(d.u, d.v)));
    H = (d.u * d.v.transpose() + d.v * d.u.transpose()) / (2.0 * beta);
  }
  return PerturbationDirection{scaled_blocks(H, d, weights), symmetric, norm};
}

Vector eigenvector_sensitivity(const SpmfProblem &problem, double lambda, const Vector &v,
                               const PerturbationDirection &direction)
{
  const PairData d = analyze(problem, lambda, v);
  const auto n = d.J.rows();
  const Matrix V = orthogonal_complement_basis(v);
  const Matrix C = V.transpose() * (d.J - lambda * Matrix::Identity(n, n)) * V;
  Eigen::FullPivLU<Matrix> lu(C);
  if (!lu.isInvertible())
  {
    throw Error(ErrorKind::NonSimple, "projected Jacobian is singular");
  }
  const Vector g = perturbation_action(problem, v, direction);
  return -V * lu.solve(V.transpose() * g);
}

double eigenvector_condition(const SpmfProblem &problem, double lambda, const Vector &v,
                             const Vector &weights)
{
  const PairData d = analyze(problem, lambda, v, weights);
  return top_singular(resolvent_on_complement(d.J, lambda, d.v)).sigma * d.weighted;
}

double eigenvector_condition_symmetric(const SpmfProblem &problem, double lambda, const Vector &v,
                                       const Vector &weights, NormKind norm)
{
  const double kappa = eigenvector_condition(problem, lambda, v, weights);
  return norm == NormKind::Spectral ? kappa : kappa / std::sqrt(2.0);
}

PerturbationDirection optimal_eigenvector_perturbation(const SpmfProblem &problem, double lambda,
                                                       const Vector &v, const Vector &weights,
                                                       bool symmetric, NormKind norm)
{
  const PairData d = analyze(problem, lambda, v, weights);
  const Vector p = top_singular(resolvent_on_complement(d.J, lambda, d.v)).p;
  Matrix H;
  if (!symmetric)
  {
    H = p * d.v.transpose();
  }
  else if (norm == NormKind::Spectral)
  {
    H = householder_between(d.v, p);
  }
  else
  {
    H = (p * d.v.transpose() + d.v * p.transpose()) / std::sqrt(2.0);
  }
  return PerturbationDirection{scaled_blocks(H, d, weights), symmetric, norm};
}

std::optional<double> spectral_gap_condition(const SpmfProblem &problem, double lambda,
                                             const Vector &v, const Vector &weights)
{
  check_weights(problem, weights);
  require_nonzero(v);
  const Vector vh = v.normalized();
  const Matrix J = assemble_jacobian(problem, vh);
  if ((J - J.transpose()).norm() > 1e-10 * J.norm())
  {
    return std::nullopt;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (J + J.transpose()), Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues();
  Eigen::Index self = 0;
  (ev.array() - lambda).abs().minCoeff(&self);
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ev.size(); ++k)
  {
    if (k != self)
    {
      gap = std::min(gap, std::abs(ev(k) - lambda));
    }
  }
  if (gap == 0.0)
  {
    throw Error(ErrorKind::NonSimple, "repeated eigenvalue of J(v)");
  }
  return evaluate_coefficients(problem, vh).cwiseAbs().dot(weights) / gap;
}

ConditionReport condition_report(const SpmfProblem &problem, double lambda, const Vector &v,
                                 const Vector &weights, ConditionMode mode)
{
  const PairData d = analyze(problem, lambda, v, weights);
  ConditionReport r;
  r.theta = angle(d.u, d.v);
  r.beta = beta_factor(std::cos(r.theta));
  r.u_dot_v = std::abs(d.uv);
  r.kappa_lambda = d.weighted * relative_factor(lambda, mode) / std::abs(d.uv);
  r.kappa_lambda_sym_2 = r.kappa_lambda;
  r.kappa_lambda_sym_F = r.beta * r.kappa_lambda;

  const TopSingular top = top_singular(resolvent_on_complement(d.J, lambda, d.v));
  r.kappa_v = top.sigma * d.weighted;
  r.kappa_v_sym_2 = r.kappa_v;
  r.kappa_v_sym_F = r.kappa_v / std::sqrt(2.0);

  using Q = ConditionQuantity;
  const auto dir = [&](const Matrix &H, bool sym, NormKind norm) {
    return PerturbationDirection{scaled_blocks(H, d, weights), sym, norm};
  };
  r.attaining.emplace(Q::Lambda, dir(d.u * d.v.transpose(), false, NormKind::Spectral));
  r.attaining.emplace(Q::LambdaSym2, dir(householder_between(d.v, d.u), true, NormKind::Spectral));
  r.attaining.emplace(Q::LambdaSymF, dir((d.u * d.v.transpose() + d.v * d.u.transpose()) /
                                             (2.0 * r.beta),
                                         true, NormKind::Frobenius));
  r.attaining.emplace(Q::Vector, dir(top.p * d.v.transpose(), false, NormKind::Spectral));
  r.attaining.emplace(Q::VectorSym2, dir(householder_between(d.v, top.p), true, NormKind::Spectral));
  r.attaining.emplace(Q::VectorSymF, dir((top.p * d.v.transpose() + d.v * top.p.transpose()) /
                                             std::sqrt(2.0),
                                         true, NormKind::Frobenius));
  return r;
}

PerturbationDirection random_feasible_direction(int n, const Vector &weights, bool symmetric,
                                                NormKind norm, std::mt19937_64 &rng)
{
  std::normal_distribution<double> normal;
  std::vector<Matrix> E;
  E.reserve(static_cast<std::size_t>(weights.size()));
  for (Eigen::Index i = 0; i < weights.size(); ++i)
  {
    Matrix G(n, n);
    for (Eigen::Index k = 0; k < G.size(); ++k)
    {
      G.data()[k] = normal(rng);
    }
    if (symmetric)
    {
      G = (0.5 * (G + G.transpose())).eval();
    }
    E.push_back(G * (weights(i) / matrix_norm(G, norm)));
  }
  return PerturbationDirection{std::move(E), symmetric, norm};
}

}  // namespace nepv
