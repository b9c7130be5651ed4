#include "nepv/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nepv/error.hpp"

namespace nepv
{

namespace
{

constexpr double kEigenpairResidualTolerance = 1e-8;

}  // namespace

Vector residual(const SpmfProblem &problem, double lambda, const Vector &v)
{
  return assemble_matrix(problem, v) * v - lambda * v;
}

Matrix augmented_jacobian(const Matrix &J, double lambda, const Vector &v)
{
  const auto n = J.rows();
  Matrix JF = Matrix::Zero(n + 1, n + 1);
  JF.topLeftCorner(n, n) = J - lambda * Matrix::Identity(n, n);
  JF.topRightCorner(n, 1) = -v;
  JF.bottomLeftCorner(1, n) = -v.transpose();
  return JF;
}

std::vector<std::complex<double>> eigenvalues(const Matrix &J)
{
  Eigen::EigenSolver<Matrix> es(J, /*computeEigenvectors=*/false);
  const auto ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

namespace detail
{

Vector left_null_vector(const Matrix &M)
{
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
  Vector u = svd.matrixU().col(M.rows() - 1);
  Eigen::Index k = 0;
  u.cwiseAbs().maxCoeff(&k);
  if (u(k) < 0.0)
  {
    u = -u;
  }
  return u;
}

}  // namespace detail

Vector left_eigenvector(const Matrix &J, double lambda, double tol)
{
  const auto n = J.rows();
  const double radius = tol * spectral_norm(J);
  const Matrix M = J - lambda * Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
  const auto &s = svd.singularValues();
  if (s(n - 1) > radius)
  {
    throw Error(ErrorKind::NotAnEigenvalue, "lambda is not an eigenvalue of J");
  }
  int close = 0;
  for (const auto &mu : eigenvalues(J))
  {
    close += std::abs(mu - lambda) <= radius ? 1 : 0;
  }
  if (close >= 2 || (n >= 2 && s(n - 2) <= radius))
  {
    throw Error(ErrorKind::NonSimple, "lambda is not a simple eigenvalue of J");
  }
  Vector u = svd.matrixU().col(n - 1);
  Eigen::Index k = 0;
  u.cwiseAbs().maxCoeff(&k);
  return u(k) < 0.0 ? Vector(-u) : u;
}

SimplicityReport is_simple(const SpmfProblem &problem, double lambda, const Vector &v,
                           double tol_simple)
{
  require_nonzero(v);
  const Vector vh = v.normalized();
  const Matrix A = assemble_matrix(problem, vh);
  const double rnorm = (A * vh - lambda * vh).norm();
  if (rnorm > kEigenpairResidualTolerance * (spectral_norm(A) + std::abs(lambda)))
  {
    throw Error(ErrorKind::NotAnEigenpair, "residual too large for an eigenpair");
  }
  const Matrix J = assemble_jacobian(problem, vh);
  const auto n = J.rows();

  SimplicityReport report;
  report.sigma_min_JF = sigma_min(augmented_jacobian(J, lambda, std::sqrt(2.0) * vh));

  const auto ev = eigenvalues(J);
  std::size_t nearest = 0;
  for (std::size_t k = 1; k < ev.size(); ++k)
  {
    if (std::abs(ev[k] - lambda) < std::abs(ev[nearest] - lambda))
    {
      nearest = k;
    }
  }
  report.jordan_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ev.size(); ++k)
  {
    if (k != nearest)
    {
      report.jordan_gap = std::min(report.jordan_gap, std::abs(ev[k] - lambda));
    }
  }

  const Vector u = detail::left_null_vector(J - lambda * Matrix::Identity(n, n));
  report.u_dot_v = std::abs(u.dot(vh));
  report.is_simple = report.sigma_min_JF > tol_simple * (1.0 + spectral_norm(J));
  return report;
}

Matrix orthogonal_complement_basis(const Vector &v)
{
  require_nonzero(v);
  const auto n = v.size();
  const Vector vh = v / v.norm();
  Vector w = vh;
  w(0) += vh(0) >= 0.0 ? 1.0 : -1.0;
  const Matrix H = Matrix::Identity(n, n) - (2.0 / w.squaredNorm()) * w * w.transpose();
  return H.rightCols(n - 1);
}

}  // namespace nepv
