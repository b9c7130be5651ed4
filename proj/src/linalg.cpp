#include "nepv/linalg.hpp"

#include <cmath>
#include <limits>

namespace nepv
{

double spectral_norm(const Matrix &A)
{
  if (A.size() == 0)
  {
    return 0.0;
  }
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

double matrix_norm(const Matrix &A, NormKind kind)
{
  return kind == NormKind::Spectral ? spectral_norm(A) : A.norm();
}

double sigma_min(const Matrix &A)
{
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto &s = svd.singularValues();
  return s(s.size() - 1);
}

Matrix householder_between(const Vector &from, const Vector &to)
{
  const auto n = from.size();
  Vector w = to - from;
  const double wn = w.norm();
  if (wn <= 8.0 * std::numeric_limits<double>::epsilon())
  {
    return Matrix::Identity(n, n);
  }
  w /= wn;
  return Matrix::Identity(n, n) - 2.0 * w * w.transpose();
}

Vector align_sign(const Vector &v, const Vector &reference)
{
  return v.dot(reference) < 0.0 ? Vector(-v) : v;
}

}  // namespace nepv
