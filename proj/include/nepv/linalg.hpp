#pragma once

#include <Eigen/Dense>

namespace nepv
{

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class NormKind
{
  Spectral,
  Frobenius
};

double spectral_norm(const Matrix &A);
double matrix_norm(const Matrix &A, NormKind kind);

// Smallest singular value of a square matrix.
double sigma_min(const Matrix &A);

// Reflector I - 2 w w^T / (w^T w) mapping unit vector `from` onto unit vector
// `to`. Returns the identity when the two already coincide.
Matrix householder_between(const Vector &from, const Vector &to);

// sign with sign(0) = +1, so that zero coefficients still get full-norm
// perturbation blocks.
inline double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Flip `v` so that it has a nonnegative inner product with `reference`.
Vector align_sign(const Vector &v, const Vector &reference);

}  // namespace nepv
