#pragma once

#include <complex>
#include <vector>

#include "nepv/core_model.hpp"

namespace nepv
{

struct SimplicityReport
{
  double sigma_min_JF = 0.0;  // smallest singular value of the augmented Jacobian
  double jordan_gap = 0.0;    // distance from lambda to the nearest other eigenvalue of J(v)
  double u_dot_v = 0.0;       // |u^T v| for unit u, v
  bool is_simple = false;
};

inline constexpr double kDefaultSimpleTolerance = 1e-8;
inline constexpr double kDefaultEigenvalueTolerance = 1e-8;

/// r = A(v)v - lambda v.
Vector residual(const SpmfProblem &problem, double lambda, const Vector &v);

/// The bordered matrix [J - lambda I, -v; -v^T, 0].
Matrix augmented_jacobian(const Matrix &J, double lambda, const Vector &v);

/// Eigenvalues of a general real square matrix.
std::vector<std::complex<double>> eigenvalues(const Matrix &J);

/// Unit left eigenvector u of J for the eigenvalue lambda, with its
/// largest-magnitude entry made positive.
///
/// lambda is accepted when sigma_min(J - lambda I) <= tol ||J||_2 (it is an
/// exact eigenvalue of a matrix within that distance of J). NonSimple is
/// raised when two computed eigenvalues of J lie within tol ||J||_2 of lambda
/// or when J - lambda I has a second small singular value. The vector itself
/// is the left singular vector of J - lambda I for its smallest singular
/// value, which stays accurate for ill-conditioned eigenvalues.
Vector left_eigenvector(const Matrix &J, double lambda, double tol = kDefaultEigenvalueTolerance);

/// Simplicity of an eigenpair via the augmented Jacobian. v is taken in the
/// gauge v^T v = 2 when forming J_F. Throws NotAnEigenpair if the residual is
/// not small.
SimplicityReport is_simple(const SpmfProblem &problem, double lambda, const Vector &v,
                           double tol_simple = kDefaultSimpleTolerance);

/// Orthonormal basis of the complement of v: columns 2..n of the Householder
/// reflector that maps v/|v| onto -sign(v_1) e_1.
Matrix orthogonal_complement_basis(const Vector &v);

namespace detail
{
// Left singular vector of M for its smallest singular value, sign-normalized.
Vector left_null_vector(const Matrix &M);
}  // namespace detail

}  // namespace nepv
