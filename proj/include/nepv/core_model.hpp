#pragma once

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "nepv/linalg.hpp"

namespace nepv
{

/// Scalar coefficient f_i(v) of one term in A(v) = sum_i f_i(v) A_i.
///
/// Three kinds are supported. Constant and RationalQuadratic are scaling
/// invariant by construction; Custom wraps arbitrary callables and is only
/// available through the library API (it cannot be serialized).
class CoefficientFunction
{
public:
  struct Constant
  {
    double value;
  };
  /// f(v) = v^T B v / v^T v.
  struct RationalQuadratic
  {
    Matrix B;
  };
  struct Custom
  {
    std::function<double(const Vector &)> eval;
    std::function<Vector(const Vector &)> grad;  // may be empty
  };

  static CoefficientFunction constant(double value);
  /// Rejects B whose asymmetry exceeds 1e-12 ||B||_F; symmetrizes otherwise.
  static CoefficientFunction rational_quadratic(const Matrix &B);
  static CoefficientFunction custom(std::function<double(const Vector &)> eval,
                                    std::function<Vector(const Vector &)> grad = {});

  double value(const Vector &v) const;
  /// Throws MissingGradient for a Custom function without a gradient.
  Vector gradient(const Vector &v) const;

  bool has_gradient() const;
  bool is_constant() const { return std::holds_alternative<Constant>(kind_); }
  bool is_custom() const { return std::holds_alternative<Custom>(kind_); }

  const std::variant<Constant, RationalQuadratic, Custom> &kind() const { return kind_; }

private:
  explicit CoefficientFunction(std::variant<Constant, RationalQuadratic, Custom> kind)
    : kind_(std::move(kind))
  {
  }

  std::variant<Constant, RationalQuadratic, Custom> kind_;
};

struct Term
{
  Matrix A;
  CoefficientFunction f;
};

enum class WeightPolicy
{
  Relative,  // w_i = ||A_i||_2
  Unit       // w_i = 1
};

/// NEPv in sum-of-products form, A(v) = sum_i f_i(v) A_i, together with the
/// perturbation weights w_i used by condition numbers and backward errors.
class SpmfProblem
{
public:
  SpmfProblem(std::vector<Term> terms, WeightPolicy policy = WeightPolicy::Relative);
  SpmfProblem(std::vector<Term> terms, Vector weights);

  int n() const { return n_; }
  int m() const { return static_cast<int>(terms_.size()); }
  const std::vector<Term> &terms() const { return terms_; }
  const Term &term(int i) const { return terms_[static_cast<std::size_t>(i)]; }
  const Vector &weights() const { return weights_; }

  SpmfProblem with_weights(Vector weights) const;
  SpmfProblem with_weights(WeightPolicy policy) const;

private:
  void validate_terms();

  int n_ = 0;
  std::vector<Term> terms_;
  Vector weights_;
};

Vector policy_weights(const std::vector<Term> &terms, WeightPolicy policy);

/// An eigenpair with unit-norm eigenvector and its residual norm
/// ||A(v)v - lambda v||, recomputed on construction.
struct Eigenpair
{
  double lambda = 0.0;
  Vector v;
  double residual_norm = 0.0;

  static Eigenpair make(const SpmfProblem &problem, double lambda, const Vector &v);
};

// Symmetrize a matrix whose asymmetry is within 1e-12 ||A||_F, throw
// InvalidProblem otherwise.
Matrix checked_symmetric(const Matrix &A, const char *what);

void require_nonzero(const Vector &v);

Vector evaluate_coefficients(const SpmfProblem &problem, const Vector &v);
Matrix assemble_matrix(const SpmfProblem &problem, const Vector &v);

/// J(v) = d/dv (A(v) v) = A(v) + sum_i A_i v grad f_i(v)^T.
Matrix assemble_jacobian(const SpmfProblem &problem, const Vector &v);

/// Column j is (A(v+h e_j)(v+h e_j) - A(v-h e_j)(v-h e_j)) / (2h).
Matrix finite_difference_jacobian(const SpmfProblem &problem, const Vector &v, double h);

struct InvarianceCheck
{
  double max_deviation = 0.0;      // max_alpha ||A(alpha v) - A(v)||_F
  double jacobian_identity = 0.0;  // ||J(v)v - A(v)v|| / (1 + ||A(v)v||)
  bool invariant = false;
};

InvarianceCheck check_scaling_invariance(const SpmfProblem &problem, const Vector &v,
                                         std::span<const double> alphas, double tol = 1e-12);

/// Rescaled problem with f_i(v) replaced by f_i(v / ||v||). Terms that are
/// already scaling invariant are kept unchanged.
SpmfProblem rescale_to_invariant(const SpmfProblem &problem);

}  // namespace nepv
