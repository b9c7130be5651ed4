#include "nepv/core_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nepv/error.hpp"

namespace nepv
{

namespace
{

constexpr double kSymmetryTolerance = 1e-12;

template <class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Matrix checked_symmetric(const Matrix &A, const char *what)
{
  if (A.rows() != A.cols())
  {
    throw Error(ErrorKind::InvalidProblem, std::string(what) + " is not square");
  }
  const double asym = (A - A.transpose()).norm();
  if (asym > kSymmetryTolerance * A.norm())
  {
    throw Error(ErrorKind::InvalidProblem, std::string(what) + " is not symmetric");
  }
  return 0.5 * (A + A.transpose());
}

void require_nonzero(const Vector &v)
{
  if (v.size() == 0 || v.norm() == 0.0 || !v.allFinite())
  {
    throw Error(ErrorKind::ZeroVector, "vector must be nonzero and finite");
  }
}

CoefficientFunction CoefficientFunction::constant(double value)
{
  return CoefficientFunction(Constant{value});
}

CoefficientFunction CoefficientFunction::rational_quadratic(const Matrix &B)
{
  return CoefficientFunction(RationalQuadratic{checked_symmetric(B, "B")});
}

CoefficientFunction CoefficientFunction::custom(std::function<double(const Vector &)> eval,
                                                std::function<Vector(const Vector &)> grad)
{
  if (!eval)
  {
    throw Error(ErrorKind::InvalidProblem, "custom coefficient needs an evaluator");
  }
  return CoefficientFunction(Custom{std::move(eval), std::move(grad)});
}

double CoefficientFunction::value(const Vector &v) const
{
  return std::visit(overloaded{[](const Constant &c) { return c.value; },
                               [&](const RationalQuadratic &q) {
                                 return v.dot(q.B * v) / v.squaredNorm();
                               },
                               [&](const Custom &c) { return c.eval(v); }},
                    kind_);
}

Vector CoefficientFunction::gradient(const Vector &v) const
{
  return std::visit(
      overloaded{[&](const Constant &) -> Vector { return Vector::Zero(v.size()); },
                 [&](const RationalQuadratic &q) -> Vector {
                   const double vv = v.squaredNorm();
                   const Vector Bv = q.B * v;
                   return (2.0 / vv) * Bv - (2.0 * v.dot(Bv) / (vv * vv)) * v;
                 },
                 [&](const Custom &c) -> Vector {
                   if (!c.grad)
                   {
                     throw Error(ErrorKind::MissingGradient,
                                 "custom coefficient function has no gradient");
                   }
                   return c.grad(v);
                 }},
      kind_);
}

bool CoefficientFunction::has_gradient() const
{
  if (const auto *c = std::get_if<Custom>(&kind_))
  {
    return static_cast<bool>(c->grad);
  }
  return true;
}

Vector policy_weights(const std::vector<Term> &terms, WeightPolicy policy)
{
  Vector w(static_cast<Eigen::Index>(terms.size()));
  for (std::size_t i = 0; i < terms.size(); ++i)
  {
    w(static_cast<Eigen::Index>(i)) =
        policy == WeightPolicy::Unit ? 1.0 : spectral_norm(terms[i].A);
  }
  return w;
}

SpmfProblem::SpmfProblem(std::vector<Term> terms, WeightPolicy policy) : terms_(std::move(terms))
{
  validate_terms();
  weights_ = policy_weights(terms_, policy);
  if (weights_.maxCoeff() <= 0.0)
  {
    throw Error(ErrorKind::InvalidProblem, "at least one weight must be positive");
  }
}

SpmfProblem::SpmfProblem(std::vector<Term> terms, Vector weights)
  : terms_(std::move(terms)), weights_(std::move(weights))
{
  validate_terms();
  if (weights_.size() != m())
  {
    throw Error(ErrorKind::InvalidProblem, "need one weight per term");
  }
  if (!weights_.allFinite() || weights_.minCoeff() < 0.0 || weights_.maxCoeff() <= 0.0)
  {
    throw Error(ErrorKind::InvalidProblem,
                "weights must be nonnegative with at least one positive");
  }
}

void SpmfProblem::validate_terms()
{
  if (terms_.empty())
  {
    throw Error(ErrorKind::InvalidProblem, "need at least one term");
  }
  n_ = static_cast<int>(terms_.front().A.rows());
  if (n_ < 2)
  {
    throw Error(ErrorKind::InvalidProblem, "dimension must be at least 2");
  }
  for (auto &t : terms_)
  {
    if (t.A.rows() != n_ || t.A.cols() != n_)
    {
      throw Error(ErrorKind::InvalidProblem, "coefficient matrices differ in size");
    }
    t.A = checked_symmetric(t.A, "A_i");
    if (const auto *q = std::get_if<CoefficientFunction::RationalQuadratic>(&t.f.kind()))
    {
      if (q->B.rows() != n_)
      {
        throw Error(ErrorKind::InvalidProblem, "B has wrong size");
      }
    }
  }
}

SpmfProblem SpmfProblem::with_weights(Vector weights) const
{
  return SpmfProblem(terms_, std::move(weights));
}

SpmfProblem SpmfProblem::with_weights(WeightPolicy policy) const
{
  return SpmfProblem(terms_, policy);
}

Eigenpair Eigenpair::make(const SpmfProblem &problem, double lambda, const Vector &v)
{
  require_nonzero(v);
  Eigenpair p;
  p.lambda = lambda;
  p.v = v.normalized();
  p.residual_norm = (assemble_matrix(problem, p.v) * p.v - lambda * p.v).norm();
  return p;
}

Vector evaluate_coefficients(const SpmfProblem &problem, const Vector &v)
{
  require_nonzero(v);
  Vector f(problem.m());
  for (int i = 0; i < problem.m(); ++i)
  {
    f(i) = problem.term(i).f.value(v);
  }
  return f;
}

Matrix assemble_matrix(const SpmfProblem &problem, const Vector &v)
{
  const Vector f = evaluate_coefficients(problem, v);
  Matrix A = Matrix::Zero(problem.n(), problem.n());
  for (int i = 0; i < problem.m(); ++i)
  {
    A += f(i) * problem.term(i).A;
  }
  return A;
}

Matrix assemble_jacobian(const SpmfProblem &problem, const Vector &v)
{
  Matrix J = assemble_matrix(problem, v);
  for (const auto &t : problem.terms())
  {
    if (t.f.is_constant())
    {
      continue;
    }
    J += (t.A * v) * t.f.gradient(v).transpose();
  }
  return J;
}

Matrix finite_difference_jacobian(const SpmfProblem &problem, const Vector &v, double h)
{
  require_nonzero(v);
  if (!(h > 0.0))
  {
    throw Error(ErrorKind::InvalidInput, "step must be positive");
  }
  const int n = problem.n();
  Matrix J(n, n);
  for (int j = 0; j < n; ++j)
  {
    Vector vp = v, vm = v;
    vp(j) += h;
    vm(j) -= h;
    J.col(j) = (assemble_matrix(problem, vp) * vp - assemble_matrix(problem, vm) * vm) / (2.0 * h);
  }
  return J;
}

InvarianceCheck check_scaling_invariance(const SpmfProblem &problem, const Vector &v,
                                         std::span<const double> alphas, double tol)
{
  require_nonzero(v);
  const Matrix A = assemble_matrix(problem, v);
  InvarianceCheck out;
  for (double alpha : alphas)
  {
    if (alpha == 0.0)
    {
      throw Error(ErrorKind::ZeroAlpha, "scaling factor must be nonzero");
    }
    out.max_deviation = std::max(out.max_deviation, (assemble_matrix(problem, alpha * v) - A).norm());
  }
  bool identity_ok = true;
  bool gradients = true;
  for (const auto &t : problem.terms())
  {
    gradients = gradients && t.f.has_gradient();
  }
  if (gradients)
  {
    const Vector Av = A * v;
    out.jacobian_identity = (assemble_jacobian(problem, v) * v - Av).norm() / (1.0 + Av.norm());
    identity_ok = out.jacobian_identity <= tol;
  }
  else
  {
    out.jacobian_identity = std::numeric_limits<double>::quiet_NaN();
  }
  out.invariant = out.max_deviation <= tol * (1.0 + A.norm()) && identity_ok;
  return out;
}

SpmfProblem rescale_to_invariant(const SpmfProblem &problem)
{
  std::vector<Term> terms;
  terms.reserve(problem.terms().size());
  for (const auto &t : problem.terms())
  {
    if (!t.f.is_custom())
    {
      terms.push_back(t);
      continue;
    }
    const auto base = std::get<CoefficientFunction::Custom>(t.f.kind());
    auto eval = [f = base.eval](const Vector &v) { return f(v / v.norm()); };
    std::function<Vector(const Vector &)> grad;
    if (base.grad)
    {
      // d/dv f(v/|v|) = (I - vhat vhat^T) grad f(vhat) / |v|
      grad = [g = base.grad](const Vector &v) -> Vector {
        const double nv = v.norm();
        const Vector vh = v / nv;
        const Vector gf = g(vh);
        return (gf - vh * vh.dot(gf)) / nv;
      };
    }
    terms.push_back(Term{t.A, CoefficientFunction::custom(std::move(eval), std::move(grad))});
  }
  return SpmfProblem(std::move(terms), problem.weights());
}

}  // namespace nepv
