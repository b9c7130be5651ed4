#include "nepv/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nepv/backward_error.hpp"
#include "nepv/error.hpp"
#include "nepv/spectral.hpp"

namespace nepv
{

namespace
{

// A(v) and J(v) of whatever operator Newton is applied to.
using OperatorEval = std::function<void(const Vector &, Matrix &, Matrix &)>;

double eta_of(const SpmfProblem &problem, const Vector &r, const Vector &v)
{
  const double denom = evaluate_coefficients(problem, v).cwiseAbs().dot(problem.weights()) * v.norm();
  if (denom <= 1e-300)
  {
    throw Error(ErrorKind::DegenerateWeights, "backward error undefined at this iterate");
  }
  return r.norm() / denom;
}

SolveResult newton_core(const SpmfProblem &problem, const OperatorEval &eval, double lambda0,
                        const Vector &v0, const SolveOptions &opts)
{
  opts.validate();
  require_nonzero(v0);
  if (!std::isfinite(lambda0) || !v0.allFinite())
  {
    throw Error(ErrorKind::InvalidInput, "starting guess must be finite");
  }
  const auto n = v0.size();
  if (n != problem.n())
  {
    throw Error(ErrorKind::InvalidDimension, "starting vector has the wrong length");
  }

  Vector v = std::sqrt(2.0) * v0.normalized();
  double lambda = lambda0;
  double last_step = 0.0;
  SolveResult out;
  Matrix A;
  Matrix J;
  for (int k = 0;; ++k)
  {
    eval(v, A, J);
    const Vector r = A * v - lambda * v;
    const double eta = eta_of(problem, r, v);
    out.log.push_back({k, lambda, eta, last_step});
    if (!std::isfinite(eta) || !std::isfinite(lambda))
    {
      throw Error(ErrorKind::MaxIterExceeded, "Newton diverged");
    }
    const bool stagnated = k > 0 && last_step <= opts.tol_step * (1.0 + std::abs(lambda));
    if (eta <= opts.tol_backward || (stagnated && eta <= 1e3 * opts.tol_backward))
    {
      out.iterations = k;
      out.eta = eta;
      out.pair = Eigenpair::make(problem, lambda, align_sign(v.normalized(), v0));
      return out;
    }
    if (k >= opts.max_iter)
    {
      throw Error(ErrorKind::MaxIterExceeded,
                  "Newton did not converge in " + std::to_string(opts.max_iter) +
                      " iterations (eta = " + std::to_string(eta) + ")");
    }
    const Matrix JF = augmented_jacobian(J, lambda, v);
    if (sigma_min(JF) <= opts.singular_floor * (1.0 + spectral_norm(J)))
    {
      throw Error(ErrorKind::SingularJacobian, "augmented Jacobian is numerically singular");
    }
    Vector F(n + 1);
    F.head(n) = r;
    F(n) = 1.0 - 0.5 * v.squaredNorm();
    const Vector step = JF.partialPivLu().solve(-F);
    v += opts.damping * step.head(n);
    lambda += opts.damping * step(n);
    last_step = opts.damping * step.norm();
  }
}

}  // namespace

void SolveOptions::validate() const
{
  if (max_iter < 1 || !(tol_backward > 0.0) || !(tol_step > 0.0) || !(damping > 0.0) ||
      damping > 1.0 || !(singular_floor >= 0.0))
  {
    throw Error(ErrorKind::InvalidInput, "invalid solver options");
  }
}

SolveResult newton_solve(const SpmfProblem &problem, double lambda0, const Vector &v0,
                         const SolveOptions &opts)
{
  const OperatorEval eval = [&](const Vector &v, Matrix &A, Matrix &J) {
    A = assemble_matrix(problem, v);
    J = assemble_jacobian(problem, v);
  };
  return newton_core(problem, eval, lambda0, v0, opts);
}

SolveResult newton_solve(const SpmfProblem &problem, const Vector &v0, const SolveOptions &opts)
{
  return newton_solve(problem, rayleigh_quotient(problem, v0), v0, opts);
}

SolveResult scf_solve(const SpmfProblem &problem, const Vector &v0, Selector selector,
                      const SolveOptions &opts)
{
  opts.validate();
  require_nonzero(v0);
  if (v0.size() != problem.n())
  {
    throw Error(ErrorKind::InvalidDimension, "starting vector has the wrong length");
  }
  Vector v = v0.normalized();
  SolveResult out;
  for (int k = 1; k <= std::max(opts.max_iter, 1); ++k)
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(assemble_matrix(problem, v));
    const Vector &ev = es.eigenvalues();
    Eigen::Index idx = 0;
    switch (selector.kind)
    {
      case Selector::Kind::Smallest:
        idx = 0;
        break;
      case Selector::Kind::Largest:
        idx = ev.size() - 1;
        break;
      case Selector::Kind::NearestTo:
        (ev.array() - selector.target).abs().minCoeff(&idx);
        break;
      case Selector::Kind::Nth:
        if (selector.position < 0 || selector.position >= ev.size())
        {
          throw Error(ErrorKind::InvalidInput, "selector position out of range");
        }
        idx = selector.position;
        break;
    }
    const Vector next = align_sign(es.eigenvectors().col(idx), v);
    const double step = (next - v).norm();
    v = next;
    const auto be = eigenvector_backward_error(problem, v, problem.weights());
    out.log.push_back({k, be.lambda_star, be.eta, step});
    if (be.eta <= opts.tol_backward)
    {
      out.iterations = k;
      out.eta = be.eta;
      out.pair = Eigenpair::make(problem, be.lambda_star, v);
      return out;
    }
  }
  throw Error(ErrorKind::MaxIterExceeded,
              "SCF did not converge in " + std::to_string(opts.max_iter) + " iterations");
}

SolveResult solve_perturbed(const SpmfProblem &problem, const PerturbationDirection &direction,
                            double epsilon, const Eigenpair &warm, const SolveOptions &opts)
{
  if (direction.E.size() != static_cast<std::size_t>(problem.m()))
  {
    throw Error(ErrorKind::InvalidDirection, "direction needs one block per term");
  }
  if (epsilon == 0.0)
  {
    SolveResult out;
    out.pair = warm;
    out.eta = backward_error(problem, warm.lambda, warm.v, problem.weights());
    out.log.push_back({0, warm.lambda, out.eta, 0.0});
    return out;
  }
  const OperatorEval eval = [&](const Vector &v, Matrix &A, Matrix &J) {
    A = assemble_matrix(problem, v);
    J = assemble_jacobian(problem, v);
    for (int i = 0; i < problem.m(); ++i)
    {
      const auto &f = problem.term(i).f;
      const Matrix &E = direction.E[static_cast<std::size_t>(i)];
      A += epsilon * f.value(v) * E;
      J += epsilon * f.value(v) * E;
      if (!f.is_constant())
      {
        J += epsilon * (E * v) * f.gradient(v).transpose();
      }
    }
  };
  SolveResult out = newton_core(problem, eval, warm.lambda, warm.v, opts);
  // residual_norm refers to the perturbed operator
  Matrix A;
  Matrix J;
  eval(out.pair.v, A, J);
  out.pair.residual_norm = (A * out.pair.v - out.pair.lambda * out.pair.v).norm();
  return out;
}

}  // namespace nepv
