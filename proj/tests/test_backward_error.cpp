#include <doctest.h>

#include <random>

#include "nepv/backward_error.hpp"
#include "nepv/error.hpp"
#include "nepv/experiments.hpp"
#include "support.hpp"

using namespace nepv;
using testing::rel;

namespace
{

// max over terms of ||E_i|| / w_i
double scale_of(const PerturbationDirection &dir, const Vector &w)
{
  double s = 0.0;
  for (std::size_t i = 0; i < dir.E.size(); ++i)
  {
    s = std::max(s, matrix_norm(dir.E[i], dir.norm) / w(static_cast<Eigen::Index>(i)));
  }
  return s;
}

double defect(const SpmfProblem &p, double lambda, const Vector &v, const AttainingBackward &att)
{
  const Vector f = evaluate_coefficients(p, v);
  Matrix A = assemble_matrix(p, v);
  for (int i = 0; i < p.m(); ++i)
  {
    A += att.epsilon * f(i) * att.direction.E[static_cast<std::size_t>(i)];
  }
  return (A * v - lambda * v).norm() / ((spectral_norm(A) + std::abs(lambda)) * v.norm());
}

}  // namespace

TEST_CASE("exact eigenpairs have zero backward error")
{
  const auto w = build_wilkinson(6);
  const auto rep = backward_error_report(w, 6.0, Vector::Unit(6, 0), w.weights());
  CHECK(rep.eta == 0.0);
  CHECK(rep.eta_sym_F == 0.0);
  CHECK(rep.gamma == 1.0);
  const auto att = attaining_backward_perturbation(w, 6.0, Vector::Unit(6, 0), w.weights(), true,
                                                   NormKind::Frobenius);
  CHECK(att.epsilon == 0.0);
}

TEST_CASE("linear problem gives the classical formula")
{
  std::mt19937_64 rng(2);
  const Matrix A = testing::random_symmetric(5, rng);
  const SpmfProblem p({{A, CoefficientFunction::constant(1.0)}});
  const Vector v = testing::random_vector(5, rng);
  const double lambda = 0.3;
  const double expected = (A * v - lambda * v).norm() / (spectral_norm(A) * v.norm());
  CHECK(rel(backward_error(p, lambda, v, p.weights()), expected) <= 1e-14);
}

TEST_CASE("gamma for parallel and orthogonal residuals")
{
  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << 1.0, 2.0, 3.0;
  const SpmfProblem p({{D, CoefficientFunction::constant(1.0)}});
  const Vector e1 = Vector::Unit(3, 0);
  // r = (1 - 0.5) e1 is parallel to v
  const auto par = backward_error_report(p, 0.5, e1, p.weights());
  CHECK(par.gamma == doctest::Approx(1.0));
  CHECK(par.eta_sym_F == doctest::Approx(par.eta));

  // at the Rayleigh quotient r is orthogonal to v
  const Vector v = Vector::Ones(3);
  const double rq = rayleigh_quotient(p, v);
  const auto orth = backward_error_report(p, rq, v, p.weights());
  CHECK(orth.gamma == doctest::Approx(std::sqrt(2.0)));
  CHECK(orth.vartheta == doctest::Approx(M_PI / 2));
}

TEST_CASE("attaining perturbations solve the perturbed problem exactly")
{
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial)
  {
    const auto p = testing::random_problem(2 + trial % 8, 1 + trial % 4, rng);
    const Vector v = testing::random_vector(p.n(), rng);
    const double lambda = rayleigh_quotient(p, v) + (trial % 3 == 0 ? 0.1 : 0.0);
    const auto rep = backward_error_report(p, lambda, v, p.weights());
    const std::pair<BackwardQuantity, double> expected[] = {
        {BackwardQuantity::Eta, rep.eta},
        {BackwardQuantity::EtaSym2, rep.eta_sym_2},
        {BackwardQuantity::EtaSymF, rep.eta_sym_F}};
    for (const auto &[q, eta] : expected)
    {
      const auto &att = rep.attaining.at(q);
      CHECK(rel(att.epsilon, eta) <= 1e-14);
      CHECK(defect(p, lambda, v, att) <= 1e-12);
      CHECK(rel(scale_of(att.direction, p.weights()), 1.0) <= 1e-12);
      if (att.direction.symmetric)
      {
        for (const auto &E : att.direction.E)
        {
          CHECK((E - E.transpose()).norm() <= 1e-13 * E.norm());
        }
      }
    }
    CHECK(rep.eta <= rep.eta_sym_F * (1 + 1e-14));
    CHECK(rep.eta_sym_F <= std::sqrt(2.0) * rep.eta * (1 + 1e-14));
  }
}

TEST_CASE("Frobenius-class identity")
{
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial)
  {
    const auto p = testing::random_problem(4, 2, rng);
    const Vector v = testing::random_vector(4, rng);
    const Vector r = residual(p, 1.5, v);
    const double s = evaluate_coefficients(p, v).cwiseAbs().dot(p.weights()) * v.norm();
    const double cos2 = std::pow(r.dot(v) / (r.norm() * v.norm()), 2);
    const double expected = r.norm() / s * std::sqrt(2.0 - cos2);
    CHECK(rel(backward_error_symmetric(p, 1.5, v, p.weights(), NormKind::Frobenius), expected) <=
          1e-12);
  }
}

TEST_CASE("no sampled cancelling perturbation beats the backward error")
{
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial)
  {
    const auto p = testing::random_problem(5, 3, rng);
    const Vector v = testing::random_vector(5, rng);
    const double lambda = g(rng);
    const Vector r = residual(p, lambda, v);
    const Vector f = evaluate_coefficients(p, v);
    const double eta = backward_error(p, lambda, v, p.weights());
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2000; ++k)
    {
      // Delta A_i = -c_i r x^T / (x^T v) with sum_i f_i c_i = 1 cancels r
      const Vector x = testing::random_vector(5, rng);
      Vector c = testing::random_vector(p.m(), rng);
      c /= f.dot(c);
      double eps = 0.0;
      for (int i = 0; i < p.m(); ++i)
      {
        const Matrix dA = -c(i) * r * x.transpose() / x.dot(v);
        eps = std::max(eps, spectral_norm(dA) / p.weights()(i));
      }
      best = std::min(best, eps);
    }
    CHECK(best >= eta * (1 - 1e-12));
    CHECK(best <= 10.0 * eta);
  }
}

TEST_CASE("Rayleigh quotient minimizes the backward error")
{
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial)
  {
    const auto p = testing::random_problem(4, 3, rng);
    const Vector v = testing::random_vector(4, rng);
    const auto ev = eigenvector_backward_error(p, v, p.weights());
    CHECK(std::abs(residual(p, ev.lambda_star, v).dot(v)) <= 1e-12 * v.squaredNorm() *
                                                                  (1 + std::abs(ev.lambda_star)));
    const double radius = 5.0 * spectral_norm(assemble_matrix(p, v));
    double grid_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10000; ++k)
    {
      const double mu = -radius + 2.0 * radius * k / 10000.0;
      grid_min = std::min(grid_min, backward_error(p, mu, v, p.weights()));
    }
    CHECK(ev.eta <= grid_min * (1 + 1e-12));
    CHECK(ev.eta >= grid_min * (1 - 1e-4));
  }

  const auto w = build_wilkinson(5);
  const auto e = eigenvector_backward_error(w, 3.0 * Vector::Unit(5, 0), w.weights());
  CHECK(e.lambda_star == doctest::Approx(5.0));
  CHECK(e.eta == 0.0);
}

TEST_CASE("backward error is scale invariant")
{
  std::mt19937_64 rng(14);
  const auto p = testing::random_problem(6, 3, rng);
  const Vector v = testing::random_vector(6, rng);
  const double a = backward_error(p, 0.7, v, p.weights());
  CHECK(rel(backward_error(p, 0.7, -4.0 * v, p.weights()), a) <= 1e-14);
}

TEST_CASE("forward error is bounded by condition times backward error")
{
  std::mt19937_64 rng(15);
  int checked = 0;
  for (int trial = 0; trial < 20 && checked < 8; ++trial)
  {
    const auto p = testing::random_problem(5, 3, rng);
    const auto pair = testing::find_simple_pair(p, rng);
    if (!pair)
    {
      continue;
    }
    ++checked;
    const double kabs =
        eigenvalue_condition(p, pair->lambda, pair->v, p.weights(), ConditionMode::Absolute);
    const Vector vt = pair->v + 1e-6 * testing::random_vector(5, rng);
    const double lt = rayleigh_quotient(p, vt);
    const double eta = backward_error(p, lt, vt, p.weights());
    CHECK(std::abs(lt - pair->lambda) <= kabs * eta * (1 + 1e-3) + 1e-14);
  }
  CHECK(checked == 8);
}

TEST_CASE("vanishing coefficients give degenerate weights")
{
  const SpmfProblem p({{Matrix::Identity(2, 2), CoefficientFunction::constant(0.0)}},
                      WeightPolicy::Unit);
  try
  {
    backward_error(p, 1.0, Vector::Ones(2), p.weights());
    FAIL("expected DegenerateWeights");
  }
  catch (const Error &e)
  {
    CHECK(e.kind() == ErrorKind::DegenerateWeights);
  }
}
