#pragma once

// Shared fixtures for the unit and acceptance tests: random instances and
// oracles that do not go through the code under test.

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "nepv/conditioning.hpp"
#include "nepv/core_model.hpp"
#include "nepv/error.hpp"
#include "nepv/solvers.hpp"
#include "nepv/spectral.hpp"

namespace testing
{

using nepv::Matrix;
using nepv::Vector;

inline Vector random_vector(int n, std::mt19937_64 &rng)
{
  std::normal_distribution<double> g;
  Vector v(n);
  for (int i = 0; i < n; ++i)
  {
    v(i) = g(rng);
  }
  return v;
}

inline Matrix random_matrix(int rows, int cols, std::mt19937_64 &rng)
{
  std::normal_distribution<double> g;
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
  {
    for (int j = 0; j < cols; ++j)
    {
      M(i, j) = g(rng);
    }
  }
  return M;
}

inline Matrix random_symmetric(int n, std::mt19937_64 &rng)
{
  const Matrix G = random_matrix(n, n, rng);
  return 0.5 * (G + G.transpose());
}

/// First term constant, the rest rational quadratic with random symmetric B.
inline nepv::SpmfProblem random_problem(int n, int m, std::mt19937_64 &rng)
{
  std::vector<nepv::Term> terms;
  terms.push_back({random_symmetric(n, rng), nepv::CoefficientFunction::constant(1.0)});
  for (int i = 1; i < m; ++i)
  {
    terms.push_back({random_symmetric(n, rng),
                     nepv::CoefficientFunction::rational_quadratic(random_symmetric(n, rng))});
  }
  return nepv::SpmfProblem(std::move(terms));
}

/// A simple eigenpair with lambda away from zero, found by Newton from the
/// eigenvectors of A at random points. Empty if none is found.
inline std::optional<nepv::Eigenpair> find_simple_pair(const nepv::SpmfProblem &p,
                                                       std::mt19937_64 &rng)
{
  for (int attempt = 0; attempt < 20; ++attempt)
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(nepv::assemble_matrix(p, random_vector(p.n(), rng)));
    for (int k = 0; k < p.n(); ++k)
    {
      try
      {
        const auto res = nepv::newton_solve(p, es.eigenvalues()(k), es.eigenvectors().col(k));
        const auto rep = nepv::is_simple(p, res.pair.lambda, res.pair.v);
        const double scale = nepv::spectral_norm(nepv::assemble_matrix(p, res.pair.v));
        if (rep.is_simple && rep.u_dot_v > 1e-3 && std::abs(res.pair.lambda) > 1e-2 * scale &&
            rep.sigma_min_JF > 1e-3 * scale)
        {
          return res.pair;
        }
      }
      catch (const nepv::Error &)
      {
      }
    }
  }
  return std::nullopt;
}

/// Richardson-extrapolated central difference of a scalar function at 0,
/// from steps h and h/2.
template <class F>
double richardson(F f, double h)
{
  const double d1 = (f(h) - f(-h)) / (2.0 * h);
  const double d2 = (f(h / 2) - f(-h / 2)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

template <class F>
Vector richardson_vector(F f, double h)
{
  const Vector d1 = (f(h) - f(-h)) / (2.0 * h);
  const Vector d2 = (f(h / 2) - f(-h / 2)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

/// Perturbed eigenpair by Newton, with the eigenvector returned in the
/// gauge v^T v = 2 and sign-aligned with the unperturbed one.
struct Resolve
{
  double lambda;
  Vector v;
};

inline Resolve resolve(const nepv::SpmfProblem &p, const nepv::PerturbationDirection &dir,
                       double eps, const nepv::Eigenpair &warm)
{
  nepv::SolveOptions opts;
  opts.tol_backward = 1e-15;
  opts.max_iter = 60;
  const auto res = nepv::solve_perturbed(p, dir, eps, warm, opts);
  return {res.pair.lambda, std::sqrt(2.0) * nepv::align_sign(res.pair.v, warm.v)};
}

/// Unit left eigenvector of the Wilkinson matrix for lambda = n from the
/// recurrence u_j = n^(j-1) / (j-1)!, in long double.
inline Vector wilkinson_left_vector(int n)
{
  std::vector<long double> u(static_cast<std::size_t>(n));
  u[0] = 1.0L;
  for (int j = 1; j < n; ++j)
  {
    u[static_cast<std::size_t>(j)] = u[static_cast<std::size_t>(j - 1)] * n / j;
  }
  long double s = 0.0L;
  for (const long double x : u)
  {
    s += x * x;
  }
  const long double norm = std::sqrt(s);
  Vector out(n);
  for (int j = 0; j < n; ++j)
  {
    out(j) = static_cast<double>(u[static_cast<std::size_t>(j)] / norm);
  }
  return out;
}

/// Log-log slope of |s_{k+1}| against |s_k| over the last three Newton
/// steps above round-off. NaN when fewer than three such steps exist.
inline double step_slope(const std::vector<nepv::IterationRecord> &log)
{
  std::vector<double> s;
  for (const auto &r : log)
  {
    if (r.step_norm > 1e-14)
    {
      s.push_back(std::log(r.step_norm));
    }
  }
  if (s.size() < 3)
  {
    return std::nan("");
  }
  const std::size_t k = s.size() - 3;
  // least squares through (s_k, s_{k+1}) and (s_{k+1}, s_{k+2})
  return (s[k + 2] - s[k + 1]) / (s[k + 1] - s[k]);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
