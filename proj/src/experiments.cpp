#include "nepv/experiments.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>
#include <thread>

#include "nepv/backward_error.hpp"
#include "nepv/error.hpp"
#include "nepv/spectral.hpp"

namespace nepv
{

SpmfProblem build_wilkinson(int n)
{
  if (n < 2)
  {
    throw Error(ErrorKind::InvalidDimension, "the Wilkinson problem needs n >= 2");
  }
  Matrix A0 = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
  {
    A0(i, i) = n - i;
  }
  A0(0, 0) -= 1.0;
  for (int j = 1; j < n - 1; ++j)
  {
    A0(0, j) = A0(j, 0) = -1.0;
  }
  std::vector<Term> terms;
  terms.push_back({A0, CoefficientFunction::constant(1.0)});
  for (int k = 1; k <= n - 1; ++k)
  {
    Matrix Ak = Matrix::Zero(n, n);
    Ak(0, k - 1) = Ak(k - 1, 0) = 1.0;
    Matrix Bk = Matrix::Zero(n, n);
    Bk(0, 0) = 1.0;
    Bk(0, k) = Bk(k, 0) = n / 2.0;
    terms.push_back({Ak, CoefficientFunction::rational_quadratic(Bk)});
  }
  return SpmfProblem(std::move(terms), WeightPolicy::Relative);
}

Matrix wilkinson_matrix(int n)
{
  if (n < 1)
  {
    throw Error(ErrorKind::InvalidDimension, "n must be positive");
  }
  Matrix W = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
  {
    W(i, i) = n - i;
    if (i + 1 < n)
    {
      W(i, i + 1) = n;
    }
  }
  return W;
}

namespace
{

WilkinsonRow wilkinson_row(int n)
{
  const SpmfProblem problem = build_wilkinson(n);
  const Vector e1 = Vector::Unit(n, 0);
  const Matrix J = assemble_jacobian(problem, e1);
  if (J != wilkinson_matrix(n))
  {
    throw Error(ErrorKind::InvalidProblem, "J(e_1) is not the Wilkinson matrix");
  }
  const double lambda = n;
  const Vector u = left_eigenvector(J, lambda);
  WilkinsonRow row;
  row.n = n;
  row.u_dot_v = std::abs(u.dot(e1));
  row.alpha = evaluate_coefficients(problem, e1).cwiseAbs().dot(problem.weights()) * u.norm();
  row.kappa = eigenvalue_condition(problem, lambda, e1, problem.weights());
  return row;
}

}  // namespace

std::vector<WilkinsonRow> wilkinson_report(std::span<const int> ns)
{
  std::vector<std::future<WilkinsonRow>> jobs;
  jobs.reserve(ns.size());
  for (const int n : ns)
  {
    jobs.push_back(std::async(std::launch::async, wilkinson_row, n));
  }
  std::vector<WilkinsonRow> rows;
  rows.reserve(ns.size());
  for (auto &job : jobs)
  {
    rows.push_back(job.get());
  }
  return rows;
}

SpmfProblem build_bifurcation(double delta)
{
  Matrix A0(3, 3);
  A0 << 1.0 + delta, 1.0, 1.0, 1.0, -2.0, -2.0, 1.0, -2.0, 0.0;
  Matrix A1(3, 3);
  A1 << 0.0, 1.0, 0.0, 1.0, 2.0, -1.0, 0.0, -1.0, 5.0;
  Matrix B(3, 3);
  B << 0.0, -1.0, 2.0, -1.0, 2.0, 1.0, 2.0, 1.0, 1.0;
  std::vector<Term> terms;
  terms.push_back({A0, CoefficientFunction::constant(1.0)});
  terms.push_back({A1, CoefficientFunction::rational_quadratic(B)});
  return SpmfProblem(std::move(terms), WeightPolicy::Relative);
}

std::vector<Eigenpair> scf_seeds(const SpmfProblem &problem, const SolveOptions &opts)
{
  const int n = problem.n();
  const Vector vbar = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  Eigen::SelfAdjointEigenSolver<Matrix> es(assemble_matrix(problem, vbar));

  SolveOptions scf_opts = opts;
  scf_opts.max_iter = std::max(opts.max_iter, 500);
  scf_opts.tol_backward = std::max(opts.tol_backward, 1e-10);

  std::vector<Eigenpair> seeds;
  for (int k = 0; k < n; ++k)
  {
    try
    {
      const auto scf = scf_solve(problem, es.eigenvectors().col(k), Selector::nth(k), scf_opts);
      const auto polished = newton_solve(problem, scf.pair.lambda, scf.pair.v, opts);
      const Eigenpair &p = polished.pair;
      const bool duplicate = std::any_of(seeds.begin(), seeds.end(), [&](const Eigenpair &q) {
        return std::abs(p.lambda - q.lambda) <= 1e-8 * (1.0 + std::abs(q.lambda)) &&
               std::abs(p.v.dot(q.v)) >= 1.0 - 1e-8;
      });
      if (!duplicate)
      {
        seeds.push_back(p);
      }
    }
    catch (const Error &)
    {
      // this starting vector does not lead to a converged pair
    }
  }
  std::sort(seeds.begin(), seeds.end(),
            [](const Eigenpair &a, const Eigenpair &b) { return a.lambda < b.lambda; });
  return seeds;
}

BranchData bifurcation_sweep(const SweepOptions &opts)
{
  if (!(opts.delta_min < opts.delta_max) || opts.steps < 2)
  {
    throw Error(ErrorKind::InvalidInput, "need delta_min < delta_max and at least two steps");
  }
  std::vector<double> grid(static_cast<std::size_t>(opts.steps));
  const double h = (opts.delta_max - opts.delta_min) / (opts.steps - 1);
  for (int k = 0; k < opts.steps; ++k)
  {
    grid[static_cast<std::size_t>(k)] = opts.delta_min + k * h;
  }
  grid.back() = opts.delta_max;
  const auto seeds = scf_seeds(build_bifurcation(grid.front()), opts.continuation.newton);
  return continuation(build_bifurcation, grid, seeds, opts.continuation);
}

std::string format_double(double x)
{
  if (std::isnan(x))
  {
    return "nan";
  }
  if (std::isinf(x))
  {
    return x > 0 ? "inf" : "-inf";
  }
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

void write_branch_csv(std::ostream &os, const BranchData &data)
{
  os << "delta,lambda,kappa,branch,simple\n";
  for (std::size_t b = 0; b < data.branches.size(); ++b)
  {
    for (const auto &p : data.branches[b].points)
    {
      os << format_double(p.delta) << ',' << format_double(p.lambda) << ','
         << format_double(p.kappa) << ',' << b << ',' << (p.simple ? 1 : 0) << '\n';
    }
  }
}

void write_wilkinson_csv(std::ostream &os, std::span<const WilkinsonRow> rows)
{
  os << "n,kappa,u_dot_v,alpha\n";
  for (const auto &r : rows)
  {
    os << r.n << ',' << format_double(r.kappa) << ',' << format_double(r.u_dot_v) << ','
       << format_double(r.alpha) << '\n';
  }
}

double fold_exponent(const Branch &branch, const TurningPoint &turn)
{
  std::vector<std::pair<double, double>> pts;  // (d, |lambda - lambda*|)
  for (const auto &p : branch.points)
  {
    const double d = std::abs(p.delta - turn.delta);
    const double l = std::abs(p.lambda - turn.lambda);
    if (d > 1e-13 && l > 0.0)
    {
      pts.emplace_back(d, l);
    }
  }
  if (pts.empty())
  {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double dmin =
      std::min_element(pts.begin(), pts.end())->first;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (const auto &[d, l] : pts)
  {
    if (d <= 10.0 * dmin)
    {
      const double x = std::log(d);
      const double y = std::log(l);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++count;
    }
  }
  if (count < 3)
  {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

MonteCarloReport monte_carlo_condition_check(const SpmfProblem &problem, const Eigenpair &pair,
                                             const Vector &weights, bool symmetric, NormKind norm,
                                             int samples, double epsilon, std::uint64_t seed,
                                             int resolve_every)
{
  if (samples < 1)
  {
    throw Error(ErrorKind::InvalidSamples, "need at least one sample");
  }
  if (!(epsilon > 0.0))
  {
    throw Error(ErrorKind::InvalidInput, "epsilon must be positive");
  }
  const double lambda = pair.lambda;
  const Vector &v = pair.v;
  MonteCarloReport rep;
  rep.samples = samples;
  rep.seed = seed;
  rep.predicted_kappa = symmetric
                            ? eigenvalue_condition_symmetric(problem, lambda, v, weights, norm)
                            : eigenvalue_condition(problem, lambda, v, weights);
  const auto best = optimal_eigenvalue_perturbation(problem, lambda, v, weights, symmetric, norm);
  rep.attained_ratio = std::abs(eigenvalue_sensitivity(problem, lambda, v, best)) / std::abs(lambda);

  struct Partial
  {
    double max_ratio = 0.0;
    double discrepancy = 0.0;
    int resolved = 0;
  };
  auto work = [&](int begin, int end) {
    Partial part;
    for (int k = begin; k < end; ++k)
    {
      std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(k)));
      const auto dir = random_feasible_direction(problem.n(), weights, symmetric, norm, rng);
      const double dl = eigenvalue_sensitivity(problem, lambda, v, dir);
      part.max_ratio = std::max(part.max_ratio, std::abs(dl) / std::abs(lambda));
      if (resolve_every > 0 && k % resolve_every == 0)
      {
        try
        {
          const auto res = solve_perturbed(problem, dir, epsilon, pair);
          const double fd = (res.pair.lambda - lambda) / epsilon;
          part.discrepancy =
              std::max(part.discrepancy, std::abs(fd - dl) / std::max(std::abs(dl), 1.0));
          ++part.resolved;
        }
        catch (const Error &)
        {
          // perturbed problem lost the pair; not counted
        }
      }
    }
    return part;
  };

  const int threads =
      std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, std::max(1, samples / 64));
  std::vector<std::future<Partial>> jobs;
  for (int t = 0; t < threads; ++t)
  {
    const int begin = samples * t / threads;
    const int end = samples * (t + 1) / threads;
    jobs.push_back(std::async(std::launch::async, work, begin, end));
  }
  for (auto &job : jobs)
  {
    const Partial part = job.get();
    rep.max_ratio = std::max(rep.max_ratio, part.max_ratio);
    rep.resolve_discrepancy = std::max(rep.resolve_discrepancy, part.discrepancy);
    rep.resolved += part.resolved;
  }
  return rep;
}

}  // namespace nepv
