#include <doctest.h>

#include <random>

#include "nepv/backward_error.hpp"
#include "nepv/error.hpp"
#include "nepv/experiments.hpp"
#include "support.hpp"

using namespace nepv;

namespace
{

ErrorKind thrown_kind(auto &&fn)
{
  try
  {
    fn();
  }
  catch (const Error &e)
  {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::InvalidInput;
}

// Distinct eigenpairs (up to the sign of v) found by Newton from many random
// starts, without any continuation.
std::vector<Eigenpair> brute_force_pairs(const SpmfProblem &p, int starts, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lam(-8.0, 8.0);
  std::vector<Eigenpair> found;
  for (int k = 0; k < starts; ++k)
  {
    try
    {
      const auto res = newton_solve(p, lam(rng), testing::random_vector(p.n(), rng));
      const bool seen = std::any_of(found.begin(), found.end(), [&](const Eigenpair &q) {
        return std::abs(q.lambda - res.pair.lambda) < 1e-8 &&
               std::abs(q.v.dot(res.pair.v)) > 1.0 - 1e-8;
      });
      if (!seen)
      {
        found.push_back(res.pair);
      }
    }
    catch (const Error &)
    {
    }
  }
  return found;
}

}  // namespace

TEST_CASE("solve options validation")
{
  SolveOptions bad;
  bad.max_iter = 0;
  CHECK(thrown_kind([&] { bad.validate(); }) == ErrorKind::InvalidInput);
  SolveOptions damp;
  damp.damping = 1.5;
  CHECK(thrown_kind([&] { damp.validate(); }) == ErrorKind::InvalidInput);
  CHECK_NOTHROW(SolveOptions{}.validate());
}

TEST_CASE("Newton from an exact eigenpair stops immediately")
{
  const auto w = build_wilkinson(5);
  const auto res = newton_solve(w, 5.0, Vector::Unit(5, 0));
  CHECK(res.iterations == 0);
  CHECK(res.eta == 0.0);
  CHECK(res.pair.lambda == 5.0);
}

TEST_CASE("Newton converges on the Wilkinson problem")
{
  std::mt19937_64 rng(4);
  for (const int n : {2, 3, 5, 10})
  {
    const auto w = build_wilkinson(n);
    const Vector v0 = Vector::Unit(n, 0) + 1e-2 * testing::random_vector(n, rng);
    const auto res = newton_solve(w, n + 0.05, v0);
    CHECK(res.pair.lambda == doctest::Approx(n).epsilon(1e-10));
    CHECK(std::abs(res.pair.v(0)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.eta <= 1e-12);
    // the reported eta is the backward error of the returned pair
    CHECK(backward_error(w, res.pair.lambda, res.pair.v, w.weights()) <= 1e-12);
    CHECK(res.pair.v.dot(v0) > 0.0);
    INFO("n = " << n);
    CHECK(testing::step_slope(res.log) >= 1.8);
  }
}

TEST_CASE("Newton backward errors decrease monotonically")
{
  const auto p = build_bifurcation(-1.0);
  const auto seeds = scf_seeds(p);
  REQUIRE_FALSE(seeds.empty());
  std::mt19937_64 rng(6);
  for (const auto &s : seeds)
  {
    const Vector v0 = s.v + 1e-3 * testing::random_vector(3, rng);
    const auto res = newton_solve(p, v0);
    CHECK(res.eta <= 1e-12);
    for (std::size_t k = 1; k < res.log.size(); ++k)
    {
      CHECK(res.log[k].eta < res.log[k - 1].eta);
    }
    CHECK(testing::step_slope(res.log) >= 1.8);
  }
}

TEST_CASE("Newton rejects a zero start")
{
  const auto w = build_wilkinson(3);
  CHECK(thrown_kind([&] { newton_solve(w, 1.0, Vector::Zero(3)); }) == ErrorKind::ZeroVector);
}

TEST_CASE("Newton reports failure when it cannot converge")
{
  const auto w = build_wilkinson(6);
  SolveOptions one;
  one.max_iter = 1;
  std::mt19937_64 rng(5);
  CHECK(thrown_kind([&] { newton_solve(w, 0.3, testing::random_vector(6, rng), one); }) ==
        ErrorKind::MaxIterExceeded);

  // singular bordered Jacobian at the start: double eigenvalue 1, v0 not an eigenvector
  Matrix D = Matrix::Identity(3, 3);
  D(2, 2) = 2.0;
  const SpmfProblem p({{D, CoefficientFunction::constant(1.0)}});
  CHECK(thrown_kind([&] { newton_solve(p, 1.0, Vector::Ones(3)); }) ==
        ErrorKind::SingularJacobian);
}

TEST_CASE("SCF on a linear problem takes one step")
{
  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << 1.0, 2.0, 3.0;
  const SpmfProblem p({{D, CoefficientFunction::constant(1.0)}});
  const auto res = scf_solve(p, Vector::Ones(3), Selector::largest());
  CHECK(res.iterations == 1);
  CHECK(res.pair.lambda == doctest::Approx(3.0));
  CHECK(scf_solve(p, Vector::Ones(3), Selector::smallest()).pair.lambda == doctest::Approx(1.0));
  CHECK(scf_solve(p, Vector::Ones(3), Selector::nth(1)).pair.lambda == doctest::Approx(2.0));
  CHECK(scf_solve(p, Vector::Ones(3), Selector::nearest_to(2.2)).pair.lambda ==
        doctest::Approx(2.0));
  CHECK(thrown_kind([&] { scf_solve(p, Vector::Ones(3), Selector::nth(3)); }) ==
        ErrorKind::InvalidInput);
}

TEST_CASE("SCF finds the Wilkinson pair from a nearby start")
{
  const auto w = build_wilkinson(3);
  Vector v0 = Vector::Unit(3, 0);
  v0(1) = 1e-3;
  SolveOptions opts;
  opts.tol_backward = 1e-12;
  opts.max_iter = 200;
  const auto res = scf_solve(w, v0, Selector::nearest_to(3.0), opts);
  CHECK(res.pair.lambda == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(std::abs(res.pair.v(0)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("SCF seeds of the bifurcation problem are eigenpairs")
{
  const auto p = build_bifurcation(0.0);
  const auto seeds = scf_seeds(p);
  CHECK(seeds.size() >= 2);
  for (std::size_t k = 0; k < seeds.size(); ++k)
  {
    CHECK(backward_error(p, seeds[k].lambda, seeds[k].v, p.weights()) <= 1e-12);
    if (k > 0)
    {
      CHECK(seeds[k].lambda > seeds[k - 1].lambda);
    }
  }
}

TEST_CASE("solve_perturbed")
{
  const auto w = build_wilkinson(4);
  const auto pair = Eigenpair::make(w, 4.0, Vector::Unit(4, 0));
  std::mt19937_64 rng(21);
  const auto dir = random_feasible_direction(4, w.weights(), false, NormKind::Spectral, rng);
  const auto same = solve_perturbed(w, dir, 0.0, pair);
  CHECK(same.pair.lambda == pair.lambda);
  CHECK(same.pair.v == pair.v);
  CHECK(same.iterations == 0);

  // the perturbed pair satisfies the perturbed equation
  const double eps = 1e-3;
  const auto res = solve_perturbed(w, dir, eps, pair);
  const Vector f = evaluate_coefficients(w, res.pair.v);
  Matrix A = assemble_matrix(w, res.pair.v);
  for (int i = 0; i < w.m(); ++i)
  {
    A += eps * f(i) * dir.E[static_cast<std::size_t>(i)];
  }
  CHECK((A * res.pair.v - res.pair.lambda * res.pair.v).norm() <= 1e-12 * spectral_norm(A));
}

TEST_CASE("continuation of a linear family gives straight lines")
{
  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << -1.0, 0.5, 2.0;
  const ProblemFamily family = [&](double d) {
    return SpmfProblem({{D + d * Matrix::Identity(3, 3), CoefficientFunction::constant(1.0)}});
  };
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k)
  {
    grid.push_back(-0.5 + 0.05 * k);
  }
  std::vector<Eigenpair> seeds;
  for (int k = 0; k < 3; ++k)
  {
    seeds.push_back(Eigenpair::make(family(grid[0]), D(k, k) + grid[0], Vector::Unit(3, k)));
  }
  const auto data = continuation(family, grid, seeds);
  CHECK(data.turning_points.empty());
  REQUIRE(data.branches.size() == 3);
  for (std::size_t b = 0; b < 3; ++b)
  {
    const auto &pts = data.branches[b].points;
    CHECK(pts.size() == grid.size());
    for (const auto &pt : pts)
    {
      CHECK(std::abs(pt.lambda - (D(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) +
                                  pt.delta)) <= 1e-12);
    }
  }
  // lambda = -1 + delta crosses zero at delta = 1 (outside), 0.5 + delta at -0.5 (the edge)
  for (const auto &z : data.zero_crossings)
  {
    CHECK(std::abs(data.branches[static_cast<std::size_t>(z.branch)].points.front().lambda) <= 1.0);
  }
}

TEST_CASE("bifurcation topology")
{
  SweepOptions opts;
  opts.steps = 101;
  const auto data = bifurcation_sweep(opts);

  CHECK(data.branches.size() == 5);
  REQUIRE(data.turning_points.size() == 2);
  CHECK(data.turning_points[0].delta == doctest::Approx(-3.9044).epsilon(1e-4));
  CHECK(data.turning_points[1].delta == doctest::Approx(-1.3462).epsilon(1e-4));
  REQUIRE(data.zero_crossings.size() == 1);
  CHECK(data.zero_crossings[0].delta == doctest::Approx(-1.7301).epsilon(1e-4));

  // independent count of eigenpairs on each side of the turning points
  for (const auto &[delta, expected] :
       std::vector<std::pair<double, std::size_t>>{{-4.5, 3}, {-2.5, 5}, {0.0, 3}})
  {
    INFO("delta = " << delta);
    const auto p = build_bifurcation(delta);
    CHECK(brute_force_pairs(p, 400, 99).size() == expected);
    std::size_t on_branches = 0;
    for (const auto &b : data.branches)
    {
      on_branches += std::count_if(b.points.begin(), b.points.end(), [&](const BranchPoint &pt) {
        return pt.on_grid && std::abs(pt.delta - delta) < 1e-12;
      });
    }
    CHECK(on_branches == expected);
  }

  for (const auto &b : data.branches)
  {
    for (std::size_t k = 1; k < b.points.size(); ++k)
    {
      const auto &a = b.points[k - 1];
      const auto &c = b.points[k];
      CHECK(c.delta > a.delta);
      CHECK(a.v.dot(c.v) > 0.0);
    }
    for (const auto &pt : b.points)
    {
      const auto p = build_bifurcation(pt.delta);
      CHECK(backward_error(p, pt.lambda, pt.v, p.weights()) <= 1e-10);
    }
  }

  // fold points are flagged and their bordered Jacobian is singular
  for (const auto &t : data.turning_points)
  {
    int flagged = 0;
    for (const auto &b : data.branches)
    {
      for (const auto &pt : b.points)
      {
        if (pt.delta == t.delta && !pt.simple)
        {
          ++flagged;
          CHECK(std::isinf(pt.kappa));
          const auto p = build_bifurcation(pt.delta);
          const auto rep = is_simple(p, pt.lambda, pt.v);
          CHECK(rep.sigma_min_JF <= 1e-6);
        }
      }
    }
    CHECK(flagged >= 1);
  }
}

TEST_CASE("continuation rejects bad grids")
{
  const ProblemFamily family = build_bifurcation;
  const std::vector<double> empty;
  const std::vector<Eigenpair> none;
  CHECK(thrown_kind([&] { continuation(family, empty, none); }) == ErrorKind::InvalidInput);
  const std::vector<double> unsorted{0.0, -1.0, 1.0};
  CHECK(thrown_kind([&] { continuation(family, unsorted, none); }) == ErrorKind::InvalidInput);
}
