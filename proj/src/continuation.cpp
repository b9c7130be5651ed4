#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include <boost/math/tools/roots.hpp>

#include "nepv/error.hpp"
#include "nepv/solvers.hpp"
#include "nepv/spectral.hpp"

namespace nepv
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

// A point on a solution curve. v is kept in the gauge v^T v = 2 so the
// bordered systems are well scaled; t is the unit tangent in (v, lambda, delta).
struct CurvePoint
{
  Vector v;
  double lambda = 0.0;
  double delta = 0.0;
  Vector t;
};

struct Segment
{
  std::vector<CurvePoint> pts;  // monotone in delta
  bool fold_front = false;      // pts.front() is a turning point
  bool fold_back = false;
};

struct Local
{
  Matrix A;
  Matrix J;
  Vector a_delta;  // d/d delta of A(v; delta) v
  double denom = 0.0;
};

Vector pack(const CurvePoint &p)
{
  const auto n = p.v.size();
  Vector y(n + 2);
  y.head(n) = p.v;
  y(n) = p.lambda;
  y(n + 1) = p.delta;
  return y;
}

CurvePoint unpack(const Vector &y)
{
  const auto n = y.size() - 2;
  CurvePoint p;
  p.v = y.head(n);
  p.lambda = y(n);
  p.delta = y(n + 1);
  return p;
}

class Tracer
{
public:
  Tracer(const ProblemFamily &family, const ContinuationOptions &opts, double dmin, double dmax)
    : family_(family), opts_(opts), dmin_(dmin), dmax_(dmax)
  {
  }

  Local local(const Vector &v, double delta) const
  {
    const SpmfProblem p = family_(delta);
    const double h = opts_.delta_derivative_step;
    Local L;
    L.A = assemble_matrix(p, v);
    L.J = assemble_jacobian(p, v);
    L.a_delta =
        (assemble_matrix(family_(delta + h), v) - assemble_matrix(family_(delta - h), v)) * v /
        (2.0 * h);
    L.denom = evaluate_coefficients(p, v).cwiseAbs().dot(p.weights()) * v.norm();
    return L;
  }

  // [J - lambda I, -v, a_delta; -v^T, 0, 0]
  static Matrix bordered(const Local &L, const Vector &v, double lambda)
  {
    const auto n = v.size();
    Matrix K = Matrix::Zero(n + 1, n + 2);
    K.topLeftCorner(n, n) = L.J - lambda * Matrix::Identity(n, n);
    K.block(0, n, n, 1) = -v;
    K.block(0, n + 1, n, 1) = L.a_delta;
    K.bottomLeftCorner(1, n) = -v.transpose();
    return K;
  }

  void set_tangent(CurvePoint &p, const Vector &orient) const
  {
    const Local L = local(p.v, p.delta);
    const Matrix K = bordered(L, p.v, p.lambda);
    Eigen::JacobiSVD<Matrix> svd(K, Eigen::ComputeFullV);
    p.t = svd.matrixV().col(K.cols() - 1);
    if (p.t.dot(orient) < 0.0)
    {
      p.t = -p.t;
    }
  }

  bool converged(const Local &L, const Vector &v, double lambda) const
  {
    const double r = (L.A * v - lambda * v).norm();
    return r <= opts_.newton.tol_backward * L.denom &&
           std::abs(1.0 - 0.5 * v.squaredNorm()) <= 1e-14;
  }

  // Pseudo-arclength corrector from the predictor at distance ds along p.t.
  std::optional<std::pair<CurvePoint, int>> correct(const CurvePoint &p, double ds) const
  {
    const auto n = p.v.size();
    const Vector yp = pack(p) + ds * p.t;
    Vector y = yp;
    for (int it = 0; it <= 12; ++it)
    {
      const CurvePoint c = unpack(y);
      const Local L = local(c.v, c.delta);
      const double arc = p.t.dot(y - yp);
      if (converged(L, c.v, c.lambda) && std::abs(arc) <= 1e-13 * (1.0 + ds))
      {
        if ((y - yp).norm() > ds)
        {
          return std::nullopt;
        }
        return std::make_pair(c, it);
      }
      Matrix M(n + 2, n + 2);
      M.topRows(n + 1) = bordered(L, c.v, c.lambda);
      M.row(n + 1) = p.t.transpose();
      Vector H(n + 2);
      H.head(n) = L.A * c.v - c.lambda * c.v;
      H(n) = 1.0 - 0.5 * c.v.squaredNorm();
      H(n + 1) = arc;
      const auto lu = M.fullPivLu();
      if (!lu.isInvertible())
      {
        return std::nullopt;
      }
      y -= lu.solve(H);
      if (!y.allFinite())
      {
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  bool inside(double delta) const { return delta >= dmin_ - 1e-12 && delta <= dmax_ + 1e-12; }

  std::vector<CurvePoint> trace(CurvePoint start) const
  {
    std::vector<CurvePoint> pts{start};
    const Vector y0 = pack(start);
    double ds = opts_.step_initial;
    const double cos_max_turn = std::cos(M_PI / 6.0);
    while (static_cast<int>(pts.size()) < opts_.max_steps)
    {
      const CurvePoint &cur = pts.back();
      auto next = correct(cur, ds);
      if (next)
      {
        set_tangent(next->first, cur.t);
      }
      if (!next || next->first.t.dot(cur.t) < cos_max_turn)
      {
        ds *= 0.5;
        if (ds < opts_.step_min)
        {
          break;
        }
        continue;
      }
      pts.push_back(next->first);
      if (!inside(pts.back().delta))
      {
        break;
      }
      // closed curve: back at the start, moving the same way
      if (pts.size() > 10 && (pack(pts.back()) - y0).norm() < ds && pts.back().t.dot(start.t) > 0.0)
      {
        break;
      }
      if (next->second <= 3)
      {
        ds = std::min(1.5 * ds, opts_.step_max);
      }
    }
    return pts;
  }

  // Solve for (v, delta) at fixed lambda, starting from a guess.
  std::optional<CurvePoint> at_lambda(double lambda, const Vector &v0, double delta0) const
  {
    const auto n = v0.size();
    Vector v = std::sqrt(2.0) * v0.normalized();
    double delta = delta0;
    for (int it = 0; it <= 30; ++it)
    {
      const Local L = local(v, delta);
      if (converged(L, v, lambda))
      {
        CurvePoint c;
        c.v = v;
        c.lambda = lambda;
        c.delta = delta;
        return c;
      }
      Matrix M = Matrix::Zero(n + 1, n + 1);
      M.topLeftCorner(n, n) = L.J - lambda * Matrix::Identity(n, n);
      M.topRightCorner(n, 1) = L.a_delta;
      M.bottomLeftCorner(1, n) = -v.transpose();
      Vector G(n + 1);
      G.head(n) = L.A * v - lambda * v;
      G(n) = 1.0 - 0.5 * v.squaredNorm();
      const auto lu = M.fullPivLu();
      if (!lu.isInvertible())
      {
        return std::nullopt;
      }
      const Vector s = lu.solve(-G);
      v += s.head(n);
      delta += s(n);
      if (!v.allFinite() || !std::isfinite(delta))
      {
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  // d delta / d lambda along the curve at a lambda-parametrized solution.
  double ddelta_dlambda(const CurvePoint &c) const
  {
    const auto n = c.v.size();
    const Local L = local(c.v, c.delta);
    Matrix M = Matrix::Zero(n + 1, n + 1);
    M.topLeftCorner(n, n) = L.J - c.lambda * Matrix::Identity(n, n);
    M.topRightCorner(n, 1) = L.a_delta;
    M.bottomLeftCorner(1, n) = -c.v.transpose();
    Vector rhs = Vector::Zero(n + 1);
    rhs.head(n) = c.v;
    return M.fullPivLu().solve(rhs)(n);
  }

  static CurvePoint interpolate(const CurvePoint &a, const CurvePoint &b, double s)
  {
    CurvePoint c;
    c.v = (1.0 - s) * a.v + s * b.v;
    c.lambda = (1.0 - s) * a.lambda + s * b.lambda;
    c.delta = (1.0 - s) * a.delta + s * b.delta;
    return c;
  }

  static double fraction(double a, double b, double x) { return a == b ? 0.0 : (x - a) / (b - a); }

  std::optional<CurvePoint> at_lambda_between(const CurvePoint &a, const CurvePoint &b,
                                              double lambda) const
  {
    const CurvePoint g = interpolate(a, b, fraction(a.lambda, b.lambda, lambda));
    return at_lambda(lambda, g.v, g.delta);
  }

  // Turning point between consecutive curve points a, b (t_delta changes sign).
  std::optional<CurvePoint> locate_fold(const CurvePoint &a, const CurvePoint &b) const
  {
    auto g = [&](double lambda) {
      const auto c = at_lambda_between(a, b, lambda);
      if (!c)
      {
        throw Error(ErrorKind::MaxIterExceeded, "lambda-parametrized solve failed");
      }
      return ddelta_dlambda(*c);
    };
    try
    {
      std::uintmax_t iters = 100;
      const auto [lo, hi] = boost::math::tools::toms748_solve(
          g, std::min(a.lambda, b.lambda), std::max(a.lambda, b.lambda),
          boost::math::tools::eps_tolerance<double>(48), iters);
      auto c = at_lambda_between(a, b, 0.5 * (lo + hi));
      if (c)
      {
        set_tangent(*c, a.t);
      }
      return c;
    }
    catch (const std::exception &)
    {
      return std::nullopt;
    }
  }

  // Curve point at delta = target inside the bracket [a, b], found by a root
  // search in lambda. Used next to turning points, where the natural
  // parametrization is ill conditioned.
  std::optional<CurvePoint> at_delta_by_lambda(const CurvePoint &a, const CurvePoint &b,
                                               double target) const
  {
    auto f = [&](double lambda) {
      const auto c = at_lambda_between(a, b, lambda);
      if (!c)
      {
        throw Error(ErrorKind::MaxIterExceeded, "lambda-parametrized solve failed");
      }
      return c->delta - target;
    };
    try
    {
      const double fa = a.delta - target;
      const double fb = b.delta - target;
      if (fa == 0.0)
      {
        return a;
      }
      if (fb == 0.0)
      {
        return b;
      }
      std::uintmax_t iters = 100;
      const bool ordered = a.lambda < b.lambda;
      const auto [lo, hi] = boost::math::tools::toms748_solve(
          f, ordered ? a.lambda : b.lambda, ordered ? b.lambda : a.lambda, ordered ? fa : fb,
          ordered ? fb : fa, boost::math::tools::eps_tolerance<double>(50), iters);
      auto c = at_lambda_between(a, b, 0.5 * (lo + hi));
      if (!c)
      {
        return std::nullopt;
      }
      // the root in lambda is accurate; fix delta exactly with a natural solve
      auto polished = at_delta(target, *c);
      return polished ? polished : c;
    }
    catch (const std::exception &)
    {
      return std::nullopt;
    }
  }

  std::optional<CurvePoint> at_delta(double delta, const CurvePoint &guess) const
  {
    try
    {
      const auto res = newton_solve(family_(delta), guess.lambda, guess.v, opts_.newton);
      CurvePoint c;
      c.v = std::sqrt(2.0) * res.pair.v;
      c.lambda = res.pair.lambda;
      c.delta = delta;
      return c;
    }
    catch (const Error &)
    {
      return std::nullopt;
    }
  }

  BranchPoint record(const CurvePoint &c, bool on_grid) const
  {
    BranchPoint p;
    p.delta = c.delta;
    p.lambda = c.lambda;
    p.v = c.v.normalized();
    p.on_grid = on_grid;
    const SpmfProblem problem = family_(c.delta);
    try
    {
      p.simple = is_simple(problem, p.lambda, p.v, opts_.tol_simple).is_simple;
    }
    catch (const Error &)
    {
      p.simple = false;
    }
    p.kappa = kInf;
    if (p.simple)
    {
      try
      {
        p.kappa = eigenvalue_condition(problem, p.lambda, p.v, problem.weights());
      }
      catch (const Error &)
      {
        p.kappa = kInf;
      }
    }
    return p;
  }

  std::vector<Segment> split_at_folds(const std::vector<CurvePoint> &pts) const
  {
    std::vector<Segment> segments(1);
    segments.back().pts.push_back(pts.front());
    const auto n = pts.front().v.size();
    for (std::size_t j = 0; j + 1 < pts.size(); ++j)
    {
      const CurvePoint &a = pts[j];
      const CurvePoint &b = pts[j + 1];
      const bool turns = a.t(n + 1) * b.t(n + 1) < 0.0;
      std::optional<CurvePoint> fold;
      if (turns)
      {
        fold = locate_fold(a, b);
        if (!fold)
        {
          // fall back to the sampled point closer to the turn
          fold = std::abs(a.t(n + 1)) < std::abs(b.t(n + 1)) ? a : b;
        }
      }
      if (fold && inside(fold->delta))
      {
        if (fold->delta != a.delta || fold->lambda != a.lambda)
        {
          segments.back().pts.push_back(*fold);
        }
        segments.back().fold_back = true;
        segments.emplace_back();
        segments.back().fold_front = true;
        segments.back().pts.push_back(*fold);
        if (fold->delta != b.delta || fold->lambda != b.lambda)
        {
          segments.back().pts.push_back(b);
        }
      }
      else
      {
        segments.back().pts.push_back(b);
      }
    }
    return segments;
  }

  // Samples a segment on the grid and next to its turning points.
  std::vector<BranchPoint> sample(const Segment &seg, std::span<const double> grid) const
  {
    std::vector<BranchPoint> out;
    const auto &pts = seg.pts;
    if (pts.size() < 2)
    {
      return out;
    }
    for (const double dg : grid)
    {
      for (std::size_t j = 0; j + 1 < pts.size(); ++j)
      {
        const CurvePoint &a = pts[j];
        const CurvePoint &b = pts[j + 1];
        const bool brackets = (a.delta - dg) * (b.delta - dg) <= 0.0 && a.delta != b.delta;
        if (!brackets || (j + 2 < pts.size() && b.delta == dg))
        {
          continue;
        }
        const bool near_fold = (j == 0 && seg.fold_front) || (j + 2 == pts.size() && seg.fold_back);
        std::optional<CurvePoint> c;
        if (!near_fold)
        {
          const CurvePoint guess = interpolate(a, b, fraction(a.delta, b.delta, dg));
          c = at_delta(dg, guess);
          if (c)
          {
            c->v = align_sign(c->v, guess.v);
            if ((pack(*c) - pack(guess)).norm() > 0.5 * (pack(b) - pack(a)).norm() + 1e-9)
            {
              c.reset();
            }
          }
        }
        if (!c)
        {
          c = at_delta_by_lambda(a, b, dg);
        }
        if (c)
        {
          c->v = align_sign(c->v, a.v);
          out.push_back(record(*c, true));
        }
        break;
      }
    }
    if (seg.fold_front)
    {
      refine(pts.front(), out, pts.back(), out);
    }
    if (seg.fold_back)
    {
      refine(pts.back(), out, pts.front(), out);
    }
    return out;
  }

  // Points at lambda = lambda* + s rho0 10^(-j/8) approaching the turning
  // point from the side of `far`, plus the turning point itself.
  void refine(const CurvePoint &fold, const std::vector<BranchPoint> &grid_points,
              const CurvePoint &far, std::vector<BranchPoint> &out) const
  {
    double rho0 = std::abs(far.lambda - fold.lambda);
    double nearest = kInf;
    for (const auto &p : grid_points)
    {
      if (p.on_grid && std::abs(p.delta - fold.delta) < nearest)
      {
        nearest = std::abs(p.delta - fold.delta);
        rho0 = std::abs(p.lambda - fold.lambda);
      }
    }
    const double side = far.lambda >= fold.lambda ? 1.0 : -1.0;
    std::vector<BranchPoint> added;
    added.push_back(record(fold, false));
    CurvePoint guess = fold;
    for (int j = opts_.fold_refinement_points; j >= 1; --j)
    {
      const double lambda = fold.lambda + side * rho0 * std::pow(10.0, -j / 8.0);
      const auto c = at_lambda(lambda, guess.v, guess.delta);
      if (!c)
      {
        continue;
      }
      guess = *c;
      CurvePoint aligned = *c;
      aligned.v = align_sign(aligned.v, fold.v);
      added.push_back(record(aligned, false));
    }
    out.insert(out.end(), added.begin(), added.end());
  }

  std::vector<double> zero_crossings(const Segment &seg) const
  {
    std::vector<double> out;
    const auto &pts = seg.pts;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j)
    {
      const CurvePoint &a = pts[j];
      const CurvePoint &b = pts[j + 1];
      if (a.lambda * b.lambda >= 0.0 || !inside(a.delta) || !inside(b.delta))
      {
        continue;
      }
      const auto c = at_lambda_between(a, b, 0.0);
      out.push_back(c ? c->delta : a.delta + fraction(a.lambda, b.lambda, 0.0) * (b.delta - a.delta));
    }
    return out;
  }

private:
  const ProblemFamily &family_;
  const ContinuationOptions &opts_;
  double dmin_;
  double dmax_;
};

bool same_pair(const BranchPoint &p, const Eigenpair &q)
{
  return std::abs(p.lambda - q.lambda) <= 1e-7 * (1.0 + std::abs(q.lambda)) &&
         std::abs(p.v.dot(q.v)) >= 1.0 - 1e-8;
}

}  // namespace

BranchData continuation(const ProblemFamily &family, std::span<const double> delta_grid,
                        std::span<const Eigenpair> seeds, const ContinuationOptions &opts)
{
  opts.newton.validate();
  if (delta_grid.empty())
  {
    throw Error(ErrorKind::InvalidInput, "empty parameter grid");
  }
  const bool increasing = delta_grid.size() < 2 || delta_grid.back() >= delta_grid.front();
  for (std::size_t k = 1; k < delta_grid.size(); ++k)
  {
    if ((delta_grid[k] > delta_grid[k - 1]) != increasing || delta_grid[k] == delta_grid[k - 1])
    {
      throw Error(ErrorKind::InvalidInput, "parameter grid must be strictly monotone");
    }
  }
  const double d0 = delta_grid.front();
  const auto [lo_it, hi_it] = std::minmax_element(delta_grid.begin(), delta_grid.end());
  const Tracer tracer(family, opts, *lo_it, *hi_it);

  BranchData data;
  data.deltas.assign(delta_grid.begin(), delta_grid.end());

  struct RawBranch
  {
    std::vector<BranchPoint> points;
    std::vector<double> zeros;
  };
  std::vector<RawBranch> raw;
  struct RawTurn
  {
    double delta, lambda;
    std::size_t a, b;
  };
  std::vector<RawTurn> turns;

  for (const Eigenpair &seed : seeds)
  {
    const bool known = std::any_of(raw.begin(), raw.end(), [&](const RawBranch &b) {
      return std::any_of(b.points.begin(), b.points.end(), [&](const BranchPoint &p) {
        return p.on_grid && p.delta == d0 && same_pair(p, seed);
      });
    });
    if (known || delta_grid.size() < 2)
    {
      continue;
    }
    CurvePoint start;
    try
    {
      const auto res = newton_solve(family(d0), seed.lambda, seed.v, opts.newton);
      start.v = std::sqrt(2.0) * res.pair.v;
      start.lambda = res.pair.lambda;
      start.delta = d0;
    }
    catch (const Error &)
    {
      continue;
    }
    const auto n = start.v.size();
    Vector orient = Vector::Zero(n + 2);
    orient(n + 1) = increasing ? 1.0 : -1.0;
    tracer.set_tangent(start, orient);

    const auto pts = tracer.trace(start);
    const auto segments = tracer.split_at_folds(pts);
    const std::size_t first = raw.size();
    for (std::size_t s = 0; s < segments.size(); ++s)
    {
      RawBranch b;
      b.points = tracer.sample(segments[s], delta_grid);
      b.zeros = tracer.zero_crossings(segments[s]);
      raw.push_back(std::move(b));
      if (s > 0)
      {
        const CurvePoint &f = segments[s].pts.front();
        turns.push_back({f.delta, f.lambda, first + s - 1, first + s});
      }
    }
  }

  // Order branches by lambda at their leftmost delta and drop empty ones.
  for (auto &b : raw)
  {
    std::sort(b.points.begin(), b.points.end(),
              [](const BranchPoint &x, const BranchPoint &y) { return x.delta < y.delta; });
  }
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < raw.size(); ++k)
  {
    if (!raw[k].points.empty())
    {
      order.push_back(k);
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto &px = raw[x].points;
    const auto &py = raw[y].points;
    if (px.front().lambda != py.front().lambda)
    {
      return px.front().lambda < py.front().lambda;
    }
    // branches leaving the same turning point: order by where they head
    return px.size() > 1 && py.size() > 1 && px[1].lambda < py[1].lambda;
  });
  std::vector<int> index(raw.size(), -1);
  for (std::size_t k = 0; k < order.size(); ++k)
  {
    index[order[k]] = static_cast<int>(k);
    data.branches.push_back({std::move(raw[order[k]].points)});
    for (const double z : raw[order[k]].zeros)
    {
      data.zero_crossings.push_back({z, static_cast<int>(k)});
    }
  }
  for (const auto &t : turns)
  {
    data.turning_points.push_back({t.delta, t.lambda, index[t.a], index[t.b]});
  }
  std::sort(data.turning_points.begin(), data.turning_points.end(),
            [](const TurningPoint &x, const TurningPoint &y) { return x.delta < y.delta; });
  std::sort(data.zero_crossings.begin(), data.zero_crossings.end(),
            [](const ZeroCrossing &x, const ZeroCrossing &y) { return x.delta < y.delta; });
  return data;
}

}  // namespace nepv
