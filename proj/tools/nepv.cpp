// Command-line front end: condition numbers, backward errors, solvers and
// the two reference experiments.

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nepv/backward_error.hpp"
#include "nepv/conditioning.hpp"
#include "nepv/error.hpp"
#include "nepv/experiments.hpp"
#include "nepv/io.hpp"
#include "nepv/solvers.hpp"
#include "nepv/spectral.hpp"

namespace
{

using namespace nepv;
using nlohmann::json;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNonSimple = 4;

int exit_code(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::NonSimple:
      return kExitNonSimple;
    case ErrorKind::MaxIterExceeded:
    case ErrorKind::SingularJacobian:
    case ErrorKind::NotAnEigenvalue:
    case ErrorKind::ZeroEigenvalue:
      return kExitNumerical;
    default:
      return kExitInput;
  }
}

struct PairArgs
{
  std::string problem;
  double lambda = 0.0;
  std::string vector;
  std::string weights;
  std::string norm = "2";
  bool symmetric = false;
};

NormKind norm_kind(const std::string &s) { return s == "fro" ? NormKind::Frobenius : NormKind::Spectral; }

Vector resolve_weights(const SpmfProblem &problem, const std::string &spec)
{
  if (spec.empty())
  {
    return problem.weights();
  }
  if (spec == "relative")
  {
    return policy_weights(problem.terms(), WeightPolicy::Relative);
  }
  if (spec == "unit")
  {
    return policy_weights(problem.terms(), WeightPolicy::Unit);
  }
  Vector w = load_vector(spec);
  if (w.size() != problem.m())
  {
    throw Error(ErrorKind::InvalidInput, "weights file needs one value per term");
  }
  return problem.with_weights(w).weights();
}

void add_pair_options(CLI::App *cmd, PairArgs &a, bool lambda_required = true)
{
  cmd->add_option("--problem", a.problem, "problem JSON file")->required()->check(CLI::ExistingFile);
  auto *lam = cmd->add_option("--lambda", a.lambda, "eigenvalue");
  if (lambda_required)
  {
    lam->required();
  }
  cmd->add_option("--vector", a.vector, "eigenvector file, one value per line")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--weights", a.weights, "relative, unit or a file of weights");
  cmd->add_option("--norm", a.norm, "norm of the symmetric class")->check(CLI::IsMember({"2", "fro"}));
  cmd->add_flag("--symmetric", a.symmetric, "restrict perturbations to symmetric matrices");
}

std::string fmt(double x) { return format_double(x); }

int run_cond(const PairArgs &a, bool absolute, bool as_json, double tol_simple)
{
  const SpmfProblem problem = load_problem(a.problem);
  const Vector v = load_vector(a.vector);
  const Vector w = resolve_weights(problem, a.weights);
  const auto simple = is_simple(problem, a.lambda, v, tol_simple);
  if (!simple.is_simple)
  {
    throw Error(ErrorKind::NonSimple, "sigma_min of the bordered Jacobian is " +
                                          fmt(simple.sigma_min_JF) + ", below --tol-simple");
  }
  const auto mode = absolute ? ConditionMode::Absolute : ConditionMode::Relative;
  const auto rep = condition_report(problem, a.lambda, v, w, mode);
  const auto norm = norm_kind(a.norm);
  const double kl = !a.symmetric ? rep.kappa_lambda
                    : norm == NormKind::Spectral ? rep.kappa_lambda_sym_2
                                                 : rep.kappa_lambda_sym_F;
  const double kv = !a.symmetric ? rep.kappa_v
                    : norm == NormKind::Spectral ? rep.kappa_v_sym_2
                                                 : rep.kappa_v_sym_F;
  if (as_json)
  {
    json out = {{"lambda", a.lambda},
                {"mode", absolute ? "absolute" : "relative"},
                {"kappa_lambda", rep.kappa_lambda},
                {"kappa_lambda_sym_2", rep.kappa_lambda_sym_2},
                {"kappa_lambda_sym_F", rep.kappa_lambda_sym_F},
                {"kappa_v", rep.kappa_v},
                {"kappa_v_sym_2", rep.kappa_v_sym_2},
                {"kappa_v_sym_F", rep.kappa_v_sym_F},
                {"theta", rep.theta},
                {"beta", rep.beta},
                {"u_dot_v", rep.u_dot_v},
                {"sigma_min_JF", simple.sigma_min_JF},
                {"selected", {{"kappa_lambda", kl}, {"kappa_v", kv}}}};
    std::cout << out.dump(2) << "\n";
  }
  else
  {
    std::cout << "kappa_lambda " << fmt(kl) << "\n"
              << "kappa_v " << fmt(kv) << "\n"
              << "u_dot_v " << fmt(rep.u_dot_v) << "\n"
              << "beta " << fmt(rep.beta) << "\n"
              << "sigma_min_JF " << fmt(simple.sigma_min_JF) << "\n";
  }
  return 0;
}

int run_backward(const PairArgs &a, bool rayleigh)
{
  const SpmfProblem problem = load_problem(a.problem);
  const Vector v = load_vector(a.vector);
  const Vector w = resolve_weights(problem, a.weights);
  const double lambda = rayleigh ? rayleigh_quotient(problem, v) : a.lambda;
  const auto rep = backward_error_report(problem, lambda, v, w);
  const double eta = !a.symmetric                            ? rep.eta
                     : norm_kind(a.norm) == NormKind::Spectral ? rep.eta_sym_2
                                                               : rep.eta_sym_F;
  std::cout << "lambda " << fmt(lambda) << "\n"
            << "eta " << fmt(eta) << "\n"
            << "gamma " << fmt(rep.gamma) << "\n";
  return 0;
}

struct SolveArgs
{
  std::string problem;
  std::string method = "newton";
  std::optional<double> lambda0;
  std::string v0 = "random:0";
  double tol = 1e-13;
  int max_iter = 50;
};

Vector start_vector(const std::string &spec, int n)
{
  if (spec.rfind("random:", 0) == 0)
  {
    std::uint64_t seed = 0;
    try
    {
      seed = std::stoull(spec.substr(7));
    }
    catch (const std::exception &)
    {
      throw Error(ErrorKind::InvalidInput, "random:SEED needs an integer seed");
    }
    std::mt19937_64 rng(splitmix64(seed));
    std::normal_distribution<double> g;
    Vector v(n);
    for (int i = 0; i < n; ++i)
    {
      v(i) = g(rng);
    }
    return v;
  }
  Vector v = load_vector(spec);
  if (v.size() != n)
  {
    throw Error(ErrorKind::InvalidDimension, "starting vector has the wrong length");
  }
  return v;
}

int run_solve(const SolveArgs &a)
{
  const SpmfProblem problem = load_problem(a.problem);
  const Vector v0 = start_vector(a.v0, problem.n());
  SolveOptions opts;
  opts.tol_backward = a.tol;
  opts.max_iter = a.max_iter;
  SolveResult res;
  if (a.method == "scf")
  {
    const Selector sel = a.lambda0 ? Selector::nearest_to(*a.lambda0) : Selector::smallest();
    res = scf_solve(problem, v0, sel, opts);
  }
  else
  {
    res = a.lambda0 ? newton_solve(problem, *a.lambda0, v0, opts) : newton_solve(problem, v0, opts);
  }
  const double eta = backward_error(problem, res.pair.lambda, res.pair.v, problem.weights());
  std::cout << "lambda " << fmt(res.pair.lambda) << "\n"
            << "eta " << fmt(eta) << "\n"
            << "iterations " << res.iterations << "\n"
            << "vector\n"
            << dump_vector(res.pair.v);
  return 0;
}

std::vector<int> parse_sizes(const std::string &list)
{
  std::vector<int> ns;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    try
    {
      std::size_t used = 0;
      ns.push_back(std::stoi(item, &used));
      if (used != item.size())
      {
        throw std::invalid_argument(item);
      }
    }
    catch (const std::exception &)
    {
      throw Error(ErrorKind::InvalidInput, "--n expects a comma separated list of integers");
    }
  }
  return ns;
}

int run_wilkinson(const std::string &list, const std::string &out)
{
  const auto rows = wilkinson_report(parse_sizes(list));
  std::cout << "n kappa u_dot_v alpha\n";
  for (const auto &r : rows)
  {
    std::cout << r.n << ' ' << fmt(r.kappa) << ' ' << fmt(r.u_dot_v) << ' ' << fmt(r.alpha) << "\n";
  }
  if (!out.empty())
  {
    std::ofstream os(out);
    if (!os)
    {
      throw Error(ErrorKind::InvalidInput, "cannot write " + out);
    }
    write_wilkinson_csv(os, rows);
  }
  return 0;
}

int run_bifurcation(const SweepOptions &opts, const std::string &out)
{
  const BranchData data = bifurcation_sweep(opts);
  std::ostream *summary = &std::cout;
  if (out.empty())
  {
    write_branch_csv(std::cout, data);
    summary = &std::cerr;
  }
  else
  {
    std::ofstream os(out);
    if (!os)
    {
      throw Error(ErrorKind::InvalidInput, "cannot write " + out);
    }
    write_branch_csv(os, data);
  }
  *summary << "branches " << data.branches.size() << "\n";
  for (const auto &t : data.turning_points)
  {
    *summary << "turning_point delta " << fmt(t.delta) << " lambda " << fmt(t.lambda)
             << " branches " << t.branch_a << ' ' << t.branch_b << "\n";
  }
  for (const auto &z : data.zero_crossings)
  {
    *summary << "zero_eigenvalue delta " << fmt(z.delta) << " branch " << z.branch << "\n";
  }
  return 0;
}

int run_verify(const PairArgs &a, int samples, double eps, std::uint64_t seed,
               const std::string &cls)
{
  const SpmfProblem problem = load_problem(a.problem);
  const Vector v = load_vector(a.vector);
  const Vector w = resolve_weights(problem, a.weights);
  const Eigenpair pair = Eigenpair::make(problem, a.lambda, v);
  const bool symmetric = a.symmetric || cls == "symmetric";
  const auto rep = monte_carlo_condition_check(problem, pair, w, symmetric, norm_kind(a.norm),
                                               samples, eps, seed, std::max(1, samples / 20));
  const bool bounded = rep.max_ratio <= rep.predicted_kappa * (1.0 + 1e-10);
  const bool attained =
      std::abs(rep.attained_ratio - rep.predicted_kappa) <= 1e-10 * rep.predicted_kappa;
  std::cout << "samples " << rep.samples << "\n"
            << "seed " << rep.seed << "\n"
            << "predicted_kappa " << fmt(rep.predicted_kappa) << "\n"
            << "max_ratio " << fmt(rep.max_ratio) << "\n"
            << "attained_ratio " << fmt(rep.attained_ratio) << "\n"
            << "resolved " << rep.resolved << "\n"
            << "resolve_discrepancy " << fmt(rep.resolve_discrepancy) << "\n"
            << "bound " << (bounded ? "ok" : "violated") << "\n"
            << "attained " << (attained ? "ok" : "violated") << "\n";
  return bounded && attained ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Condition numbers, backward errors and solvers for NEPv in sum-of-products form"};
  app.require_subcommand(1);

  PairArgs cond_args;
  bool absolute = false;
  bool as_json = false;
  auto *cond = app.add_subcommand("cond", "eigenvalue and eigenvector condition numbers");
  add_pair_options(cond, cond_args);
  cond->add_flag("--absolute", absolute, "absolute instead of relative kappa(lambda)");
  cond->add_flag("--json", as_json, "print the full report as JSON");
  double tol_simple = kDefaultSimpleTolerance;
  cond->add_option("--tol-simple", tol_simple, "simplicity threshold on sigma_min of the bordered Jacobian")
      ->check(CLI::PositiveNumber);

  PairArgs back_args;
  bool rayleigh = false;
  auto *back = app.add_subcommand("backward", "backward error of an approximate eigenpair");
  add_pair_options(back, back_args, false);
  back->add_flag("--rayleigh", rayleigh, "use the Rayleigh quotient as the eigenvalue");

  SolveArgs solve_args;
  auto *solve = app.add_subcommand("solve", "compute an eigenpair by Newton or SCF");
  solve->add_option("--problem", solve_args.problem, "problem JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  solve->add_option("--method", solve_args.method)->check(CLI::IsMember({"newton", "scf"}));
  solve->add_option("--lambda0", solve_args.lambda0, "starting eigenvalue (SCF: target)");
  solve->add_option("--v0", solve_args.v0, "starting vector file or random:SEED");
  solve->add_option("--tol", solve_args.tol, "backward error tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--max-iter", solve_args.max_iter)->check(CLI::NonNegativeNumber);

  std::string sizes = "2,5,10,20,30";
  std::string wilk_out;
  auto *wilk = app.add_subcommand("wilkinson", "condition of the eigenvalue n of the Wilkinson NEPv");
  wilk->add_option("--n", sizes, "comma separated sizes");
  wilk->add_option("--out", wilk_out, "CSV output file");

  SweepOptions sweep;
  std::string bif_out;
  auto *bif = app.add_subcommand("bifurcation", "branch continuation of the saddle-node example");
  bif->add_option("--delta-min", sweep.delta_min);
  bif->add_option("--delta-max", sweep.delta_max);
  bif->add_option("--steps", sweep.steps)->check(CLI::Range(2, 1000000));
  bif->add_option("--tol-simple", sweep.continuation.tol_simple, "simplicity threshold for branch points")
      ->check(CLI::PositiveNumber);
  bif->add_option("--out", bif_out, "CSV output file (default: standard output)");

  PairArgs ver_args;
  int samples = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::string cls = "arbitrary";
  auto *verify = app.add_subcommand("verify", "Monte-Carlo check of the eigenvalue condition number");
  add_pair_options(verify, ver_args);
  verify->add_option("--samples", samples)->required();
  verify->add_option("--eps", eps)->required();
  verify->add_option("--seed", seed)->required();
  verify->add_option("--class", cls)->check(CLI::IsMember({"arbitrary", "symmetric"}));

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try
  {
    if (*cond)
    {
      return run_cond(cond_args, absolute, as_json, tol_simple);
    }
    if (*back)
    {
      if (!rayleigh && back->count("--lambda") == 0)
      {
        throw Error(ErrorKind::InvalidInput, "--lambda is required unless --rayleigh is given");
      }
      return run_backward(back_args, rayleigh);
    }
    if (*solve)
    {
      return run_solve(solve_args);
    }
    if (*wilk)
    {
      return run_wilkinson(sizes, wilk_out);
    }
    if (*bif)
    {
      return run_bifurcation(sweep, bif_out);
    }
    if (*verify)
    {
      return run_verify(ver_args, samples, eps, seed, cls);
    }
  }
  catch (const Error &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
