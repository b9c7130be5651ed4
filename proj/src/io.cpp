#include "nepv/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "nepv/error.hpp"
#include "nepv/experiments.hpp"

namespace nepv
{

namespace
{

using json = nlohmann::json;

[[noreturn]] void bad(const std::string &what)
{
  throw Error(ErrorKind::InvalidInput, what);
}

Matrix matrix_from_json(const json &j, int n, const char *what)
{
  if (!j.is_array())
  {
    bad(std::string(what) + " must be an array");
  }
  Matrix M(n, n);
  if (j.size() == static_cast<std::size_t>(n) * n && (j.empty() || j.front().is_number()))
  {
    for (int k = 0; k < n * n; ++k)
    {
      M(k / n, k % n) = j.at(static_cast<std::size_t>(k)).get<double>();
    }
    return M;
  }
  if (j.size() != static_cast<std::size_t>(n))
  {
    bad(std::string(what) + " has the wrong number of rows");
  }
  for (int r = 0; r < n; ++r)
  {
    const json &row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(n))
    {
      bad(std::string(what) + " has a row of the wrong length");
    }
    for (int c = 0; c < n; ++c)
    {
      M(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return M;
}

json matrix_to_json(const Matrix &M)
{
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r)
  {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c)
    {
      row.push_back(M(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

SpmfProblem parse_problem(const std::string &text)
{
  json doc;
  try
  {
    doc = json::parse(text);
  }
  catch (const json::exception &e)
  {
    bad(std::string("problem file is not valid JSON: ") + e.what());
  }
  try
  {
    if (!doc.is_object() || !doc.contains("terms") || !doc["terms"].is_array())
    {
      bad("problem file needs a \"terms\" array");
    }
    const json &jterms = doc["terms"];
    if (jterms.empty())
    {
      bad("problem needs at least one term");
    }
    int n = 0;
    if (doc.contains("n"))
    {
      n = doc["n"].get<int>();
    }
    else
    {
      const json &first = jterms.front().at("matrix");
      n = first.size() > 0 && first.front().is_array()
              ? static_cast<int>(first.size())
              : static_cast<int>(std::lround(std::sqrt(static_cast<double>(first.size()))));
    }
    if (n < 1)
    {
      bad("n must be positive");
    }
    if (doc.contains("m") && doc["m"].get<std::size_t>() != jterms.size())
    {
      bad("m does not match the number of terms");
    }
    std::vector<Term> terms;
    for (const json &jt : jterms)
    {
      Matrix A = matrix_from_json(jt.at("matrix"), n, "matrix");
      const json &jf = jt.contains("function") ? jt["function"] : json{{"kind", "constant"}};
      const std::string kind = jf.at("kind").get<std::string>();
      if (kind == "constant")
      {
        terms.push_back({std::move(A), CoefficientFunction::constant(jf.value("value", 1.0))});
      }
      else if (kind == "rational_quadratic")
      {
        terms.push_back({std::move(A), CoefficientFunction::rational_quadratic(
                                           matrix_from_json(jf.at("B"), n, "B"))});
      }
      else
      {
        bad("unknown function kind \"" + kind + "\"");
      }
    }
    if (!doc.contains("weights"))
    {
      return SpmfProblem(std::move(terms), WeightPolicy::Relative);
    }
    const json &jw = doc["weights"];
    if (jw.is_string())
    {
      const std::string w = jw.get<std::string>();
      if (w == "relative")
      {
        return SpmfProblem(std::move(terms), WeightPolicy::Relative);
      }
      if (w == "unit")
      {
        return SpmfProblem(std::move(terms), WeightPolicy::Unit);
      }
      bad("weights must be \"relative\", \"unit\" or a list");
    }
    const auto w = jw.get<std::vector<double>>();
    return SpmfProblem(std::move(terms), Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())));
  }
  catch (const json::exception &e)
  {
    bad(std::string("malformed problem file: ") + e.what());
  }
}

SpmfProblem load_problem(const std::filesystem::path &path)
{
  return parse_problem(read_text_file(path));
}

std::string dump_problem(const SpmfProblem &problem)
{
  json doc;
  doc["n"] = problem.n();
  doc["m"] = problem.m();
  json terms = json::array();
  for (const Term &t : problem.terms())
  {
    json f;
    if (const auto *c = std::get_if<CoefficientFunction::Constant>(&t.f.kind()))
    {
      f = {{"kind", "constant"}, {"value", c->value}};
    }
    else if (const auto *q = std::get_if<CoefficientFunction::RationalQuadratic>(&t.f.kind()))
    {
      f = {{"kind", "rational_quadratic"}, {"B", matrix_to_json(q->B)}};
    }
    else
    {
      bad("custom coefficient functions cannot be serialized");
    }
    terms.push_back({{"matrix", matrix_to_json(t.A)}, {"function", f}});
  }
  doc["terms"] = std::move(terms);
  doc["weights"] = std::vector<double>(problem.weights().data(),
                                       problem.weights().data() + problem.weights().size());
  return doc.dump(2) + "\n";
}

Vector parse_vector(const std::string &text)
{
  std::istringstream in(text);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line))
  {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
    {
      continue;
    }
    std::istringstream ls(line.substr(first));
    double x = 0.0;
    std::string rest;
    if (!(ls >> x) || (ls >> rest))
    {
      bad("vector file lines must hold exactly one number: \"" + line + "\"");
    }
    values.push_back(x);
  }
  if (values.empty())
  {
    bad("vector file is empty");
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Vector load_vector(const std::filesystem::path &path)
{
  return parse_vector(read_text_file(path));
}

std::string dump_vector(const Vector &v)
{
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i)
  {
    out += format_double(v(i));
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    bad("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace nepv
