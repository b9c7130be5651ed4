#pragma once

#include <filesystem>
#include <string>

#include "nepv/core_model.hpp"

namespace nepv
{

/// Problem files are JSON:
///   {"n": 3, "m": 2,
///    "terms": [{"matrix": [[...], ...], "function": {"kind": "constant", "value": 1}},
///              {"matrix": [...], "function": {"kind": "rational_quadratic", "B": [[...], ...]}}],
///    "weights": "relative" | "unit" | [w_1, ..., w_m]}
/// Matrices may be nested rows or a flat row-major array of n*n numbers.
/// "weights" defaults to "relative". Malformed input raises InvalidInput; a
/// well-formed file describing an invalid problem raises InvalidProblem.
SpmfProblem parse_problem(const std::string &text);
SpmfProblem load_problem(const std::filesystem::path &path);

/// Serializes constant and rational-quadratic terms; custom terms raise
/// InvalidInput. Weights are written as an explicit list.
std::string dump_problem(const SpmfProblem &problem);

/// One real per line; blank lines and lines starting with '#' are skipped.
Vector parse_vector(const std::string &text);
Vector load_vector(const std::filesystem::path &path);
std::string dump_vector(const Vector &v);

std::string read_text_file(const std::filesystem::path &path);

}  // namespace nepv
