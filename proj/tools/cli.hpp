// SPDX-License-Identifier: Apache-2.0

#ifndef PTWISE_TOOLS_CLI_HPP
#define PTWISE_TOOLS_CLI_HPP

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>
#include <json.hpp>
#include "ptwise/ipm.hpp"
#include "ptwise/problems.hpp"

namespace ptwise::cli
{

// Flat key/value documents: `key = value` lines, `#` comments, values are numbers, quoted
// strings, booleans or nested arrays of those.
struct Value
{
  std::variant<double, std::string, bool, std::vector<Value>> v;

  double Number() const;
  const std::string &String() const;
  const std::vector<Value> &Array() const;
  Complex AsComplex() const;  // [re, im] or a plain number
};

using Document = std::map<std::string, Value>;

// Throws Error with the offending line number.
Document ParseDocument(const std::string &text);

// A catalog name, or a path to a problem file. Overrides are merged over the file's
// parameters (catalog form) or rejected (explicit form).
ProblemSpec LoadProblem(const std::string &name_or_path, const Params &overrides = {});
ProblemSpec ProblemFromDocument(const Document &doc, const Params &overrides = {});

// "re,im" or "re".
Complex ParseComplex(const std::string &s);

nlohmann::json ToJson(Complex z);
Complex ComplexFromJson(const nlohmann::json &j);

// Result document; runtime_s is the only field that varies between identical runs.
nlohmann::json ResultToJson(const SpectralResult &r, const std::string &problem, Complex start,
                            std::uint64_t seed, double runtime_s);

// The fields of a result document, for reading results back.
struct ResultRecord
{
  std::string problem;
  Complex start, value, lambda;
  std::optional<Complex> gamma;
  std::string classification, tail;
  bool converged = false;
  int restarts = 0, total_iterations = 0, unstable_dim = 0;
  double residual = 0.0, kernel_residual = 0.0, runtime_s = 0.0;
  std::uint64_t seed = 0;
  std::optional<Complex> branch_lambda, branch_nu;
  std::vector<std::string> notes;
};

ResultRecord ResultFromJson(const nlohmann::json &j);
nlohmann::json ToJson(const ResultRecord &r);

// Columns k, restart_index, re_lambda, im_lambda, residual, log_scale; one row per
// iteration of every pass, values in the working parameter.
std::string ConvergenceCsv(const SpectralResult &r);

// RFC-4180 field quoting.
std::string CsvField(const std::string &s);
// Shortest round-trip decimal representation.
std::string FormatDouble(double x);

struct SweepPoint
{
  double value = 0.0;
  std::optional<SpectralResult> result;
  std::string error;
};

// Parameters swept: any problem parameter, "lambda0" (real part of the start) or "dx"
// (sets n = round(2 L / dx)). Points run in parallel on up to `threads` workers with seed
// opts.seed + index.
std::vector<SweepPoint> RunSweep(const std::string &problem, const Params &params,
                                 Complex start, const std::string &param,
                                 const std::vector<double> &values, const RunOptions &opts,
                                 int threads);

std::string SweepCsv(const std::string &param, const std::vector<SweepPoint> &points);

// Worker count from PTWISE_THREADS, else the hardware concurrency.
int ThreadsFromEnvironment();

// Full command line entry point; returns the process exit code (0 converged,
// 2 unresolved, 1 error).
int Main(int argc, char **argv);

}  // namespace ptwise::cli

#endif  // PTWISE_TOOLS_CLI_HPP
