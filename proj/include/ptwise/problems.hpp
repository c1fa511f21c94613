// SPDX-License-Identifier: Apache-2.0

#ifndef PTWISE_PROBLEMS_HPP
#define PTWISE_PROBLEMS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>
#include "ptwise/assembly.hpp"
#include "ptwise/ipm.hpp"

namespace ptwise
{

using Params = std::map<std::string, double>;

struct ReferenceValue
{
  std::string quantity;
  Complex value;
};

struct CatalogEntry
{
  std::string name;
  std::string summary;
  Params defaults;
  std::vector<ReferenceValue> references;
};

const std::vector<CatalogEntry> &Catalog();

// Throws UnknownProblem.
const CatalogEntry &FindEntry(const std::string &name);

// Parameters are merged over the entry defaults; unknown keys are rejected. The key "swap"
// (0 or 1) sets swap_subspaces for every entry.
ProblemSpec MakeProblem(const std::string &name, const Params &params = {});

// Scalar model lambda^q w = P(d/dx) w with symbol coefficients P_0..P_N.
struct ScalarModel
{
  std::vector<Complex> symbol;
  int time_order = 1;
};

// Empty for systems and variable-coefficient entries.
std::optional<ScalarModel> ScalarModelFor(const std::string &name, const Params &params = {});

// Companion form u = (w, .., w^(N-1)) as a lambda-pencil.
MatrixPencil CompanionPencil(const ScalarModel &m);

// P(nu) - lambda^q; det(A(lambda) - nu) = (-1)^N (P(nu) - lambda^q) / P_N.
Complex DispersionRelation(const ScalarModel &m, Complex lambda, Complex nu);

// Comoving frame: c is added to P_1.
ScalarModel Comoving(const ScalarModel &m, Complex c);

// Pencil in c of the comoving companion form at lambda = 0.
MatrixPencil SpreadingSpeedPencil(const std::string &name, const Params &params = {});

// Linear spreading speed of the extended Fisher-KPP model; NaN when eps^2 > 1/12.
double EfkppLinearSpeed(double eps);

// Pinched double root in c at lambda = 0 nearest to c0. The boundary subspaces at (0, c0)
// are continued in lambda from the Morse reference point. A complex speed is reported as
// unresolved.
SpectralResult SpreadingSpeed(const std::string &name, const Params &params, Complex c0,
                              const RunOptions &opts = {});

}  // namespace ptwise

#endif  // PTWISE_PROBLEMS_HPP
