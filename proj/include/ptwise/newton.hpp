// SPDX-License-Identifier: Apache-2.0

#ifndef PTWISE_NEWTON_HPP
#define PTWISE_NEWTON_HPP

#include <optional>
#include <utility>
#include <vector>
#include "ptwise/pencil.hpp"

namespace ptwise
{

// Double spatial root: (A(lambda) - nu) u = 0, (A(lambda) - nu) v = u, <e0,u> = 1,
// <e0,v> = 0.
struct BranchPoint
{
  Complex lambda, nu;
  CVector u, v, e0;
  double residual = 0.0;
  int steps = 0;
  // lambda after each Newton step.
  std::vector<Complex> iterates;
};

struct BranchNewtonOptions
{
  int max_steps = 30;
  // Selects the double root nearest to this spatial exponent.
  std::optional<Complex> nu_guess;
  std::optional<CVector> u_guess;
  // Unstable dimension for the subspace-intersection initial guess; Morse index when unset.
  std::optional<int> unstable_dim;
  // Replaces the default kernel anchor.
  std::optional<CVector> e0;
  double tol = 1e-13;
  double max_condition = 1e12;
};

BranchPoint BranchPointNewton(const MatrixPencil &a, Complex lambda_guess,
                              const BranchNewtonOptions &opts = {});

// (D, dD/dnu) for D(lambda, nu) = det(A(lambda) - nu I); the derivative by central
// differences.
std::pair<Complex, Complex> DoubleRootResidual(const MatrixPencil &a, Complex lambda,
                                               Complex nu);

}  // namespace ptwise

#endif  // PTWISE_NEWTON_HPP
