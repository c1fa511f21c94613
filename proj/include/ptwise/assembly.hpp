// SPDX-License-Identifier: Apache-2.0

#ifndef PTWISE_ASSEMBLY_HPP
#define PTWISE_ASSEMBLY_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>
#include <Eigen/SparseCore>
#include "ptwise/pencil.hpp"

namespace ptwise
{

// First-order system u_x = A(x; lambda) u with asymptotic pencils at -inf and +inf.
// All pencils are in the physical parameter lambda; reparam (if set) gives lambda =
// phi(gamma) and the solver then works in gamma.
struct ProblemSpec
{
  std::string name;
  int phase_dim = 0;
  MatrixPencil a_minus, a_plus;
  // Pencil in lambda at position x. Empty for constant-coefficient problems.
  std::function<MatrixPencil(double)> interior;
  double half_length = 0.0;
  int intervals = 0;
  // Unstable dimension at -inf; computed from the Morse index when unset.
  std::optional<int> unstable_dim;
  bool swap_subspaces = false;
  std::optional<ScalarPoly> reparam;
  // Fixed boundary subspace replacing the left asymptotic subspace (half-line problems).
  std::optional<CMatrix> left_basis;
  // Subspaces (left, right) valid at the starting point, bypassing the sorted split.
  std::optional<std::pair<CMatrix, CMatrix>> seed_subspaces;
  // The reference point for the Morse index, in the working parameter.
  std::optional<Complex> reference_point;
  // max ||A(x; .) - A_+-|| at x = +-L (lambda^0 coefficients), reported by catalog builders.
  double tail_mismatch = 0.0;

  bool IsBvp() const { return static_cast<bool>(interior); }
  MatrixPencil WorkingMinus() const;
  MatrixPencil WorkingPlus() const;
  MatrixPencil WorkingInterior(double x) const;
  // Maps the working parameter to lambda.
  Complex ToLambda(Complex w) const;
};

class Factorization;

// The nonlinear pencil iota: either the dense N x N intersection map or the bordered
// trapezoidal discretization on the grid, stored by blocks.
class AssembledPencil
{
public:
  static AssembledPencil Constant(const MatrixPencil &uu, const MatrixPencil &us);
  // Any square pencil used directly as iota.
  static AssembledPencil Dense(const MatrixPencil &m);
  // nodes[j] is A(x_j; .) about any base point; it is shifted to the boundary base point.
  static AssembledPencil Bvp(std::vector<double> grid, const std::vector<MatrixPencil> &nodes,
                             const MatrixPencil &uu, const MatrixPencil &us);

  bool IsBvp() const { return bvp; }
  Eigen::Index Dim() const { return dim; }
  Eigen::Index PhaseDim() const { return n_phase; }
  int Order() const { return order; }
  int InteriorDegree() const { return p; }
  Complex BasePoint() const { return base; }
  const std::vector<double> &Grid() const { return grid; }
  // Half-open row range of the 2N boundary rows (the whole range for the dense case).
  std::pair<Eigen::Index, Eigen::Index> BoundaryRows() const;
  Eigen::Index LeftDim() const { return k_left; }

  // iota_l x.
  CVector Apply(int l, const CVector &x) const;
  // iota(lambda) x.
  CVector ApplyEval(Complex lambda, const CVector &x) const;
  Eigen::SparseMatrix<Complex> OrderMatrix(int l) const;
  CMatrix DenseEval(Complex lambda) const;
  // sqrt(||iota_0||_1 ||iota_0||_inf).
  double ZeroOrderNorm() const;

  // Calls f(row, col, value) for every stored entry of iota_l.
  void ForEachEntry(int l, const std::function<void(Eigen::Index, Eigen::Index, Complex)> &f)
      const;

private:
  bool bvp = false;
  Eigen::Index dim = 0, n_phase = 0, k_left = 0;
  int order = 0, p = 0;
  Complex base = 0.0;
  std::vector<double> grid;
  MatrixPencil dense;                        // constant case
  std::vector<std::vector<CMatrix>> node;    // node[j][l], l <= p
  std::vector<CMatrix> uu, us;               // boundary series coefficients
};

AssembledPencil AssembleConstant(const MatrixPencil &uu, const MatrixPencil &us);

// Grid x_j = -L + j h, h = 2L/n, j = 0..n, with the interior of spec.
AssembledPencil AssembleBvp(const ProblemSpec &spec, const MatrixPencil &uu,
                            const MatrixPencil &us);

std::vector<double> UniformGrid(double half_length, int intervals);

// LU of iota_0, reused across the iterations of one pass.
class Factorization
{
public:
  explicit Factorization(const AssembledPencil &a);
  ~Factorization();
  Factorization(Factorization &&) noexcept;
  Factorization &operator=(Factorization &&) noexcept;

  CVector Solve(const CVector &rhs) const;
  double PivotRatio() const { return pivot_ratio; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl;
  double pivot_ratio = 0.0;
};

// Throws SingularZeroOrder when iota_0 is numerically singular.
Factorization FactorZeroOrder(const AssembledPencil &a);

}  // namespace ptwise

#endif  // PTWISE_ASSEMBLY_HPP
