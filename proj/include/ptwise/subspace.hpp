// SPDX-License-Identifier: Apache-2.0

#ifndef PTWISE_SUBSPACE_HPP
#define PTWISE_SUBSPACE_HPP

#include <vector>
#include "ptwise/pencil.hpp"

namespace ptwise
{

enum class SubspaceKind
{
  Unstable,  // at -infinity, leading eigenvalues by descending real part
  Stable     // at +infinity, leading eigenvalues by ascending real part
};

struct SortedSchur
{
  CMatrix q, t;
  CVector eigenvalues;
  int split = 0;
};

// 1e-8 (1 + ||a||_F).
double GapTolerance(const CMatrix &a);

// Complex Schur form with the diagonal ordered by non-increasing real part (or
// non-decreasing for ascending = true). Throws GapFailure when positions split-1 and split
// hold coinciding eigenvalues.
SortedSchur SortSchur(const CMatrix &a, int split, bool ascending = false);

// Schur frame adapted to the invariant subspace spanned by basis: the leading
// basis.cols() columns of q span it and t is upper triangular up to the (dropped)
// lower-left residual block.
SortedSchur AdaptedSchur(const CMatrix &a, const CMatrix &basis, bool ascending = false);

int MorseIndex(const MatrixPencil &a, Complex lambda_ref);

// Default reference point for the Morse index: lambda0 + 10 (1 + |lambda0|).
Complex DefaultReferencePoint(Complex lambda0);

// Solves t22 x - x t11 = r for upper triangular t11 (k x k) and t22 (m x m).
CMatrix SolveTriangularSylvester(const CMatrix &t22, const CMatrix &t11, const CMatrix &r,
                                 double tol);

// Solves a x - x b = c for general square a, b.
CMatrix SolveSylvester(const CMatrix &a, const CMatrix &b, const CMatrix &c);

struct SubspaceJet
{
  Complex base = 0.0;
  SortedSchur frame;
  int dim = 0;
  std::vector<CMatrix> h;  // h[l] for l = 0..M, h[0] = 0
  SubspaceKind kind = SubspaceKind::Unstable;

  int Order() const { return static_cast<int>(h.size()) - 1; }
  Eigen::Index Ambient() const { return frame.q.rows(); }
  // Columns Q [I; H(lambda)] in ambient coordinates.
  CMatrix Basis(Complex lambda) const;
};

// Jet of the unstable (k leading) or stable (n - k trailing) subspace of a at lambda0.
// Here k is always the unstable dimension.
SubspaceJet TaylorJet(const MatrixPencil &a, Complex lambda0, int k, int order,
                      SubspaceKind kind);

// Jet built on a supplied frame whose leading frame.split columns span the subspace.
SubspaceJet TaylorJet(const MatrixPencil &a, Complex lambda0, const SortedSchur &frame,
                      int order, SubspaceKind kind);

// a10 + a11 H - H a00 - H a01 H in frame coordinates, for the degree-M graph H(lambda).
CMatrix HomologicalResidual(const SubspaceJet &jet, const MatrixPencil &a, Complex lambda);

// Column pencil U(lambda) = Q [I; H(lambda)] about the jet base point.
MatrixPencil BasisSeries(const SubspaceJet &jet, int m_out);

struct RefineOptions
{
  int max_newton = 25;
  double tol = 1e-11;
};

// Newton on the graph map of span(u_guess) toward an invariant subspace of a(lambda);
// returns an orthonormal basis.
CMatrix NewtonRefine(const MatrixPencil &a, Complex lambda, const CMatrix &u_guess,
                     const RefineOptions &opts = {});

// ||(I - P) m u|| / ||m||, P the orthogonal projector onto span(u).
double InvarianceResidual(const CMatrix &m, const CMatrix &u);

// Largest principal angle between the column spans.
double SubspaceAngle(const CMatrix &u, const CMatrix &v);

// Sine of the smallest principal angle between the invariant subspace span(u) of a and
// its complementary invariant subspace; 0 when the two share an eigenvalue.
double InvariantSeparation(const CMatrix &a, const CMatrix &u);

// Orthonormal basis of span(u).
CMatrix Orthonormalize(const CMatrix &u);

struct ContinuationOptions
{
  double min_step = 1e-6;
  double max_step = 0.25;
  double max_angle = 0.3;
  // A step is also rejected when it moves the subspace by more than this fraction of
  // its separation from the complementary one (guards against sheet jumps near
  // branch points).
  double relative_angle = 0.25;
};

// Continues the jet subspace along lambda(tau) = l0 + tau d + i rho d tau (1 - tau),
// d = lambda1 - l0, and re-anchors a jet of the same order at lambda1.
SubspaceJet ContinueSubspace(const MatrixPencil &a, const SubspaceJet &from,
                             Complex lambda1, double rho,
                             const ContinuationOptions &opts = {});

// ContinueSubspace with the retry schedule rho = 0.5, -0.5, 0.9, -0.9.
SubspaceJet ContinueSubspaceRetry(const MatrixPencil &a, const SubspaceJet &from,
                                  Complex lambda1);

}  // namespace ptwise

#endif  // PTWISE_SUBSPACE_HPP
